#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "qlustering/consensus.hpp"
#include "qlustering/data.hpp"
#include "qlustering/engine.hpp"
#include "qlustering/experiment.hpp"
#include "qlustering/kmeans.hpp"
#include "qlustering/metrics.hpp"
#include "qlustering/transport.hpp"

namespace py = pybind11;
using namespace qlustering;

namespace {

std::vector<InputState> to_states(const Eigen::MatrixXd& rows) {
  std::vector<InputState> out;
  out.reserve(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose());
  return out;
}

std::vector<Eigen::VectorXd> to_points(const Eigen::MatrixXd& rows) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(rows.row(i).transpose());
  return out;
}

Eigen::MatrixXd stack(const std::vector<Eigen::VectorXd>& v) {
  if (v.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), v.front().size());
  for (std::size_t i = 0; i < v.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = v[i];
  return m;
}

std::vector<Partition> to_runs(const std::vector<std::vector<int>>& runs) {
  std::vector<Partition> out;
  for (const auto& r : runs) out.emplace_back(r);
  return out;
}

CurrentMode parse_mode(const std::string& s) {
  if (s == "raw") return CurrentMode::raw;
  if (s == "normalized") return CurrentMode::normalized;
  throw ConfigError("current_mode must be raw or normalized");
}

}  // namespace

PYBIND11_MODULE(_qlustering, m) {
  m.doc() = "Clustering with steady-state currents of an open quantum network.";

  auto& base = py::register_exception<Error>(m, "QlusteringError", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  m.def(
      "currents",
      [](const Eigen::MatrixXd& h, const Eigen::VectorXd& psi, int inputs, int hidden,
         int outputs, double gamma_in, double gamma_out, bool normalized, bool dense) {
        const auto topo = NetworkTopology::layered(inputs, hidden, outputs);
        const Hamiltonian ham{h};
        ham.validate(topo);
        const DissipationRates rates{gamma_in, gamma_out};
        const InputState state(psi);
        Eigen::VectorXd j;
        if (dense) {
          const auto rho = steady_state(build_generator(ham, state, rates, topo));
          j = output_currents(rho, rates, topo);
        } else {
          j = CurrentKernel(ham, rates, topo).currents(state);
        }
        return normalized ? normalize_currents(j) : j;
      },
      py::arg("hamiltonian"), py::arg("psi"), py::arg("inputs"), py::arg("hidden"),
      py::arg("outputs"), py::arg("gamma_in") = 1.0, py::arg("gamma_out") = 1.0,
      py::arg("normalized") = false, py::arg("dense") = false,
      "Steady-state output currents of a layered network for one input state.");

  m.def(
      "steady_state",
      [](const Eigen::MatrixXd& h, const Eigen::VectorXd& psi, int inputs, int hidden,
         int outputs, double gamma_in, double gamma_out) {
        const auto topo = NetworkTopology::layered(inputs, hidden, outputs);
        const Hamiltonian ham{h};
        ham.validate(topo);
        return steady_state(
                   build_generator(ham, InputState(psi), DissipationRates{gamma_in, gamma_out}, topo))
            .matrix();
      },
      py::arg("hamiltonian"), py::arg("psi"), py::arg("inputs"), py::arg("hidden"),
      py::arg("outputs"), py::arg("gamma_in") = 1.0, py::arg("gamma_out") = 1.0);

  m.def(
      "fit",
      [](const Eigen::MatrixXd& states, int hidden, int clusters, double gamma_in,
         double gamma_out, int candidates, int max_iters, int patience, double h_max,
         std::uint64_t seed, const std::string& current_mode, int workers) {
        const auto topo = NetworkTopology::layered(static_cast<int>(states.cols()), hidden, clusters);
        FitConfig cfg;
        cfg.clusters = clusters;
        cfg.candidates = candidates;
        cfg.max_iters = max_iters;
        cfg.patience = patience;
        cfg.h_max = h_max;
        cfg.init_scale = h_max;
        cfg.seed = seed;
        cfg.current_mode = parse_mode(current_mode);
        cfg.workers = workers;
        FitResult r;
        {
          py::gil_scoped_release release;
          r = qluster_fit(to_states(states), topo, DissipationRates{gamma_in, gamma_out}, cfg);
        }
        py::dict out;
        out["labels"] = r.labels;
        out["currents"] = stack(r.currents);
        out["raw_currents"] = stack(r.raw_currents);
        out["cost_trace"] = r.cost_trace;
        out["hamiltonian"] = r.hamiltonian.couplings;
        out["iterations"] = r.iterations_run;
        return out;
      },
      py::arg("states"), py::arg("hidden"), py::arg("clusters"), py::arg("gamma_in") = 1.0,
      py::arg("gamma_out") = 1.0, py::arg("candidates") = 8, py::arg("max_iters") = 2000,
      py::arg("patience") = 200, py::arg("h_max") = 1.0, py::arg("seed") = 0,
      py::arg("current_mode") = "raw", py::arg("workers") = 1,
      "Hill-climb a layered network on unit-norm rows of `states`.");

  m.def("rand_index", [](const std::vector<int>& a, const std::vector<int>& b) {
    return rand_index(Partition(a), Partition(b));
  });
  m.def("adjusted_rand_index", [](const std::vector<int>& a, const std::vector<int>& b) {
    return adjusted_rand_index(Partition(a), Partition(b));
  });
  m.def("silhouette", [](const Eigen::MatrixXd& pts, const std::vector<int>& labels) {
    return silhouette(to_points(pts), Partition(labels));
  });
  m.def("compactness", [](const Eigen::MatrixXd& pts, const std::vector<int>& labels) {
    return compactness(to_points(pts), Partition(labels));
  });
  m.def("dunn_index", [](const Eigen::MatrixXd& pts, const std::vector<int>& labels) {
    return dunn_index(to_points(pts), Partition(labels));
  });
  m.def("stability",
        [](const std::vector<std::vector<int>>& runs) { return stability(to_runs(runs)); });
  m.def("consensus_matrix", [](const std::vector<std::vector<int>>& runs) {
    return consensus_matrix(to_runs(runs));
  });
  m.def(
      "consensus_cluster",
      [](const Eigen::MatrixXd& c, int q) { return consensus_cluster(c, q).labels; },
      py::arg("matrix"), py::arg("clusters"));

  m.def(
      "kmeans",
      [](const Eigen::MatrixXd& pts, int k, int restarts, std::uint64_t seed) {
        KMeansConfig cfg;
        cfg.k = k;
        cfg.restarts = restarts;
        cfg.seed = seed;
        const auto r = kmeans(to_points(pts), cfg);
        py::dict out;
        out["labels"] = r.labels.labels;
        out["centroids"] = stack(r.centroids);
        out["compactness"] = r.compactness;
        return out;
      },
      py::arg("points"), py::arg("k"), py::arg("restarts") = 10, py::arg("seed") = 0);

  m.def(
      "sphere_clusters",
      [](int dim, int clusters, int samples, double omega, std::uint64_t seed) {
        experiment::DatasetSpec spec;
        spec.dim = dim;
        spec.clusters = clusters;
        spec.samples = samples;
        spec.omega = omega;
        spec.seed = seed;
        const auto ds = experiment::build_dataset(spec);
        return py::make_tuple(stack(ds.states), ds.truth->labels);
      },
      py::arg("dim"), py::arg("clusters"), py::arg("samples") = 60, py::arg("omega") = 0.15,
      py::arg("seed") = 42, "Points around base directions on the unit sphere, with truth.");

  m.def("ipr", [](const Eigen::VectorXd& psi) { return ipr(psi); });

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json) {
        auto config = experiment::parse_config(nlohmann::json::parse(config_json));
        nlohmann::json out;
        py::gil_scoped_release release;
        if (command == "generate") {
          out = experiment::cmd_generate(config);
        } else if (command == "fit") {
          out = experiment::cmd_fit(config);
        } else if (command == "consensus") {
          out = experiment::cmd_consensus(config);
        } else if (command == "sweep") {
          out = experiment::cmd_sweep(config);
        } else if (command == "baseline") {
          out = experiment::cmd_baseline(config);
        } else if (command == "metrics") {
          out = experiment::cmd_metrics(config);
        } else {
          throw ConfigError("unknown command " + command);
        }
        return out.dump();
      },
      py::arg("command"), py::arg("config_json"),
      "Run a runner command from a JSON config string; returns the manifest as JSON.");
}
