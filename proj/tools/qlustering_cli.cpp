#include <cstdint>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qlustering/errors.hpp"
#include "qlustering/experiment.hpp"

namespace ex = qlustering::experiment;

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kSolver = 3, kIo = 4 };

void print_summary(const nlohmann::json& m) {
  std::cout << m["command"].get<std::string>();
  if (m.contains("aggregate")) std::cout << ' ' << m["aggregate"].dump();
  if (m.contains("files")) std::cout << "\nwrote " << m["files"].dump();
  std::cout << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Clustering with steady-state currents of an open quantum network"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::string out_dir;
  bool plot = false;

  const std::map<std::string, std::function<nlohmann::json(const ex::ExperimentConfig&)>>
      commands{{"generate", ex::cmd_generate}, {"fit", ex::cmd_fit},
               {"consensus", ex::cmd_consensus}, {"sweep", ex::cmd_sweep},
               {"baseline", ex::cmd_baseline}, {"metrics", ex::cmd_metrics}};
  const std::map<std::string, std::string> help{
      {"generate", "write the configured dataset as CSV"},
      {"fit", "run one Hamiltonian fit"},
      {"consensus", "run repeated fits and consensus clustering"},
      {"sweep", "repeat the consensus protocol over one parameter"},
      {"baseline", "k-means scores on the configured dataset"},
      {"metrics", "score an existing labels CSV"}};

  for (const auto& [name, fn] : commands) {
    auto* sub = app.add_subcommand(name, help.at(name));
    sub->add_option("--config", config_path, "JSON experiment config")->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "fit and k-means seed (overrides the config)");
    sub->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out", out_dir, "output directory (overrides the config)");
    sub->add_flag("--plot", plot, "also emit SVG plots");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    ex::ExperimentConfig config;
    if (!config_path.empty()) {
      config = ex::load_config(config_path);
    } else {
      config.kmeans.k = 0;
    }
    if (seed) {
      config.fit.seed = *seed;
      config.kmeans.seed = *seed;
    }
    if (workers) config.workers = *workers;
    if (!out_dir.empty()) config.output_dir = out_dir;
    if (plot) config.plot = true;
    config.validate();

    const auto& name = app.get_subcommands().front()->get_name();
    print_summary(commands.at(name)(config));
    return kOk;
  } catch (const qlustering::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const qlustering::ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kIo;
  } catch (const qlustering::IoError& e) {
    std::cerr << "i/o error: " << e.what() << '\n';
    return kIo;
  } catch (const qlustering::Error& e) {
    std::cerr << "solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSolver;
  }
}
