#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "qlustering/experiment.hpp"

using namespace qlustering;
using namespace qlustering::experiment;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path workdir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qlustering_unit" / name;
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing is strict") {
  CHECK_NOTHROW(parse_config(json::object()));
  CHECK_THROWS_AS(parse_config(json{{"repeat", 3}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"dataset", {{"omgea", 0.1}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"repeats", "ten"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"repeats", 2.5}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"dataset", {{"family", "torus"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"fit", {{"cost", "entropy"}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"dataset", {{"omega", 1.5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"rates", {{"gamma_in", -1.0}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json{{"schema_version", 99}}), ConfigError);
  CHECK_THROWS_AS(parse_config(json::array()), ConfigError);
}

TEST_CASE("materialized config round trips") {
  json j{{"dataset", {{"family", "ipr"}, {"length", 8}, {"gap", 3.0}, {"samples", 20}}},
         {"fit", {{"clusters", 2}, {"cost", "localization"}, {"seed", 11}}},
         {"rates", {{"gamma_in", 0.5}}},
         {"repeats", 3}};
  const auto c = parse_config(j);
  CHECK(c.dataset.length == 8);
  CHECK(c.fit.cost == CostKind::localization);
  CHECK(c.fit.seed == 11);
  const json full = to_json(c);
  CHECK(to_json(parse_config(full)) == full);
  CHECK(full["rates"]["gamma_out"] == c.rates.gamma_out);
}

TEST_CASE("run seeds") {
  CHECK(run_seed(100, 0) == 100);
  CHECK(run_seed(100, 7) == 107);
}

TEST_CASE("generate is byte deterministic") {
  ExperimentConfig c;
  c.dataset.samples = 12;
  c.output_dir = workdir("gen_a").string();
  cmd_generate(c);
  const auto a = slurp(fs::path(c.output_dir) / "dataset.csv");
  c.output_dir = workdir("gen_b").string();
  cmd_generate(c);
  CHECK(slurp(fs::path(c.output_dir) / "dataset.csv") == a);
  const auto back = read_dataset_csv(fs::path(c.output_dir) / "dataset.csv");
  CHECK(back.size() == 12);
}

TEST_CASE("fit and consensus commands write their artifacts") {
  ExperimentConfig c;
  c.dataset.samples = 16;
  c.fit.max_iters = 20;
  c.repeats = 3;
  c.plot = true;
  c.output_dir = workdir("cons").string();
  const auto m = cmd_consensus(c);
  CHECK(m["command"] == "consensus");
  CHECK(m["seeds"].size() == 3);
  for (const char* f : {"runs.csv", "consensus_matrix.csv", "consensus_labels.csv",
                        "report.json", "consensus.svg"}) {
    CHECK(fs::exists(fs::path(c.output_dir) / f));
  }
  const auto again = cmd_consensus(c);
  CHECK(again["aggregate"] == m["aggregate"]);

  c.output_dir = workdir("fit").string();
  const auto f = cmd_fit(c);
  CHECK(f["runs"][0]["final_cost"].get<double>() >= 0.0);
  CHECK(fs::exists(fs::path(c.output_dir) / "hamiltonian.csv"));
  CHECK(fs::exists(fs::path(c.output_dir) / "cost_trace.svg"));
}

TEST_CASE("feature spaces") {
  Dataset d;
  d.features = {Eigen::Vector2d(1.0, 10.0), Eigen::Vector2d(3.0, 10.0)};
  d.states = {Eigen::Vector2d(1.0, 0.0), Eigen::Vector2d(0.0, 1.0)};
  const auto z = feature_points(d, "standardized");
  CHECK(z[0](0) == doctest::Approx(-1.0));
  CHECK(z[1](0) == doctest::Approx(1.0));
  CHECK(z[0](1) == 0.0);
  CHECK(feature_points(d, "raw")[1](0) == 3.0);
  CHECK(feature_points(d, "normalized")[1](1) == 1.0);
  CHECK_THROWS_AS(feature_points(d, "pca"), ConfigError);
}
