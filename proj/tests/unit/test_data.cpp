#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "qlustering/csv.hpp"
#include "qlustering/data.hpp"
#include "qlustering/metrics.hpp"

using namespace qlustering;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "qlustering_unit";
  fs::create_directories(dir);
  return dir / name;
}

MoleculeRecord propanol() {
  MoleculeRecord m;
  m.name = "propanol";
  m.atoms = {{6, {0.0, 0.0, 0.0}}, {6, {1.52, 0.0, 0.0}}, {6, {2.05, 1.43, 0.0}},
             {8, {3.47, 1.43, 0.1}}, {1, {-0.4, 1.0, 0.0}}, {1, {3.8, 2.3, 0.0}}};
  m.properties = {{"gap", 0.3}, {"mu", 1.6}};
  return m;
}

}  // namespace

TEST_CASE("sphere clusters") {
  auto base = base_points_3d();
  base.resize(4);
  Rng rng = make_stream(1, 0);
  const auto zero = gen_sphere_clusters(base, 60, 0.0, rng);
  REQUIRE(zero.size() == 60);
  for (std::size_t n = 0; n < 60; ++n) {
    CHECK(zero.states[n] == base[static_cast<std::size_t>((*zero.truth)[n])]);
  }
  CHECK((*zero.truth)[14] == 0);
  CHECK((*zero.truth)[15] == 1);

  const auto ds = gen_sphere_clusters(base, 60, 0.3, rng);
  for (const auto& s : ds.states) CHECK(s.norm() == doctest::Approx(1.0).epsilon(1e-14));

  const auto uniform = gen_sphere_clusters(base, 10000, 1.0, rng);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& s : uniform.states) mean += s;
  CHECK((mean / 10000.0).norm() < 0.05);

  std::vector<std::string> warnings;
  const auto odd = gen_sphere_clusters(base, 62, 0.1, rng, &warnings);
  CHECK(warnings.size() == 1);
  std::vector<int> sizes(4, 0);
  for (int v : odd.truth->labels) ++sizes[static_cast<std::size_t>(v)];
  CHECK(sizes == std::vector<int>{16, 16, 15, 15});
  CHECK_THROWS(gen_sphere_clusters(base, 60, 1.5, rng));
}

TEST_CASE("base points") {
  const auto b3 = base_points_3d();
  REQUIRE(b3.size() == 5);
  for (const auto& b : b3) CHECK(b.norm() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(b3[3](0) == doctest::Approx(-1.0 / std::sqrt(3.0)));
  const auto b2 = base_points_2d();
  REQUIRE(b2.size() == 3);
  CHECK(b2[1](0) == doctest::Approx(std::sqrt(0.5)));
}

TEST_CASE("inverse participation ratio") {
  CHECK(ipr(Eigen::VectorXd::Unit(10, 3)) == doctest::Approx(1.0));
  CHECK(ipr(Eigen::VectorXd::Constant(10, 1.0 / std::sqrt(10.0))) == doctest::Approx(10.0));
  Eigen::VectorXd half = Eigen::VectorXd::Zero(10);
  half(0) = half(1) = std::sqrt(0.5);
  CHECK(ipr(half) == doctest::Approx(2.0));
  CHECK_THROWS(ipr(Eigen::VectorXd::Ones(3)));

  Rng rng = make_stream(2, 0);
  for (double target : {1.0, 1.5, 3.0, 5.5, 9.0, 10.0}) {
    const auto psi = gen_ipr_state(10, target, 0.05, rng);
    CHECK(psi.norm() == doctest::Approx(1.0));
    CHECK(std::abs(ipr(psi) - target) <= 0.05);
  }
}

TEST_CASE("ipr datasets") {
  const auto bands = ipr_bands(10, 7.0);
  CHECK(bands.low_lo == doctest::Approx(1.0));
  CHECK(bands.high_hi == doctest::Approx(10.0));
  CHECK(bands.high_lo - bands.low_hi == doctest::Approx(7.0));
  Rng rng = make_stream(3, 0);
  const auto ds = gen_ipr_dataset(10, 40, 3.0, 0.05, rng);
  REQUIRE(ds.size() == 40);
  const auto b = ipr_bands(10, 3.0);
  for (std::size_t n = 0; n < ds.size(); ++n) {
    const double v = ipr(ds.states[n]);
    if ((*ds.truth)[n] == 0) {
      CHECK(v <= b.low_hi + 0.05);
    } else {
      CHECK(v >= b.high_lo - 0.05);
    }
  }
  CHECK_THROWS(ipr_bands(10, 9.5));
}

TEST_CASE("SID fingerprint invariances") {
  const auto mol = propanol();
  const auto ref = sid_fingerprint(mol);
  REQUIRE(ref.size() == 10);
  CHECK(ref.norm() == doctest::Approx(1.0));
  // Four heavy atoms give six distances; the rest is padding.
  CHECK(ref.tail(4).isZero());
  const auto d = sid_distances(mol);
  CHECK(std::is_sorted(d.data(), d.data() + 6));
  CHECK(d(0) == doctest::Approx(std::sqrt(1.42 * 1.42 + 0.01)));

  auto permuted = mol;
  std::reverse(permuted.atoms.begin(), permuted.atoms.end());
  CHECK((sid_fingerprint(permuted) - ref).norm() < 1e-12);

  auto moved = mol;
  const Eigen::Matrix3d rot =
      (Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, 2, 3).normalized())).toRotationMatrix();
  for (auto& a : moved.atoms) a.position = rot * a.position + Eigen::Vector3d(5, -2, 8);
  CHECK((sid_fingerprint(moved) - ref).norm() < 1e-9);

  MoleculeRecord big;
  big.name = "hexane";
  for (int i = 0; i < 6; ++i) big.atoms.push_back({6, {1.5 * i, 0.0, 0.0}});
  CHECK_THROWS_AS(sid_fingerprint(big), TooManyPairs);
  MoleculeRecord lone;
  lone.atoms = {{6, {0, 0, 0}}, {1, {1, 0, 0}}};
  CHECK_THROWS(sid_fingerprint(lone));
}

TEST_CASE("xyz round trip and QM9 native records") {
  const auto path = scratch("mols.xyz");
  std::vector<MoleculeRecord> recs{propanol()};
  write_xyz(path, recs);
  const auto back = load_xyz(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].name == "propanol");
  CHECK(back[0].atoms.size() == 6);
  CHECK(*back[0].property("mu") == 1.6);
  CHECK((sid_fingerprint(back[0]) - sid_fingerprint(recs[0])).norm() < 1e-12);

  const auto qm9 = scratch("dsgdb9nsd_000003.xyz");
  {
    std::ofstream out(qm9);
    out << "3\n"
        << "gdb 3\t799.58812\t437.90386\t282.94545\t1.8511\t6.31\t-0.2928\t0.0687\t0.3615\t"
           "19.0002\t0.021375\t-76.404702\t-76.401867\t-76.400922\t-76.422349\t6.002\t\n"
        << "O\t-0.0343604951\t 0.9775395708\t 0.0076015923\t-0.589706\n"
        << "H\t 0.0647664303\t 0.0205721989\t 0.0015225463\t 0.294853\n"
        << "H\t 0.8717903431\t 1.3007924193\t 0.0006928633\t 0.294853\n"
        << "1597.1311\t3871.5914\t3970.9918\n"
        << "O\tO\n"
        << "InChI=1S/H2O/h1H2\tInChI=1S/H2O/h1H2\n";
  }
  const auto water = load_xyz(qm9);
  REQUIRE(water.size() == 1);
  CHECK(water[0].atoms.size() == 3);
  CHECK(*water[0].property("A") == doctest::Approx(799.58812));
  CHECK(*water[0].property("Cv") == doctest::Approx(6.002));
  CHECK(*water[0].property("gap") == doctest::Approx(0.3615));

  const auto bad = scratch("bad.xyz");
  std::ofstream(bad) << "2\nname=x\nC 0 0 0\nQq 1 1 1\n";
  CHECK_THROWS_AS(load_xyz(bad), ParseError);
  CHECK_THROWS_AS(load_xyz(scratch("missing.xyz")), IoError);
}

TEST_CASE("bundled molecule sample") {
  const auto recs = load_xyz(fs::path(QLUSTERING_SOURCE_DIR) / "data/molecules_sample.xyz");
  CHECK(recs.size() == 50);
  const auto ds = molecules_to_dataset(recs);
  CHECK(ds.size() == 50);
  CHECK(ds.dimension() == 10);
  for (const auto& s : ds.states) CHECK(s.norm() == doctest::Approx(1.0));
}

TEST_CASE("median binarization") {
  const std::vector<double> v{3.0, 1.0, 2.0, 4.0};
  CHECK(binarize_property(v).labels == std::vector<int>{1, 0, 0, 1});
  const std::vector<double> odd{5.0, 1.0, 3.0};
  CHECK(binarize_property(odd).labels == std::vector<int>{1, 0, 0});
  std::vector<std::string> warnings;
  const std::vector<double> flat{2.0, 2.0, 2.0};
  CHECK(binarize_property(flat, &warnings).labels == std::vector<int>{0, 0, 0});
  CHECK(warnings.size() == 1);
}

TEST_CASE("iris loader") {
  const auto path = fs::path(QLUSTERING_SOURCE_DIR) / "data/iris.csv";
  const auto all = load_iris(path);
  CHECK(all.size() == 150);
  CHECK(all.dimension() == 4);
  CHECK(all.truth->cluster_count() == 3);
  CHECK(all.features[0](0) == 5.1);
  CHECK(all.states[0].norm() == doctest::Approx(1.0));
  const auto three = load_iris(path, {"Sepal Width"});
  CHECK(three.dimension() == 3);
  CHECK(three.feature_names == std::vector<std::string>{"sepal_length", "petal_length", "petal_width"});
  CHECK_THROWS_AS(load_iris(path, {"stem_length"}), ConfigError);
}

TEST_CASE("dataset CSV round trip") {
  auto base = base_points_2d();
  Rng rng = make_stream(4, 0);
  const auto ds = gen_sphere_clusters(base, 9, 0.2, rng);
  const auto path = scratch("ds.csv");
  write_dataset_csv(path, ds);
  const auto back = read_dataset_csv(path);
  REQUIRE(back.size() == 9);
  for (std::size_t n = 0; n < 9; ++n) CHECK((back.states[n] - ds.states[n]).norm() < 1e-15);
  CHECK(back.truth == ds.truth);
}

TEST_CASE("csv helpers") {
  CHECK(csv::split("a,\"b,c\",\"d\"\"e\"") == std::vector<std::string>{"a", "b,c", "d\"e"});
  CHECK(csv::escape("x,y") == "\"x,y\"");
  double v = 0;
  CHECK(csv::parse_double("1.5*^-6", v));
  CHECK(v == 1.5e-6);
  CHECK_FALSE(csv::parse_double("1.5x", v));
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) {
    double y = 0;
    REQUIRE(csv::parse_double(csv::format_double(x), y));
    CHECK(y == x);
  }
}
