// Unit tests of the text serialization helpers and flat config format.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "recon/io.hpp"

using namespace recon;

TEST_CASE("format_g17 round-trips doubles exactly") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    const double v = g(rng) * std::exp2(static_cast<int>(g(rng) * 100.0));
    CHECK(std::stod(format_g17(v)) == v);
  }
  CHECK(std::stod(format_g17(0.1)) == 0.1);
  CHECK(std::stod(format_g17(-0.0)) == 0.0);
}

TEST_CASE("matrix and vector text round-trips") {
  std::mt19937_64 rng(2);
  std::normal_distribution<double> g;
  Eigen::MatrixXd m(5, 3);
  for (int i = 0; i < m.size(); ++i) m.data()[i] = g(rng);
  const Eigen::MatrixXd mb = matrix_from_text(matrix_to_text(m));
  CHECK((mb - m).cwiseAbs().maxCoeff() == 0.0);

  Eigen::VectorXd v(17);
  for (int i = 0; i < v.size(); ++i) v[i] = g(rng);
  const Eigen::VectorXd vb = vector_from_text(vector_to_text(v));
  CHECK((vb - v).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(matrix_from_text("garbage"), std::invalid_argument);
  CHECK_THROWS_AS(vector_from_text(""), std::invalid_argument);
}

TEST_CASE("key-value config") {
  const std::string text =
      "# comment line\n"
      "experiment = fig3\n"
      "T = 41\n"
      "arms = 0, 1, 1.5, 2\n"
      "tol = 1e-6\n";
  const KeyValueConfig cfg = KeyValueConfig::parse(text);

  SUBCASE("typed accessors") {
    CHECK(cfg.get_string("experiment") == "fig3");
    CHECK(cfg.get_int("T") == 41);
    CHECK(cfg.get_double("tol") == 1e-6);
    const std::vector<double> arms = cfg.get_double_list("arms");
    REQUIRE(arms.size() == 4);
    CHECK(arms[2] == 1.5);
    CHECK(cfg.get_int_or("missing", 9) == 9);
    CHECK_THROWS_AS(cfg.get_string("missing"), std::invalid_argument);
  }

  SUBCASE("serialization round-trips losslessly including order") {
    const KeyValueConfig back = KeyValueConfig::parse(cfg.serialize());
    REQUIRE(back.keys() == cfg.keys());
    for (const std::string& k : cfg.keys()) {
      CHECK(back.get_string(k) == cfg.get_string(k));
    }
  }
}
