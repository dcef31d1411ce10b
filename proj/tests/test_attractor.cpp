#include <catch2/catch_amalgamated.hpp>

#include <limits>
#include <random>

#include "l0rls/attractor.hpp"

using l0rls::zero_attractor;

TEST_CASE("attractor pointwise values") {
  CHECK(zero_attractor(0.0, 5.0) == 0.0);
  CHECK(zero_attractor(0.1, 5.0) == Catch::Approx(-2.5).margin(1e-15));
  CHECK(zero_attractor(0.2, 5.0) == Catch::Approx(0.0).margin(1e-12));  // boundary
  CHECK(zero_attractor(0.3, 5.0) == 0.0);
  CHECK(zero_attractor(-0.1, 5.0) == Catch::Approx(2.5).margin(1e-15));
}

TEST_CASE("attractor support and boundedness") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> t(-3.0, 3.0);
  std::uniform_real_distribution<double> b(0.2, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const double beta = b(rng);
    const double x = t(rng);
    const double g = zero_attractor(x, beta);
    if (std::abs(x) >= 1.0 / beta) {
      // value is zero on the boundary and outside
      CHECK(std::abs(g) <= beta * 1e-12);
    }
    CHECK(std::abs(g) <= beta * (1.0 + 1e-12));
  }
}

TEST_CASE("attractor is odd") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> t(-1.0, 1.0);
  for (int i = 0; i < 2000; ++i) {
    const double x = t(rng);
    CHECK(zero_attractor(-x, 5.0) == -zero_attractor(x, 5.0));
  }
}

TEST_CASE("attractor rejects corrupted input") {
  CHECK_THROWS_AS(zero_attractor(std::numeric_limits<double>::quiet_NaN(), 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(zero_attractor(std::numeric_limits<double>::infinity(), 5.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(zero_attractor(0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(zero_attractor(0.1, -1.0), std::invalid_argument);
}

TEST_CASE("vector attractor applies elementwise") {
  Eigen::VectorXd w(3);
  w << 0.1, -0.1, 1.0;
  const Eigen::VectorXd g = zero_attractor(w, 5.0);
  CHECK(g[0] == Catch::Approx(-2.5));
  CHECK(g[1] == Catch::Approx(2.5));
  CHECK(g[2] == 0.0);

  CHECK(zero_attractor(Eigen::VectorXd::Zero(3), 5.0).isZero());
  Eigen::VectorXd boundary(1);
  boundary << 0.2;
  CHECK(zero_attractor(boundary, 5.0)[0] == Catch::Approx(0.0).margin(1e-12));
}
