#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>

#include "l0rls/signal.hpp"
#include "l0rls/sparse_system.hpp"

using namespace l0rls;

TEST_CASE("partition membership") {
  Eigen::VectorXd s(4);
  s << 0.0, 0.15, 1.0, 0.0;
  const IndexPartition p = partition_system(s, 5.0);
  CHECK(p.zero == std::vector<int>{0, 3});
  CHECK(p.small == std::vector<int>{1});
  CHECK(p.large == std::vector<int>{2});

  const IndexPartition all_zero = partition_system(Eigen::VectorXd::Zero(3), 2.0);
  CHECK(all_zero.large.empty());
  CHECK(all_zero.small.empty());
  CHECK(all_zero.zero.size() == 3);

  // |s| = 1/beta sits in the small set
  Eigen::VectorXd b(1);
  b << 0.2;
  const IndexPartition edge = partition_system(b, 5.0);
  CHECK(edge.small == std::vector<int>{0});

  CHECK_THROWS_AS(partition_system(s, 0.0), std::invalid_argument);
}

TEST_CASE("partition is exhaustive and disjoint") {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const SparseSystem sys = SparseSystem::generate(24, 7, 5.0, seed);
    std::set<int> seen;
    for (int k : sys.sets.zero) seen.insert(k);
    for (int k : sys.sets.large) seen.insert(k);
    for (int k : sys.sets.small) seen.insert(k);
    REQUIRE(seen.size() == 24);  // disjoint union covers all indices
    REQUIRE(sys.sets.large.size() + sys.sets.small.size() == 7);
    REQUIRE(sys.sets.zero.size() == 24 - 7);
    for (int k : sys.sets.zero) REQUIRE(sys.coeffs[k] == 0.0);
    for (int k : sys.sets.large) REQUIRE(std::abs(sys.coeffs[k]) > 0.2);
    for (int k : sys.sets.small) {
      REQUIRE(std::abs(sys.coeffs[k]) > 0.0);
      REQUIRE(std::abs(sys.coeffs[k]) <= 0.2);
    }
  }
}

TEST_CASE("system generation") {
  const SparseSystem empty = SparseSystem::generate(4, 0, 5.0, 9);
  CHECK(empty.coeffs.isZero());
  CHECK(empty.sets.zero.size() == 4);

  const SparseSystem sys = SparseSystem::generate(64, 6, 5.0, 1);
  CHECK((sys.coeffs.array() != 0.0).count() == 6);

  CHECK_THROWS_AS(SparseSystem::generate(4, 5, 5.0, 1), std::invalid_argument);

  // determinism
  const SparseSystem again = SparseSystem::generate(64, 6, 5.0, 1);
  CHECK(sys.coeffs == again.coeffs);
}

TEST_CASE("nonzero entries are standard normal in bulk") {
  double sum = 0.0, sum_sq = 0.0;
  long count = 0;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const SparseSystem sys = SparseSystem::generate(16, 4, 5.0, seed);
    for (int i = 0; i < 16; ++i) {
      if (sys.coeffs[i] != 0.0) {
        sum += sys.coeffs[i];
        sum_sq += sys.coeffs[i] * sys.coeffs[i];
        ++count;
      }
    }
  }
  const double mean = sum / count;
  const double var = sum_sq / count - mean * mean;
  CHECK(std::abs(mean) < 0.1);
  CHECK(var == Catch::Approx(1.0).margin(0.15));
}

TEST_CASE("small-set attraction statistics") {
  Eigen::VectorXd s(4);
  s << 0.0, 0.15, 1.0, 0.0;
  const SmallSetAttraction a = small_set_attraction(s, 5.0);
  CHECK(a.g_sq_sum == Catch::Approx(1.5625).epsilon(1e-14));
  CHECK(a.s_g_sum == Catch::Approx(-0.1875).epsilon(1e-14));

  Eigen::VectorXd large_only(2);
  large_only << 1.0, -2.0;
  const SmallSetAttraction none = small_set_attraction(large_only, 5.0);
  CHECK(none.g_sq_sum == 0.0);
  CHECK(none.s_g_sum == 0.0);

  Eigen::VectorXd boundary(1);
  boundary << 0.2;
  const SmallSetAttraction edge = small_set_attraction(boundary, 5.0);
  CHECK(edge.g_sq_sum == Catch::Approx(0.0).margin(1e-24));
  CHECK(edge.s_g_sum == Catch::Approx(0.0).margin(1e-24));
}

TEST_CASE("attraction statistics have fixed signs") {
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    const SparseSystem sys = SparseSystem::generate(32, 10, 3.0, seed);
    const SmallSetAttraction a = sys.attraction();
    REQUIRE(a.g_sq_sum >= 0.0);
    REQUIRE(a.s_g_sum <= 0.0);
  }
}

TEST_CASE("noise power from SNR") {
  Eigen::VectorXd s(1);
  s << std::sqrt(6.0);  // ||s||^2 = 6
  CHECK(noise_power_from_snr(1.0, s, 50.0) == Catch::Approx(6e-5).epsilon(1e-12));
  CHECK(noise_power_from_snr(1.0, s, std::numeric_limits<double>::infinity()) == 0.0);

  Eigen::VectorXd unit(1);
  unit << 1.0;
  CHECK(noise_power_from_snr(1.0, unit, 0.0) == Catch::Approx(1.0).epsilon(1e-14));

  CHECK_THROWS_AS(noise_power_from_snr(1.0, Eigen::VectorXd::Zero(4), 30.0),
                  std::invalid_argument);
}

TEST_CASE("JSON round trip") {
  const SparseSystem sys = SparseSystem::generate(12, 3, 4.0, 77);
  const SparseSystem back = SparseSystem::from_json(sys.to_json());
  CHECK(back.coeffs == sys.coeffs);
  CHECK(back.sparsity == sys.sparsity);
  CHECK(back.beta == sys.beta);
  CHECK(back.seed == sys.seed);
  CHECK(back.sets.zero == sys.sets.zero);
}

TEST_CASE("tapped-delay vectors shift by one sample") {
  InputStream xs(1.0, InputMode::TappedDelay, 6, make_rng(5, StreamKind::Input, 0));
  Eigen::VectorXd prev = xs.next();
  for (int n = 0; n < 50; ++n) {
    const Eigen::VectorXd cur = xs.next();
    REQUIRE(cur.tail(5) == prev.head(5));
    prev = cur;
  }
}

TEST_CASE("input stream matches the declared variance") {
  const double px = 2.5;
  InputStream xs(px, InputMode::TappedDelay, 4, make_rng(6, StreamKind::Input, 0));
  double sum = 0.0, sum_sq = 0.0;
  const long n = 100000;
  for (long i = 0; i < n; ++i) {
    const double v = xs.next()[0];
    sum += v;
    sum_sq += v * v;
  }
  const double var = sum_sq / n - (sum / n) * (sum / n);
  CHECK(var == Catch::Approx(px).epsilon(0.03));
}

TEST_CASE("independent mode is white across time") {
  InputStream xs(1.0, InputMode::Independent, 4, make_rng(8, StreamKind::Input, 0));
  const long n = 100000;
  double sxy = 0.0, sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
  double prev = xs.next()[0];
  for (long i = 0; i < n; ++i) {
    const double cur = xs.next()[0];
    sxy += prev * cur;
    sx += prev;
    sy += cur;
    sxx += prev * prev;
    syy += cur * cur;
    prev = cur;
  }
  const double r = (sxy / n - sx / n * sy / n) /
                   std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::abs(r) < 0.02);
}

TEST_CASE("streams are reproducible per seed") {
  InputStream a(1.0, InputMode::TappedDelay, 5, make_rng(9, StreamKind::Input, 3));
  InputStream b(1.0, InputMode::TappedDelay, 5, make_rng(9, StreamKind::Input, 3));
  for (int i = 0; i < 20; ++i) REQUIRE(a.next() == b.next());
  InputStream c(1.0, InputMode::TappedDelay, 5, make_rng(9, StreamKind::Input, 4));
  bool differs = false;
  InputStream a2(1.0, InputMode::TappedDelay, 5, make_rng(9, StreamKind::Input, 3));
  for (int i = 0; i < 20; ++i) differs |= (a2.next() != c.next());
  CHECK(differs);
}
