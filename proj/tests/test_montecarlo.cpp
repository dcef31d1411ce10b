#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numeric>

#include "l0rls/montecarlo.hpp"

using namespace l0rls;

namespace {

TrialPlan small_plan(std::uint64_t seed, double kappa, double snr_db, int taps = 16,
                     int sparsity = 2, int trials = 30, long iters = 1500) {
  TrialPlan plan;
  plan.system = SparseSystem::generate(taps, sparsity, 5.0, seed);
  plan.signal = make_signal_model(1.0, plan.system, snr_db, seed);
  plan.filter.taps = taps;
  plan.filter.lambda = 0.99;
  plan.filter.kappa = kappa;
  plan.filter.beta = 5.0;
  plan.filter.delta_init = 0.01;
  plan.n_iters = iters;
  plan.n_trials = trials;
  plan.base_seed = seed;
  return plan;
}

}  // namespace

TEST_CASE("trials are reproducible") {
  const TrialPlan plan = small_plan(3, 1e-4, 40.0, 8, 2, 4, 300);
  const TrialTrace a = run_trial(plan, 2);
  const TrialTrace b = run_trial(plan, 2);
  CHECK(a.dev_sq == b.dev_sq);
  CHECK(a.zero_tap_sq == b.zero_tap_sq);
  CHECK(a.final_weights == b.final_weights);
  const TrialTrace c = run_trial(plan, 3);
  CHECK(a.dev_sq != c.dev_sq);
}

TEST_CASE("noiseless RLS identifies the system exactly") {
  TrialPlan plan = small_plan(5, 0.0, std::numeric_limits<double>::infinity(), 8, 2,
                              1, 400);
  const TrialTrace t = run_trial(plan, 0);
  CHECK(t.dev_sq.back() < 1e-10);
}

TEST_CASE("zero-set power never exceeds the total deviation") {
  const TrialPlan plan = small_plan(7, 2e-4, 30.0, 12, 3, 3, 400);
  for (int trial = 0; trial < plan.n_trials; ++trial) {
    const TrialTrace t = run_trial(plan, trial);
    for (std::size_t i = 0; i < t.dev_sq.size(); ++i)
      REQUIRE(t.zero_tap_sq[i] <= t.dev_sq[i] * (1.0 + 1e-12));
  }
}

TEST_CASE("aggregate of a single trial is that trial") {
  const TrialPlan plan = small_plan(9, 0.0, 40.0, 8, 2, 1, 500);
  const TrialTrace t = run_trial(plan, 0);
  const SimResult res = aggregate(plan, {t});
  CHECK(res.trajectory.msd == t.dev_sq);
  CHECK(res.trajectory.zero_tap_power == t.zero_tap_sq);
  const long m = plan.effective_steady_window();
  const double mean = std::accumulate(t.dev_sq.end() - m, t.dev_sq.end(), 0.0) / m;
  CHECK(res.steady_msd == Catch::Approx(mean).epsilon(1e-15));
}

TEST_CASE("aggregate rejects ragged inputs") {
  const TrialPlan plan = small_plan(9, 0.0, 40.0, 8, 2, 2, 300);
  TrialTrace a = run_trial(plan, 0);
  TrialTrace b = run_trial(plan, 1);
  b.dev_sq.pop_back();
  CHECK_THROWS_AS(aggregate(plan, {a, b}), std::invalid_argument);
  CHECK_THROWS_AS(aggregate(plan, {}), std::invalid_argument);
}

TEST_CASE("steady window defaults to max(200, n/10)") {
  TrialPlan plan = small_plan(1, 0.0, 40.0);
  plan.n_iters = 1500;
  CHECK(plan.effective_steady_window() == 200);
  plan.n_iters = 40000;
  CHECK(plan.effective_steady_window() == 4000);
  plan.steady_window = 17;
  CHECK(plan.effective_steady_window() == 17);
}

TEST_CASE("plan validation") {
  TrialPlan plan = small_plan(1, 0.0, 40.0);
  plan.n_trials = 0;
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = small_plan(1, 0.0, 40.0);
  plan.n_iters = 100;  // not above the default steady window
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
  plan = small_plan(1, 0.0, 40.0);
  plan.filter.taps = 7;  // system/filter mismatch
  CHECK_THROWS_AS(plan.validate(), std::invalid_argument);
}

TEST_CASE("terminal deviations are uncorrelated across trials") {
  const TrialPlan plan = small_plan(11, 0.0, 40.0, 8, 1, 100, 400);
  const SimResult res = run_plan(plan);
  (void)res;
  std::vector<double> terminal(plan.n_trials);
  parallel_for(plan.n_trials,
               [&](int t) { terminal[t] = run_trial(plan, t).dev_sq.back(); });
  double sx = 0, sy = 0, sxy = 0, sxx = 0, syy = 0;
  const int n = plan.n_trials - 1;
  for (int t = 0; t < n; ++t) {
    sx += terminal[t];
    sy += terminal[t + 1];
    sxy += terminal[t] * terminal[t + 1];
    sxx += terminal[t] * terminal[t];
    syy += terminal[t + 1] * terminal[t + 1];
  }
  const double r = (sxy / n - sx / n * sy / n) /
                   std::sqrt((sxx / n - sx / n * sx / n) * (syy / n - sy / n * sy / n));
  CHECK(std::abs(r) < 0.1);
}

TEST_CASE("conventional RLS matches its theoretical steady state") {
  const TrialPlan plan = small_plan(13, 0.0, 40.0, 16, 2, 30, 1500);
  const SimResult res = run_plan(plan);
  TheoryCoeffs c = make_theory(plan.filter.lambda, 0.0, plan.system, 1.0);
  const double base = rls_baseline_msd(16, plan.signal.noise_power, c.p_inf_sq(),
                                       plan.filter.lambda);
  const double db = 10.0 * std::log10(res.steady_msd / base);
  INFO("sim " << res.steady_msd << " theory " << base << " diff " << db << " dB");
  CHECK(std::abs(db) < 1.5);
}

TEST_CASE("a Corollary-1 penalty beats the plain RLS baseline") {
  TrialPlan plain = small_plan(15, 0.0, 40.0, 16, 2, 50, 1500);
  TheoryCoeffs c = make_theory(plain.filter.lambda, 0.0, plain.system, 1.0);
  const SteadyBetas b =
      steady_betas(c, plain.system.attraction().g_sq_sum, plain.signal.noise_power);
  const double k_opt = kappa_opt(b, c);
  TrialPlan attracted = plain;
  attracted.filter.kappa = k_opt;
  const double msd_plain = run_plan(plain).steady_msd;
  const double msd_l0 = run_plan(attracted).steady_msd;
  INFO("kappa_opt " << k_opt << " plain " << msd_plain << " l0 " << msd_l0);
  CHECK(msd_l0 < msd_plain);
}

TEST_CASE("per-trial system redraw keeps the sparsity and changes the draw") {
  TrialPlan plan = small_plan(17, 0.0, 40.0, 8, 2, 2, 300);
  plan.redraw_system = true;
  const TrialTrace a = run_trial(plan, 0);
  const TrialTrace b = run_trial(plan, 1);
  CHECK(a.dev_sq != b.dev_sq);
  const SimResult res = run_plan(plan);
  CHECK(res.trajectory.msd.size() == static_cast<std::size_t>(plan.n_iters));
}

TEST_CASE("lemma-1 statistic approaches its predicted limit") {
  const Lemma1Result r = lemma1_check(0.99, 8, 1.0, 2000, 200, 21);
  CHECK(r.predicted == Catch::Approx(0.045226130653266332).epsilon(1e-12));
  CHECK(r.empirical == Catch::Approx(r.predicted).epsilon(0.15));
  // the spectral statistic concentrates strictly above the direction average
  CHECK(r.empirical_spectral > r.empirical);

  // lambda -> 1 kills the predicted limit; lambda = 1 is the ergodic average
  const Lemma1Result unit = lemma1_check(1.0, 4, 1.0, 200, 5, 22);
  CHECK(unit.predicted == 0.0);
  CHECK(unit.empirical > 0.0);

  CHECK_THROWS_AS(lemma1_check(1.2, 8, 1.0, 100, 5, 1), std::invalid_argument);
}

TEST_CASE("assumption audit at high SNR") {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(16);
  s[2] = 1.1;
  s[9] = -0.8;
  s[13] = 0.12;  // small tap
  TrialPlan plan;
  plan.system = SparseSystem::from_vector(s, 5.0);
  plan.signal = make_signal_model(1.0, plan.system, 50.0, 19);
  plan.filter.taps = 16;
  plan.filter.lambda = 0.99;
  plan.filter.kappa = 5e-4;
  plan.filter.beta = 5.0;
  plan.n_iters = 1200;
  plan.n_trials = 60;
  plan.base_seed = 19;
  const AssumptionAudit audit = assumption_audit(plan);
  CHECK_FALSE(audit.sign_check_vacuous);
  CHECK_FALSE(audit.normality_vacuous);
  CHECK(audit.sign_match_fraction > 0.95);
  CHECK(audit.large_out_of_range_fraction > 0.95);
  CHECK(audit.rest_in_range_fraction > 0.95);
  CHECK(audit.zero_tap_normality_stat >= 0.0);
}

TEST_CASE("assumption audit flags vacuous checks") {
  TrialPlan plan = small_plan(23, 0.0, std::numeric_limits<double>::infinity(), 8, 0,
                              3, 300);
  const AssumptionAudit audit = assumption_audit(plan);
  CHECK(audit.sign_check_vacuous);
  CHECK_FALSE(audit.normality_vacuous);
}

TEST_CASE("doubling the trial count shrinks the steady-state standard error") {
  auto spread = [&](int trials) {
    std::vector<double> estimates;
    for (std::uint64_t seed = 100; seed < 148; ++seed) {
      TrialPlan plan = small_plan(31, 0.0, 30.0, 4, 1, trials, 400);
      plan.base_seed = seed;  // same system, fresh streams
      estimates.push_back(run_plan(plan).steady_msd);
    }
    double mean = 0;
    for (double e : estimates) mean += e;
    mean /= estimates.size();
    double var = 0;
    for (double e : estimates) var += (e - mean) * (e - mean);
    return std::sqrt(var / (estimates.size() - 1));
  };
  const double se_small = spread(10);
  const double se_large = spread(40);
  // per-trial window means are iid, so quadrupling the trials halves the
  // standard error twice over; the ratio estimate itself carries ~15% noise
  INFO("se10 " << se_small << " se40 " << se_large);
  CHECK(se_large < se_small);
  CHECK(se_small / se_large > 1.4);
  CHECK(se_small / se_large < 2.9);
}
