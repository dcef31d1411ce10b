#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0rls/filter.hpp"
#include "l0rls/msd_model.hpp"
#include "l0rls/parallel.hpp"
#include "l0rls/rng.hpp"
#include "l0rls/signal.hpp"
#include "l0rls/sparse_system.hpp"

// Seeded multi-trial simulation of the filters against generated systems:
// MSD trajectory estimation, steady-state readout, the empirical lemma-1
// check and the modeling-assumption audit.

namespace l0rls {

/// Everything one experiment point needs. (base_seed, trial index) fully
/// determines each trial; distinct trials use disjoint RNG substreams.
struct TrialPlan {
  FilterConfig filter;
  SparseSystem system;
  SignalModel signal;
  long n_iters = 4000;
  int n_trials = 100;
  long steady_window = 0;  // 0: use max(200, n_iters / 10)
  std::uint64_t base_seed = 1;
  InputMode input_mode = InputMode::TappedDelay;
  bool redraw_system = false;  // fresh system (same sparsity) per trial

  long effective_steady_window() const {
    return steady_window > 0 ? steady_window : std::max<long>(200, n_iters / 10);
  }

  void validate() const {
    filter.validate();
    signal.validate();
    if (system.taps() != filter.taps)
      throw std::invalid_argument("TrialPlan: system and filter dimensions differ");
    if (n_trials < 1) throw std::invalid_argument("TrialPlan: need >= 1 trial");
    const long m = effective_steady_window();
    if (!(n_iters > m && m >= 1))
      throw std::invalid_argument("TrialPlan: need n_iters > steady_window >= 1");
  }
};

/// Raw per-iteration records of one trial: squared deviation ||h_n||^2 and
/// the zero-set share sum_{k in C_0} h_{k,n}^2, plus the final weights.
struct TrialTrace {
  std::vector<double> dev_sq;
  std::vector<double> zero_tap_sq;
  Eigen::VectorXd final_weights;
};

inline TrialTrace run_trial(const TrialPlan& plan, int trial_index) {
  plan.validate();
  try {
    const SparseSystem* sys = &plan.system;
    SparseSystem local;
    double noise_power = plan.signal.noise_power;
    if (plan.redraw_system) {
      local = SparseSystem::generate(
          plan.filter.taps, plan.system.sparsity, plan.filter.beta,
          derive_seed(plan.base_seed, StreamKind::System, trial_index + 1));
      noise_power = noise_power_from_snr(plan.signal.input_power, local.coeffs,
                                         plan.signal.snr_db);
      sys = &local;
    }
    FilterState state = make_filter_state(plan.filter);
    InputStream inputs(plan.signal.input_power, plan.input_mode, plan.filter.taps,
                       make_rng(plan.base_seed, StreamKind::Input, trial_index));
    auto noise_rng = make_rng(plan.base_seed, StreamKind::Noise, trial_index);
    const bool noisy = noise_power > 0.0;
    std::normal_distribution<double> noise(0.0, noisy ? std::sqrt(noise_power) : 1.0);
    const Eigen::VectorXd& s = sys->coeffs;

    TrialTrace trace;
    trace.dev_sq.reserve(plan.n_iters);
    trace.zero_tap_sq.reserve(plan.n_iters);
    for (long n = 0; n < plan.n_iters; ++n) {
      const Eigen::VectorXd& x = inputs.next();
      const double y = s.dot(x) + (noisy ? noise(noise_rng) : 0.0);
      l0_rls_step(state, plan.filter, x, y);
      const Eigen::VectorXd h = state.w - s;
      trace.dev_sq.push_back(h.squaredNorm());
      double zsq = 0.0;
      for (int k : sys->sets.zero) zsq += h[k] * h[k];
      trace.zero_tap_sq.push_back(zsq);
    }
    trace.final_weights = state.w;
    return trace;
  } catch (const std::exception& e) {
    throw std::runtime_error("trial " + std::to_string(trial_index) + ": " + e.what());
  }
}

/// Trial-averaged trajectory and steady-state estimates. The steady values
/// are trailing-window means of the averaged curves.
struct SimResult {
  MsdTrajectory trajectory;
  double steady_msd = 0.0;
  double steady_zero_tap_power = 0.0;
  double steady_zero_tap_rms = 0.0;  // omega estimate
  int n_trials = 0;
  std::vector<std::uint64_t> trial_streams;
};

inline SimResult aggregate(const TrialPlan& plan, const std::vector<TrialTrace>& trials) {
  if (trials.empty()) throw std::invalid_argument("aggregate: no trials");
  const std::size_t len = trials.front().dev_sq.size();
  for (const auto& t : trials) {
    if (t.dev_sq.size() != len || t.zero_tap_sq.size() != len)
      throw std::invalid_argument("aggregate: inconsistent trajectory lengths");
  }
  const int nk = plan.system.taps() - plan.system.sparsity;
  SimResult res;
  res.n_trials = static_cast<int>(trials.size());
  res.trajectory.source = MsdTrajectory::Source::Simulation;
  res.trajectory.n.resize(len);
  res.trajectory.msd.assign(len, 0.0);
  res.trajectory.zero_tap_power.assign(len, 0.0);
  res.trajectory.zero_tap_rms.assign(len, 0.0);
  for (const auto& t : trials) {  // fixed-order sum over trial index
    for (std::size_t i = 0; i < len; ++i) {
      res.trajectory.msd[i] += t.dev_sq[i];
      res.trajectory.zero_tap_power[i] += t.zero_tap_sq[i];
    }
  }
  const double inv = 1.0 / res.n_trials;
  for (std::size_t i = 0; i < len; ++i) {
    res.trajectory.n[i] = static_cast<long>(i) + 1;
    res.trajectory.msd[i] *= inv;
    res.trajectory.zero_tap_power[i] *= inv;
    res.trajectory.zero_tap_rms[i] =
        nk > 0 ? std::sqrt(res.trajectory.zero_tap_power[i] / nk) : 0.0;
  }
  const long m = std::min<long>(plan.effective_steady_window(), static_cast<long>(len));
  double acc_d = 0.0, acc_o = 0.0;
  for (std::size_t i = len - m; i < len; ++i) {
    acc_d += res.trajectory.msd[i];
    acc_o += res.trajectory.zero_tap_power[i];
  }
  res.steady_msd = acc_d / m;
  res.steady_zero_tap_power = acc_o / m;
  res.steady_zero_tap_rms = nk > 0 ? std::sqrt(res.steady_zero_tap_power / nk) : 0.0;
  for (int t = 0; t < res.n_trials; ++t)
    res.trial_streams.push_back(stream_id(StreamKind::Input, t));
  return res;
}

/// Runs all trials of a plan (in parallel) and aggregates in trial order.
inline SimResult run_plan(const TrialPlan& plan) {
  plan.validate();
  std::vector<TrialTrace> trials(plan.n_trials);
  parallel_for(plan.n_trials, [&](int t) { trials[t] = run_trial(plan, t); });
  return aggregate(plan, trials);
}

/// Empirical check of the weighted-correlation-matrix concentration limit.
///
/// Builds Phi_n = sum lambda^{n-m} x_m x_m^T from independent white Gaussian
/// vectors and measures the deviation of the normalized matrix from
/// R = P_x I. The limit the proof establishes is for the direction-averaged
/// squared deviation E ||E u||^2 = E ||E||_F^2 / N (unit u), which is what
/// `empirical` reports; the squared spectral norm is also returned for
/// reference, but it concentrates a factor above the direction average
/// (sup over directions vs mean over directions).
struct Lemma1Result {
  double empirical = 0.0;           // mean of ||.||_F^2 / N over trials
  double empirical_spectral = 0.0;  // mean squared spectral norm over trials
  double predicted = 0.0;           // ((1-lambda)/(1+lambda)) (N+1) P_x^2
};

inline Lemma1Result lemma1_check(double lambda, int dim, double input_power, long n,
                                 int n_trials, std::uint64_t seed) {
  if (!(lambda > 0.0 && lambda <= 1.0))
    throw std::invalid_argument("lemma1_check: lambda must lie in (0,1]");
  if (dim < 1 || n < 1 || n_trials < 1)
    throw std::invalid_argument("lemma1_check: dim, n, n_trials must be >= 1");
  std::vector<double> frob(n_trials, 0.0), spec(n_trials, 0.0);
  parallel_for(n_trials, [&](int t) {
    auto rng = make_rng(seed, StreamKind::Lemma, t);
    std::normal_distribution<double> gauss(0.0, std::sqrt(input_power));
    Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd x(dim);
    for (long m = 0; m <= n; ++m) {
      for (int i = 0; i < dim; ++i) x[i] = gauss(rng);
      phi *= lambda;
      phi.selfadjointView<Eigen::Lower>().rankUpdate(x);
    }
    const double scale =
        (lambda == 1.0) ? 1.0 / (n + 1)
                        : (1.0 - lambda) / (1.0 - std::pow(lambda, static_cast<double>(n + 1)));
    Eigen::MatrixXd eps = scale * Eigen::MatrixXd(phi.selfadjointView<Eigen::Lower>()) -
                          input_power * Eigen::MatrixXd::Identity(dim, dim);
    frob[t] = eps.squaredNorm() / dim;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(eps, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
    const double top = std::max(std::abs(lo), std::abs(hi));
    spec[t] = top * top;
  });
  Lemma1Result r;
  for (int t = 0; t < n_trials; ++t) {
    r.empirical += frob[t];
    r.empirical_spectral += spec[t];
  }
  r.empirical /= n_trials;
  r.empirical_spectral /= n_trials;
  r.predicted = (1.0 - lambda) / (1.0 + lambda) * (dim + 1) * input_power * input_power;
  return r;
}

/// Empirical audit of the per-tap modeling assumptions at steady state:
/// (a) normality of the zero-set weights across trials,
/// (b) sign agreement of the nonzero-set weights with the true taps,
/// (c) attraction-range membership (large taps outside, the rest inside).
struct AssumptionAudit {
  double zero_tap_normality_stat = 0.0;  // median Jarque-Bera over C_0 taps
  double sign_match_fraction = 1.0;      // over (trial, k in C_L u C_S)
  double large_out_of_range_fraction = 1.0;   // over (trial, k in C_L)
  double rest_in_range_fraction = 1.0;        // over (trial, k in C_0 u C_S)
  int n_trials = 0;
  bool sign_check_vacuous = false;  // no nonzero taps
  bool normality_vacuous = false;   // no zero taps
};

inline AssumptionAudit assumption_audit(const TrialPlan& plan) {
  plan.validate();
  std::vector<Eigen::VectorXd> finals(plan.n_trials);
  parallel_for(plan.n_trials,
               [&](int t) { finals[t] = run_trial(plan, t).final_weights; });

  const auto& sets = plan.system.sets;
  const Eigen::VectorXd& s = plan.system.coeffs;
  const double range = 1.0 / plan.filter.beta;
  const int T = plan.n_trials;

  AssumptionAudit audit;
  audit.n_trials = T;
  audit.sign_check_vacuous = sets.large.empty() && sets.small.empty();
  audit.normality_vacuous = sets.zero.empty();

  if (!audit.normality_vacuous) {
    std::vector<double> jb;
    jb.reserve(sets.zero.size());
    for (int k : sets.zero) {
      double mean = 0.0;
      for (int t = 0; t < T; ++t) mean += finals[t][k];
      mean /= T;
      double m2 = 0.0, m3 = 0.0, m4 = 0.0;
      for (int t = 0; t < T; ++t) {
        const double d = finals[t][k] - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
      }
      m2 /= T;
      m3 /= T;
      m4 /= T;
      const double skew = m3 / std::pow(m2, 1.5);
      const double kurt = m4 / (m2 * m2);
      jb.push_back(T / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0)));
    }
    std::sort(jb.begin(), jb.end());
    audit.zero_tap_normality_stat = jb[jb.size() / 2];
  }

  if (!audit.sign_check_vacuous) {
    long match = 0, total = 0;
    for (int t = 0; t < T; ++t) {
      for (int k : sets.large) {
        match += (finals[t][k] > 0) == (s[k] > 0) && finals[t][k] != 0.0;
        ++total;
      }
      for (int k : sets.small) {
        match += (finals[t][k] > 0) == (s[k] > 0) && finals[t][k] != 0.0;
        ++total;
      }
    }
    audit.sign_match_fraction = static_cast<double>(match) / total;
  }

  if (!sets.large.empty()) {
    long out = 0;
    for (int t = 0; t < T; ++t)
      for (int k : sets.large) out += std::abs(finals[t][k]) > range;
    audit.large_out_of_range_fraction =
        static_cast<double>(out) / (static_cast<long>(T) * sets.large.size());
  }
  const long rest = static_cast<long>(sets.zero.size() + sets.small.size());
  if (rest > 0) {
    long in = 0;
    for (int t = 0; t < T; ++t) {
      for (int k : sets.zero) in += std::abs(finals[t][k]) <= range;
      for (int k : sets.small) in += std::abs(finals[t][k]) <= range;
    }
    audit.rest_in_range_fraction = static_cast<double>(in) / (rest * T);
  }
  return audit;
}

}  // namespace l0rls
