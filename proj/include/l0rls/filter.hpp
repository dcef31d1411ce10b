#pragma once

#include <Eigen/Core>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "l0rls/attractor.hpp"

namespace l0rls {

/// Tuning knobs of the adaptive filter.
///
/// kappa is the zero-attraction strength (kappa = gamma (1 - lambda), with
/// gamma the cost-function penalty weight); kappa = 0 degrades the filter to
/// conventional RLS exactly. 1/beta is the attraction half-width. delta_init
/// scales the regularized start P0 = delta_init^{-1} I; callers usually set
/// it to 0.01 * input power.
struct FilterConfig {
  int taps = 1;
  double lambda = 0.995;
  double kappa = 0.0;
  double beta = 5.0;
  double delta_init = 0.01;

  void validate() const {
    if (taps < 1) throw std::invalid_argument("FilterConfig: taps must be >= 1");
    if (!(lambda > 0.0 && lambda < 1.0))
      throw std::invalid_argument("FilterConfig: lambda must lie in (0,1)");
    if (!(kappa >= 0.0)) throw std::invalid_argument("FilterConfig: kappa must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("FilterConfig: beta must be > 0");
    if (!(delta_init > 0.0))
      throw std::invalid_argument("FilterConfig: delta_init must be > 0");
  }
};

/// Mutable filter state: weight estimate w, inverse correlation matrix
/// P = Phi^{-1}, and the iteration counter.
struct FilterState {
  Eigen::VectorXd w;
  Eigen::MatrixXd P;
  long iteration = 0;
};

inline FilterState make_filter_state(const FilterConfig& cfg) {
  cfg.validate();
  FilterState st;
  st.w = Eigen::VectorXd::Zero(cfg.taps);
  st.P = Eigen::MatrixXd::Identity(cfg.taps, cfg.taps) / cfg.delta_init;
  st.iteration = 0;
  return st;
}

/// Per-step observables: the prior error xi_n = y_n - w_{n-1}^T x_n and the
/// gain vector k_n. h_sq holds ||w_n - s||^2 when a reference system was
/// supplied to the step, NaN otherwise.
struct StepRecord {
  double prior_error = 0.0;
  Eigen::VectorXd gain;
  double h_sq = std::numeric_limits<double>::quiet_NaN();
};

/// Gain vector k_n = P_{n-1} x_n / (lambda + x_n^T P_{n-1} x_n).
/// The denominator is strictly positive for a positive definite P.
inline Eigen::VectorXd gain_vector(const FilterState& st, const Eigen::VectorXd& x,
                                   double lambda) {
  const Eigen::VectorXd px = st.P * x;
  const double denom = lambda + x.dot(px);
  if (!(denom > 0.0)) {
    throw std::runtime_error("gain_vector: nonpositive denominator, P lost positive definiteness");
  }
  return px / denom;
}

/// Riccati update P <- lambda^{-1} (I - k x^T) P, re-symmetrized.
inline void riccati_update(FilterState& st, const Eigen::VectorXd& k,
                           const Eigen::VectorXd& x, double lambda) {
  const Eigen::VectorXd px = st.P * x;  // x^T P = (P x)^T since P is symmetric
  st.P.noalias() -= k * px.transpose();
  st.P /= lambda;
  st.P = 0.5 * (st.P + st.P.transpose()).eval();
}

/// One adaptation step:
///   xi_n from w_{n-1}, k_n from P_{n-1}, Riccati update to P_n, then
///   w_n = w_{n-1} + k_n xi_n + kappa P_n g(w_{n-1}).
/// The attraction term uses the already-updated P_n while the gain was built
/// from P_{n-1}; naive implementations tend to reverse this ordering.
inline StepRecord l0_rls_step(FilterState& st, const FilterConfig& cfg,
                              const Eigen::VectorXd& x, double y,
                              const Eigen::VectorXd* reference = nullptr) {
  if (x.size() != st.w.size())
    throw std::invalid_argument("l0_rls_step: input length does not match filter taps");
  if (!std::isfinite(y) || !x.allFinite())
    throw std::invalid_argument("l0_rls_step: non-finite observation");

  StepRecord rec;
  rec.prior_error = y - st.w.dot(x);
  rec.gain = gain_vector(st, x, cfg.lambda);

  Eigen::VectorXd attraction;
  if (cfg.kappa != 0.0) attraction = zero_attractor(st.w, cfg.beta);

  riccati_update(st, rec.gain, x, cfg.lambda);

  st.w.noalias() += rec.gain * rec.prior_error;
  if (cfg.kappa != 0.0) st.w.noalias() += cfg.kappa * (st.P * attraction);
  ++st.iteration;

  if (reference) rec.h_sq = (st.w - *reference).squaredNorm();
  return rec;
}

/// Conventional RLS step: the kappa = 0 specialization of l0_rls_step.
/// Shares the exact code path, so the two produce bit-identical trajectories
/// when kappa = 0.
inline StepRecord rls_step(FilterState& st, const FilterConfig& cfg,
                           const Eigen::VectorXd& x, double y,
                           const Eigen::VectorXd* reference = nullptr) {
  FilterConfig plain = cfg;
  plain.kappa = 0.0;
  return l0_rls_step(st, plain, x, y, reference);
}

}  // namespace l0rls
