#pragma once

#include <Eigen/Core>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "l0rls/attractor.hpp"
#include "l0rls/sparse_system.hpp"

// Closed-form performance predictions for the l0-RLS filter: analysis
// coefficients, mean-deviation trajectories, the steady-state MSD with its
// beta1/beta2/beta3 constants, and the penalty-selection corollaries.
//
// Scalar formulas are evaluated in long double: beta1 and beta3 can span ten
// orders of magnitude against each other near lambda = 1, and the excess-MSD
// term is a small difference of large products.

namespace l0rls {

namespace detail {
using ld = long double;
inline constexpr ld kPiL = std::numbers::pi_v<ld>;
inline const ld kSqrt2PiL = std::sqrt(2.0L * kPiL);
}  // namespace detail

/// eta_n = lambda (1 - lambda^n) / (1 - lambda^{n+1}); contraction factor of
/// the mean recursion, increasing to lambda.
inline double coeff_eta(long n, double lambda) {
  const detail::ld l = lambda;
  const detail::ld ln = std::pow(l, static_cast<detail::ld>(n));
  return static_cast<double>(l * (1.0L - ln) / (1.0L - ln * l));
}

/// rho_n = (kappa / P_x) (1 - lambda) / (1 - lambda^{n+1}); attraction gain of
/// the mean recursion, decreasing to kappa (1 - lambda) / P_x.
inline double coeff_rho(long n, double lambda, double kappa, double input_power) {
  const detail::ld l = lambda;
  const detail::ld ln1 = std::pow(l, static_cast<detail::ld>(n + 1));
  return static_cast<double>(static_cast<detail::ld>(kappa) / input_power *
                             (1.0L - l) / (1.0L - ln1));
}

/// c_n = lambda^n (1 - lambda) / (1 - lambda^{n+1}) = prod_{m=1}^{n} eta_m;
/// decay of the initial mean deviation.
inline double coeff_c(long n, double lambda) {
  const detail::ld l = lambda;
  const detail::ld ln = std::pow(l, static_cast<detail::ld>(n));
  return static_cast<double>(ln * (1.0L - l) / (1.0L - ln * l));
}

/// d_n = (kappa / P_x) (1 - lambda^n) / (1 - lambda^{n+1}); accumulated
/// attraction weight, increasing to kappa / P_x.
inline double coeff_d(long n, double lambda, double kappa, double input_power) {
  const detail::ld l = lambda;
  const detail::ld ln = std::pow(l, static_cast<detail::ld>(n));
  return static_cast<double>(static_cast<detail::ld>(kappa) / input_power *
                             (1.0L - ln) / (1.0L - ln * l));
}

/// Scalar bundle for the closed-form analysis of one filter/system pairing.
struct TheoryCoeffs {
  double lambda = 0.995;
  double kappa = 0.0;
  double beta = 5.0;
  double input_power = 1.0;  // P_x
  int taps = 1;              // N
  int sparsity = 0;          // K

  void validate() const {
    if (!(lambda > 0.0 && lambda < 1.0))
      throw std::invalid_argument("TheoryCoeffs: lambda must lie in (0,1)");
    if (!(kappa >= 0.0)) throw std::invalid_argument("TheoryCoeffs: kappa must be >= 0");
    if (!(beta > 0.0)) throw std::invalid_argument("TheoryCoeffs: beta must be > 0");
    if (!(input_power > 0.0))
      throw std::invalid_argument("TheoryCoeffs: input_power must be > 0");
    if (taps < 1 || sparsity < 0 || sparsity > taps)
      throw std::invalid_argument("TheoryCoeffs: need 0 <= sparsity <= taps, taps >= 1");
  }

  /// theta = beta kappa (1 - lambda) / P_x, the normalized attraction strength.
  double theta() const {
    return static_cast<double>(static_cast<detail::ld>(beta) * kappa *
                               (1.0L - static_cast<detail::ld>(lambda)) / input_power);
  }

  /// p_inf^2 = (1 - lambda)^2 / (lambda^2 P_x), the limiting per-tap gain power.
  double p_inf_sq() const {
    const detail::ld l = lambda;
    return static_cast<double>((1.0L - l) * (1.0L - l) / (l * l * input_power));
  }

  /// p_n^2 = (1 - lambda)^2 / (lambda^2 (1 - lambda^n)^2 P_x), n >= 1.
  double p_n_sq(long n) const {
    const detail::ld l = lambda;
    const detail::ld ln = std::pow(l, static_cast<detail::ld>(n));
    const detail::ld denom = l * (1.0L - ln);
    return static_cast<double>((1.0L - l) * (1.0L - l) / (denom * denom * input_power));
  }

  /// a^2 = lambda P_x / (1 - lambda), the gain-denominator constant.
  double a_sq() const { return lambda * input_power / (1.0 - lambda); }

  /// a_n^2 = (1 - lambda^n) a^2.
  double a_n_sq(long n) const { return (1.0 - std::pow(lambda, static_cast<double>(n))) * a_sq(); }

  double eta(long n) const { return coeff_eta(n, lambda); }
  double rho(long n) const { return coeff_rho(n, lambda, kappa, input_power); }
  double c(long n) const { return coeff_c(n, lambda); }
  double d(long n) const { return coeff_d(n, lambda, kappa, input_power); }

  double kappa_from_theta(double th) const {
    return th * input_power / (beta * (1.0 - lambda));
  }
};

inline TheoryCoeffs make_theory(double lambda, double kappa, const SparseSystem& sys,
                                double input_power) {
  TheoryCoeffs c;
  c.lambda = lambda;
  c.kappa = kappa;
  c.beta = sys.beta;
  c.input_power = input_power;
  c.taps = sys.taps();
  c.sparsity = sys.sparsity;
  c.validate();
  return c;
}

/// Mean deviation coordinates at iteration n:
///   E h_{k,n} = c_n E h_{k,0} + d_n g(s_k)   for small taps,
///   E h_{k,n} = c_n E h_{k,0}                otherwise.
/// With the canonical zero start w_0 = 0, E h_{k,0} = -s_k.
inline Eigen::VectorXd mean_deviation(long n, const SparseSystem& sys,
                                      const TheoryCoeffs& coeffs,
                                      const Eigen::VectorXd& h0_mean) {
  if (h0_mean.size() != sys.coeffs.size())
    throw std::invalid_argument("mean_deviation: h0 length mismatch");
  const double cn = coeffs.c(n);
  const double dn = coeffs.d(n);
  Eigen::VectorXd out = cn * h0_mean;
  for (int k : sys.sets.small) out[k] += dn * zero_attractor(sys.coeffs[k], coeffs.beta);
  return out;
}

/// n -> infinity limit of the mean deviation: (kappa / P_x) g(s_k) on the
/// small set, 0 elsewhere.
inline Eigen::VectorXd mean_deviation_limit(const SparseSystem& sys,
                                            const TheoryCoeffs& coeffs) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(sys.taps());
  const double scale = coeffs.kappa / coeffs.input_power;
  for (int k : sys.sets.small) out[k] = scale * zero_attractor(sys.coeffs[k], coeffs.beta);
  return out;
}

/// Steady-state RMS deviation of a zero tap:
///   omega_inf = [-2 lambda theta / sqrt(2 pi)
///                + sqrt(2 lambda^2 theta^2 / pi
///                       + (1 - lambda^2)(theta^2 + P_nu p_inf^2))] / (1 - lambda^2).
inline double omega_infinity(double theta, double lambda, double noise_power,
                             double p_inf_sq) {
  using detail::ld;
  if (!(theta >= 0.0) || !(noise_power >= 0.0))
    throw std::invalid_argument("omega_infinity: theta and noise power must be >= 0");
  const ld t = theta, l = lambda;
  const ld one_m_l2 = 1.0L - l * l;
  const ld disc = 2.0L * l * l * t * t / detail::kPiL +
                  one_m_l2 * (t * t + static_cast<ld>(noise_power) * p_inf_sq);
  const ld v = (-2.0L * l * t / detail::kSqrt2PiL + std::sqrt(disc)) / one_m_l2;
  return static_cast<double>(v);
}

/// The three constants of the steady-state MSD expression.
struct SteadyBetas {
  double beta1 = 0.0;
  double beta2 = 0.0;
  double beta3 = 0.0;
};

/// beta1 = (N-K)/(1-l^2) + G/(b^2 (1-l)^2) + 4 l^2 (N-K)/(pi (1-l^2)^2)
/// beta2 = 4 l (N-K) sqrt(2 l^2/pi + 1 - l^2) / (sqrt(2 pi) (1-l^2)^2)
/// beta3 = P_nu p_inf^2 / (2 l^2 / (pi (1-l^2)) + 1)
inline SteadyBetas steady_betas(const TheoryCoeffs& c, double g_small_sum,
                                double noise_power) {
  using detail::ld;
  if (!(g_small_sum >= 0.0))
    throw std::invalid_argument("steady_betas: G(s) must be >= 0");
  const ld l = c.lambda, b = c.beta, G = g_small_sum;
  const ld nk = static_cast<ld>(c.taps - c.sparsity);
  const ld one_m_l2 = 1.0L - l * l;
  SteadyBetas out;
  out.beta1 = static_cast<double>(nk / one_m_l2 + G / (b * b * (1.0L - l) * (1.0L - l)) +
                                  4.0L * l * l * nk / (detail::kPiL * one_m_l2 * one_m_l2));
  out.beta2 = static_cast<double>(4.0L * l * nk / (detail::kSqrt2PiL * one_m_l2 * one_m_l2) *
                                  std::sqrt(2.0L * l * l / detail::kPiL + one_m_l2));
  out.beta3 = static_cast<double>(static_cast<ld>(noise_power) * c.p_inf_sq() /
                                  (2.0L * l * l / (detail::kPiL * one_m_l2) + 1.0L));
  return out;
}

/// Steady-state MSD of conventional RLS: N P_nu p_inf^2 / (1 - lambda^2).
inline double rls_baseline_msd(int taps, double noise_power, double p_inf_sq,
                               double lambda) {
  using detail::ld;
  const ld l = lambda;
  return static_cast<double>(static_cast<ld>(taps) * noise_power *
                             static_cast<ld>(p_inf_sq) / (1.0L - l * l));
}

/// D_inf = N P_nu p_inf^2 / (1 - lambda^2) + beta1 theta^2
///         - beta2 theta sqrt(theta^2 + beta3).
inline double steady_msd(double theta, const SteadyBetas& b, int taps,
                         double noise_power, double p_inf_sq, double lambda) {
  using detail::ld;
  if (!(theta >= 0.0)) throw std::invalid_argument("steady_msd: theta must be >= 0");
  const ld t = theta, l = lambda;
  const ld base = static_cast<ld>(taps) * noise_power * static_cast<ld>(p_inf_sq) /
                  (1.0L - l * l);
  const ld excess = static_cast<ld>(b.beta1) * t * t -
                    static_cast<ld>(b.beta2) * t * std::sqrt(t * t + static_cast<ld>(b.beta3));
  return static_cast<double>(base + excess);
}

/// The excess over the RLS baseline alone; negative means improvement.
inline double excess_msd(double theta, const SteadyBetas& b) {
  using detail::ld;
  const ld t = theta;
  return static_cast<double>(static_cast<ld>(b.beta1) * t * t -
                             static_cast<ld>(b.beta2) * t *
                                 std::sqrt(t * t + static_cast<ld>(b.beta3)));
}

/// Upper end of the improvement interval: theta_max = sqrt(beta2^2 beta3 /
/// (beta1^2 - beta2^2)). The filter outperforms conventional RLS for
/// 0 < theta < theta_max. A dense system (beta2 = 0) yields 0: no improving
/// penalty exists.
inline double theta_upper_bound(const SteadyBetas& b) {
  using detail::ld;
  if (b.beta2 == 0.0) return 0.0;
  if (!(b.beta1 > b.beta2))
    throw std::domain_error(
        "theta_upper_bound: beta1 <= beta2, unbounded improvement interval "
        "(parameters outside the regime of the analysis)");
  const ld b1 = b.beta1, b2 = b.beta2, b3 = b.beta3;
  return static_cast<double>(std::sqrt(b2 * b2 * b3 / ((b1 - b2) * (b1 + b2))));
}

inline double kappa_upper_bound(const SteadyBetas& b, const TheoryCoeffs& c) {
  return c.kappa_from_theta(theta_upper_bound(b));
}

/// MSD-minimizing penalty:
///   theta_opt = (sqrt(beta3)/2) (q - 1/q), q = ((beta1+beta2)/(beta1-beta2))^{1/4}.
inline double theta_opt(const SteadyBetas& b) {
  using detail::ld;
  if (b.beta2 == 0.0) return 0.0;
  if (!(b.beta1 > b.beta2))
    throw std::domain_error(
        "theta_opt: beta1 <= beta2, unbounded improvement interval "
        "(parameters outside the regime of the analysis)");
  const ld q = std::pow((static_cast<ld>(b.beta1) + b.beta2) /
                            (static_cast<ld>(b.beta1) - b.beta2),
                        0.25L);
  return static_cast<double>(std::sqrt(static_cast<ld>(b.beta3)) / 2.0L * (q - 1.0L / q));
}

inline double kappa_opt(const SteadyBetas& b, const TheoryCoeffs& c) {
  return c.kappa_from_theta(theta_opt(b));
}

/// Minimum attainable MSD:
///   D_min = N P_nu p_inf^2/(1-lambda^2) + (beta3/2)(sqrt(beta1^2-beta2^2) - beta1).
inline double min_msd(const SteadyBetas& b, int taps, double noise_power,
                      double p_inf_sq, double lambda) {
  using detail::ld;
  if (b.beta2 != 0.0 && !(b.beta1 > b.beta2))
    throw std::domain_error("min_msd: beta1 <= beta2");
  const ld l = lambda;
  const ld base = static_cast<ld>(taps) * noise_power * static_cast<ld>(p_inf_sq) /
                  (1.0L - l * l);
  const ld b1 = b.beta1, b2 = b.beta2, b3 = b.beta3;
  return static_cast<double>(base + b3 / 2.0L * (std::sqrt((b1 - b2) * (b1 + b2)) - b1));
}

/// Large-beta limit of (minimum l0-RLS MSD) / (conventional RLS MSD):
///   (pi (1 - lambda^2) + 2 (K/N) lambda^2) / (pi (1 - lambda^2) + 2 lambda^2).
inline double min_msd_ratio_limit(double lambda, int sparsity, int taps) {
  using detail::ld;
  if (!(lambda > 0.0 && lambda < 1.0))
    throw std::invalid_argument("min_msd_ratio_limit: lambda must lie in (0,1)");
  const ld l = lambda;
  const ld one_m_l2 = 1.0L - l * l;
  const ld ratio = static_cast<ld>(sparsity) / taps;
  return static_cast<double>((detail::kPiL * one_m_l2 + 2.0L * ratio * l * l) /
                             (detail::kPiL * one_m_l2 + 2.0L * l * l));
}

/// Monotonicity audit of the minimum steady-state MSD (it is proven
/// nondecreasing in the small-set attraction G and the sparsity K, and
/// nonincreasing in beta); violations indicate an implementation bug.
struct MonotonicityReport {
  bool sparsity_nondecreasing = true;
  bool attraction_nondecreasing = true;
  bool beta_nonincreasing = true;
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Sweeps (a) sparsity with everything else held fixed, (b) a two-point G
/// comparison, and (c) beta against a fixed system with the partition and
/// optimal penalty recomputed per beta. Grids are sorted ascending internally.
inline MonotonicityReport msd_min_monotonicity_check(
    const TheoryCoeffs& base, double noise_power, std::span<const int> sparsity_grid,
    std::pair<double, double> g_pair, const SparseSystem& beta_sweep_system,
    std::span<const double> beta_grid) {
  MonotonicityReport rep;
  const double pinf2 = base.p_inf_sq();

  std::vector<int> k_grid(sparsity_grid.begin(), sparsity_grid.end());
  std::sort(k_grid.begin(), k_grid.end());
  std::vector<double> b_grid(beta_grid.begin(), beta_grid.end());
  std::sort(b_grid.begin(), b_grid.end());

  double prev = -1.0;
  for (int k : k_grid) {
    TheoryCoeffs c = base;
    c.sparsity = k;
    c.validate();
    const double d = min_msd(steady_betas(c, 0.0, noise_power), c.taps, noise_power,
                             pinf2, c.lambda);
    if (prev >= 0.0 && d < prev * (1.0 - 1e-15)) {
      rep.sparsity_nondecreasing = false;
      rep.violations.push_back("min MSD decreased at sparsity K=" + std::to_string(k));
    }
    prev = d;
  }

  const double d_lo = min_msd(steady_betas(base, std::min(g_pair.first, g_pair.second),
                                           noise_power),
                              base.taps, noise_power, pinf2, base.lambda);
  const double d_hi = min_msd(steady_betas(base, std::max(g_pair.first, g_pair.second),
                                           noise_power),
                              base.taps, noise_power, pinf2, base.lambda);
  if (d_hi < d_lo * (1.0 - 1e-15)) {
    rep.attraction_nondecreasing = false;
    rep.violations.push_back("min MSD decreased when G(s) grew");
  }

  prev = -1.0;
  for (double b : b_grid) {
    const SparseSystem sys = beta_sweep_system.with_beta(b);
    TheoryCoeffs c = base;
    c.beta = b;
    c.sparsity = sys.sparsity;
    c.validate();
    const double d = min_msd(steady_betas(c, sys.attraction().g_sq_sum, noise_power),
                             c.taps, noise_power, pinf2, c.lambda);
    if (prev >= 0.0 && d > prev * (1.0 + 1e-15)) {
      rep.beta_nonincreasing = false;
      rep.violations.push_back("min MSD increased at beta=" + std::to_string(b));
    }
    prev = d;
  }
  return rep;
}

}  // namespace l0rls
