#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "l0rls/theory.hpp"

namespace l0rls {

/// Per-iteration deviation-power records: total MSD D_n, zero-tap power
/// Omega_n, and the per-tap RMS omega_n = sqrt(Omega_n / (N-K)).
struct MsdTrajectory {
  enum class Source { Model, Simulation };
  Source source = Source::Model;
  std::vector<long> n;
  std::vector<double> msd;             // D_n
  std::vector<double> zero_tap_power;  // Omega_n
  std::vector<double> zero_tap_rms;    // omega_n

  std::size_t size() const { return n.size(); }
};

/// Linear dynamical model of the instantaneous MSD:
///
///   [D; Omega]_n = A_n [D; Omega]_{n-1} + b_n
///
/// with A_n upper triangular in (eta_n^2, eta_n^2 - 2 beta rho_n eta_n /
/// sqrt(2 pi omega_inf^2)) and the forcing terms built from p_n^2, G(s) and
/// G'(s). The model linearizes around the steady state, so omega_inf enters
/// the transient as well.
///
/// The model is a large-n approximation: its early coefficients (rho_n grows
/// like 1/(1 - lambda^{n+1}) toward n = 0) can make the Omega row transiently
/// expansive, producing huge early excursions that later decay geometrically.
/// The fixed point is unaffected; use fixed_point() or start the run past the
/// transient when only the limit matters.
class MsdModel {
 public:
  struct State {
    double msd = 0.0;             // D
    double zero_tap_power = 0.0;  // Omega
  };

  MsdModel(const TheoryCoeffs& coeffs, double g_small_sum, double sg_small_sum,
           double noise_power)
      : c_(coeffs), g_(g_small_sum), gp_(sg_small_sum), pnu_(noise_power) {
    c_.validate();
    if (!(noise_power >= 0.0))
      throw std::invalid_argument("MsdModel: noise power must be >= 0");
    if (!(g_small_sum >= 0.0) || !(sg_small_sum <= 0.0))
      throw std::invalid_argument("MsdModel: need G >= 0 and G' <= 0");
    omega_inf_ = (c_.taps == c_.sparsity)
                     ? 0.0
                     : omega_infinity(c_.theta(), c_.lambda, pnu_, c_.p_inf_sq());
  }

  double omega_inf() const { return omega_inf_; }

  State step(const State& prev, long n) const {
    if (n < 1) throw std::invalid_argument("MsdModel::step: n must be >= 1");
    using detail::ld;
    const ld eta = c_.eta(n), rho = c_.rho(n);
    const ld cn = c_.c(n), dn = c_.d(n);
    const ld pn2 = c_.p_n_sq(n);
    const ld N = c_.taps, K = c_.sparsity;
    const ld beta = c_.beta;
    // forcing shared by the D - Omega difference recursion
    const ld diff_forcing = K * static_cast<ld>(pnu_) * pn2 -
                            2.0L * rho * cn * eta * static_cast<ld>(gp_) +
                            (2.0L * rho * dn * eta + rho * rho) * static_cast<ld>(g_);
    if (c_.taps == c_.sparsity) {
      // no zero taps: the Omega machinery is vacuous
      State out;
      out.msd = static_cast<double>(eta * eta * prev.msd + diff_forcing);
      out.zero_tap_power = 0.0;
      return out;
    }
    const ld om = omega_inf_;
    const ld cross = (rho == 0.0L) ? 0.0L
                                   : 2.0L * beta * rho * eta / (detail::kSqrt2PiL * om);
    const ld edge = 2.0L * (N - K) * beta * rho * eta * om / detail::kSqrt2PiL;
    const ld b1 = N * static_cast<ld>(pnu_) * pn2 + (N - K) * beta * beta * rho * rho -
                  edge - 2.0L * rho * cn * eta * static_cast<ld>(gp_) +
                  (2.0L * rho * dn * eta + rho * rho) * static_cast<ld>(g_);
    const ld b2 = (N - K) * (static_cast<ld>(pnu_) * pn2 + beta * beta * rho * rho) - edge;
    State out;
    out.msd = static_cast<double>(eta * eta * prev.msd - cross * prev.zero_tap_power + b1);
    out.zero_tap_power =
        static_cast<double>((eta * eta - cross) * prev.zero_tap_power + b2);
    return out;
  }

  /// Iterates the model for n = start_n .. start_n + n_steps - 1.
  MsdTrajectory run(long n_steps, State initial, long start_n = 1) const {
    MsdTrajectory traj;
    traj.source = MsdTrajectory::Source::Model;
    traj.n.reserve(n_steps);
    traj.msd.reserve(n_steps);
    traj.zero_tap_power.reserve(n_steps);
    traj.zero_tap_rms.reserve(n_steps);
    State s = initial;
    const int nk = c_.taps - c_.sparsity;
    for (long i = 0; i < n_steps; ++i) {
      const long n = start_n + i;
      s = step(s, n);
      traj.n.push_back(n);
      traj.msd.push_back(s.msd);
      traj.zero_tap_power.push_back(s.zero_tap_power);
      traj.zero_tap_rms.push_back(
          nk > 0 ? std::sqrt(std::max(0.0, s.zero_tap_power) / nk) : 0.0);
    }
    return traj;
  }

  /// Algebraic fixed point of the limit map (n -> infinity coefficients).
  State fixed_point() const {
    using detail::ld;
    const ld l = c_.lambda;
    const ld rho_inf = static_cast<ld>(c_.kappa) / c_.input_power * (1.0L - l);
    const ld d_inf = static_cast<ld>(c_.kappa) / c_.input_power;
    const ld pinf2 = c_.p_inf_sq();
    const ld N = c_.taps, K = c_.sparsity;
    const ld beta = c_.beta;
    const ld one_m_l2 = 1.0L - l * l;
    // c_inf = 0, so G' drops out of the limit forcing
    const ld diff_forcing = K * static_cast<ld>(pnu_) * pinf2 +
                            (2.0L * rho_inf * d_inf * l + rho_inf * rho_inf) *
                                static_cast<ld>(g_);
    State out;
    if (c_.taps == c_.sparsity) {
      out.msd = static_cast<double>(diff_forcing / one_m_l2);
      out.zero_tap_power = 0.0;
      return out;
    }
    const ld om = omega_inf_;
    const ld cross = (rho_inf == 0.0L)
                         ? 0.0L
                         : 2.0L * beta * rho_inf * l / (detail::kSqrt2PiL * om);
    const ld edge = 2.0L * (N - K) * beta * rho_inf * l * om / detail::kSqrt2PiL;
    const ld b1 = N * static_cast<ld>(pnu_) * pinf2 +
                  (N - K) * beta * beta * rho_inf * rho_inf - edge +
                  (2.0L * rho_inf * d_inf * l + rho_inf * rho_inf) * static_cast<ld>(g_);
    const ld b2 = (N - K) * (static_cast<ld>(pnu_) * pinf2 +
                             beta * beta * rho_inf * rho_inf) -
                  edge;
    const ld omega_fp = b2 / (one_m_l2 + cross);
    out.zero_tap_power = static_cast<double>(omega_fp);
    out.msd = static_cast<double>((b1 - cross * omega_fp) / one_m_l2);
    return out;
  }

 private:
  TheoryCoeffs c_;
  double g_ = 0.0;   // G(s)
  double gp_ = 0.0;  // G'(s)
  double pnu_ = 0.0;
  double omega_inf_ = 0.0;
};

}  // namespace l0rls
