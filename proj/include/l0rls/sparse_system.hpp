#pragma once

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "l0rls/attractor.hpp"
#include "l0rls/rng.hpp"

namespace l0rls {

/// Index partition of a parameter vector by tap magnitude (zero-based):
/// zero taps, large taps (|s_k| > 1/beta), and small taps (0 < |s_k| <= 1/beta).
struct IndexPartition {
  std::vector<int> zero;   // C_0
  std::vector<int> large;  // C_L
  std::vector<int> small;  // C_S
};

inline IndexPartition partition_system(const Eigen::VectorXd& s, double beta) {
  if (!(beta > 0.0)) throw std::invalid_argument("partition_system: beta must be > 0");
  IndexPartition p;
  const double range = 1.0 / beta;
  for (int k = 0; k < static_cast<int>(s.size()); ++k) {
    const double a = std::abs(s[k]);
    if (a == 0.0) {
      p.zero.push_back(k);
    } else if (a > range) {
      p.large.push_back(k);
    } else {
      p.small.push_back(k);  // boundary |s_k| = 1/beta belongs to the small set
    }
  }
  return p;
}

/// Aggregate attractor statistics of the small taps:
///   g_sq_sum  = sum_{k in C_S} g(s_k)^2          (G)
///   s_g_sum   = sum_{k in C_S} s_k g(s_k)        (G'), always <= 0
struct SmallSetAttraction {
  double g_sq_sum = 0.0;
  double s_g_sum = 0.0;
};

inline SmallSetAttraction small_set_attraction(const Eigen::VectorXd& s, double beta) {
  SmallSetAttraction out;
  for (int k : partition_system(s, beta).small) {
    const double g = zero_attractor(s[k], beta);
    out.g_sq_sum += g * g;
    out.s_g_sum += s[k] * g;
  }
  return out;
}

/// A sparse unknown system: parameter vector, sparsity count, and the index
/// partition computed against a given attraction parameter beta.
struct SparseSystem {
  Eigen::VectorXd coeffs;  // s
  int sparsity = 0;        // K, number of nonzero taps
  double beta = 5.0;       // partition threshold parameter
  std::uint64_t seed = 0;  // draw seed, 0 when hand-constructed
  IndexPartition sets;

  int taps() const { return static_cast<int>(coeffs.size()); }
  double norm_sq() const { return coeffs.squaredNorm(); }

  SmallSetAttraction attraction() const { return small_set_attraction(coeffs, beta); }

  /// Re-partition against a different beta (the tap values are unchanged).
  SparseSystem with_beta(double new_beta) const {
    SparseSystem out = *this;
    out.beta = new_beta;
    out.sets = partition_system(coeffs, new_beta);
    return out;
  }

  static SparseSystem from_vector(Eigen::VectorXd s, double beta,
                                  std::uint64_t seed = 0) {
    SparseSystem sys;
    sys.sparsity = static_cast<int>((s.array() != 0.0).count());
    sys.coeffs = std::move(s);
    sys.beta = beta;
    sys.seed = seed;
    sys.sets = partition_system(sys.coeffs, beta);
    return sys;
  }

  /// Draw a system with a uniformly random size-K support and i.i.d. standard
  /// normal nonzero entries.
  static SparseSystem generate(int taps, int sparsity, double beta,
                               std::uint64_t seed) {
    if (taps < 1) throw std::invalid_argument("SparseSystem: taps must be >= 1");
    if (sparsity < 0 || sparsity > taps)
      throw std::invalid_argument("SparseSystem: sparsity must lie in [0, taps]");
    auto rng = make_rng(seed, StreamKind::System);
    std::vector<int> idx(taps);
    std::iota(idx.begin(), idx.end(), 0);
    // partial Fisher-Yates: first `sparsity` entries form the support
    for (int i = 0; i < sparsity; ++i) {
      std::uniform_int_distribution<int> pick(i, taps - 1);
      std::swap(idx[i], idx[pick(rng)]);
    }
    std::normal_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(taps);
    for (int i = 0; i < sparsity; ++i) {
      double v = unit(rng);
      while (v == 0.0) v = unit(rng);  // keep the support size exact
      s[idx[i]] = v;
    }
    SparseSystem sys = from_vector(std::move(s), beta, seed);
    sys.sparsity = sparsity;
    return sys;
  }

  /// Flat record {n, k, beta, seed, s: [...]} for experiment reproducibility.
  nlohmann::json to_json() const {
    nlohmann::json j;
    j["n"] = taps();
    j["k"] = sparsity;
    j["beta"] = beta;
    j["seed"] = seed;
    j["s"] = std::vector<double>(coeffs.data(), coeffs.data() + coeffs.size());
    return j;
  }

  static SparseSystem from_json(const nlohmann::json& j) {
    const auto vals = j.at("s").get<std::vector<double>>();
    if (static_cast<int>(vals.size()) != j.at("n").get<int>())
      throw std::invalid_argument("SparseSystem: JSON length mismatch");
    Eigen::VectorXd s = Eigen::Map<const Eigen::VectorXd>(vals.data(), vals.size());
    SparseSystem sys = from_vector(std::move(s), j.at("beta").get<double>(),
                                   j.value("seed", std::uint64_t{0}));
    sys.sparsity = j.at("k").get<int>();
    return sys;
  }
};

/// Input/noise power bookkeeping. snr_db is a derived label; the canonical
/// quantities are the two powers.
struct SignalModel {
  double input_power = 1.0;   // P_x
  double noise_power = 0.0;   // P_nu
  double snr_db = std::numeric_limits<double>::infinity();
  std::uint64_t seed = 0;

  void validate() const {
    if (!(input_power > 0.0))
      throw std::invalid_argument("SignalModel: input_power must be > 0");
    if (!(noise_power >= 0.0))
      throw std::invalid_argument("SignalModel: noise_power must be >= 0");
  }
};

/// Noise power from an output-referred SNR: the ratio of noiseless output
/// power E[(s^T x)^2] = P_x ||s||^2 (white input) to P_nu, in dB.
inline double noise_power_from_snr(double input_power, const Eigen::VectorXd& s,
                                   double snr_db) {
  if (std::isinf(snr_db) && snr_db > 0.0) return 0.0;
  const double ss = s.squaredNorm();
  if (!(ss > 0.0))
    throw std::invalid_argument("noise_power_from_snr: zero system has no finite SNR");
  return input_power * ss * std::pow(10.0, -snr_db / 10.0);
}

inline SignalModel make_signal_model(double input_power, const SparseSystem& sys,
                                     double snr_db, std::uint64_t seed) {
  SignalModel m;
  m.input_power = input_power;
  m.noise_power = noise_power_from_snr(input_power, sys.coeffs, snr_db);
  m.snr_db = snr_db;
  m.seed = seed;
  m.validate();
  return m;
}

}  // namespace l0rls
