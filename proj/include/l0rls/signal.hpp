#pragma once

#include <Eigen/Core>
#include <cmath>
#include <random>
#include <stdexcept>

namespace l0rls {

/// How successive input vectors relate.
///
/// TappedDelay is the physical model: x_n = [x(n), x(n-1), ..., x(n-N+1)]
/// built from one scalar white Gaussian stream; consecutive vectors share
/// N-1 shifted entries. Independent draws every x_n fresh, matching the
/// independence idealization used by the analysis.
enum class InputMode { TappedDelay, Independent };

/// Generator of input vectors with per-sample variance input_power.
///
/// In tapped-delay mode the delay line is prefilled with N-1 history samples
/// (drawn oldest first) so the first emitted vector is already stationary.
class InputStream {
 public:
  InputStream(double input_power, InputMode mode, int taps, std::mt19937_64 rng)
      : mode_(mode), rng_(std::move(rng)), gauss_(0.0, std::sqrt(input_power)),
        x_(Eigen::VectorXd::Zero(taps)) {
    if (!(input_power > 0.0))
      throw std::invalid_argument("InputStream: input_power must be > 0");
    if (taps < 1) throw std::invalid_argument("InputStream: taps must be >= 1");
    if (mode_ == InputMode::TappedDelay) {
      for (int i = taps - 1; i >= 1; --i) x_[i] = gauss_(rng_);
    }
  }

  const Eigen::VectorXd& next() {
    const auto n = x_.size();
    if (mode_ == InputMode::TappedDelay) {
      for (Eigen::Index i = n - 1; i >= 1; --i) x_[i] = x_[i - 1];
      x_[0] = gauss_(rng_);
    } else {
      for (Eigen::Index i = 0; i < n; ++i) x_[i] = gauss_(rng_);
    }
    return x_;
  }

 private:
  InputMode mode_;
  std::mt19937_64 rng_;
  std::normal_distribution<double> gauss_;
  Eigen::VectorXd x_;
};

}  // namespace l0rls
