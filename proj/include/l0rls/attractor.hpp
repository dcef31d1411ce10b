#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>

namespace l0rls {

/// Zero-point attractor g(t).
///
/// g(t) = beta^2 t - beta sgn(t) inside the attraction range |t| <= 1/beta,
/// and 0 outside. sgn(0) = 0, so g(0) = 0 and g is odd; the value at the
/// range boundary is 0 from both branches.
inline double zero_attractor(double t, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("zero_attractor: beta must be positive and finite");
  }
  if (!std::isfinite(t)) {
    throw std::invalid_argument("zero_attractor: non-finite input (corrupted state?)");
  }
  if (std::abs(t) > 1.0 / beta) return 0.0;
  const double sgn = (t > 0.0) ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
  return beta * beta * t - beta * sgn;
}

/// Elementwise attractor over a weight vector.
inline Eigen::VectorXd zero_attractor(const Eigen::VectorXd& w, double beta) {
  Eigen::VectorXd out(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) out[i] = zero_attractor(w[i], beta);
  return out;
}

}  // namespace l0rls
