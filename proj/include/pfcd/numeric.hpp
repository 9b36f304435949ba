#pragma once

#include <cmath>

namespace pfcd::num {

// Floor applied to the pair affinity x = m_u^T B m_v inside edge terms.
// Keeps log(1 - exp(-x)) and the edge ratio finite when a present edge has
// zero modeled affinity. Non-edge terms use the raw affinity.
inline constexpr double kAffinityFloor = 1e-10;

// log(1 - exp(-x)) for x > 0, stable at both ends.
inline double log1mexp(double x) {
  constexpr double kLn2 = 0.6931471805599453;
  return x > kLn2 ? std::log1p(-std::exp(-x)) : std::log(-std::expm1(-x));
}

// exp(-x) / (1 - exp(-x)) = 1 / expm1(x); the weight attached to an
// observed edge in the structural gradients.
inline double edge_ratio(double x) { return 1.0 / std::expm1(x); }

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// log(sigmoid(x)) without overflow for large |x|.
inline double log_sigmoid(double x) {
  return x >= 0.0 ? -std::log1p(std::exp(-x)) : x - std::log1p(std::exp(x));
}

}  // namespace pfcd::num
