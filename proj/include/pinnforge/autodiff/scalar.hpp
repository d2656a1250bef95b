#pragma once

#include <cmath>

namespace pinnforge::ad {

inline double sigmoid(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double relu(double x) { return x > 0.0 ? x : 0.0; }

/// relu'(x); 0 at the origin.
inline double relu_step(double x) { return x > 0.0 ? 1.0 : 0.0; }

}  // namespace pinnforge::ad
