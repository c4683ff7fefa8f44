#pragma once

#include <algorithm>

namespace weyl {

// Quintic smoothstep: C² monotone transition from 0 at t<=0 to 1 at t>=1.
inline double smoothstep(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  return t * t * t * (t * (t * 6.0 - 15.0) + 10.0);
}

inline double smoothstep_derivative(double t) {
  if (t <= 0.0 || t >= 1.0) return 0.0;
  const double s = t * (1.0 - t);
  return 30.0 * s * s;
}

// Plateau function of one variable: 1 on [inner_lo, inner_hi], 0 outside
// [inner_lo - width, inner_hi + width], quintic ramps in between.
struct Plateau1D {
  double inner_lo = 0.0;
  double inner_hi = 0.0;
  double width = 1.0;

  double value(double x) const {
    if (x < inner_lo) return smoothstep(1.0 - (inner_lo - x) / width);
    if (x > inner_hi) return smoothstep(1.0 - (x - inner_hi) / width);
    return 1.0;
  }

  double derivative(double x) const {
    if (x < inner_lo) return smoothstep_derivative(1.0 - (inner_lo - x) / width) / width;
    if (x > inner_hi) return -smoothstep_derivative(1.0 - (x - inner_hi) / width) / width;
    return 0.0;
  }
};

}  // namespace weyl
