#pragma once

#include <cassert>

namespace ufem {

// Radial C^3 transition: 0 for r <= 0.1, 1 for r >= 0.9, and in between the
// unique degree-7 polynomial with vanishing first three derivatives at both
// ends — the order-3 smoothstep in t = (r - 0.1)/0.8.
struct Cutoff {
  double chi = 0.0;
  double dchi = 0.0;
  double d2chi = 0.0;
};

inline Cutoff cutoff_chi(double r) {
  assert(r >= 0.0);
  if (r <= 0.1) return {0.0, 0.0, 0.0};
  if (r >= 0.9) return {1.0, 0.0, 0.0};
  const double s = 1.0 / 0.8;
  double t = (r - 0.1) * s;
  double u = 1.0 - t;
  Cutoff c;
  c.chi = t * t * t * t * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t * t * t);
  c.dchi = 140.0 * t * t * t * u * u * u * s;               // 140 t^3 (1-t)^3
  c.d2chi = 420.0 * t * t * u * u * (1.0 - 2.0 * t) * s * s;
  return c;
}

// third derivative, for smoothness verification
inline double cutoff_chi3(double r) {
  assert(r >= 0.0);
  if (r <= 0.1 || r >= 0.9) return 0.0;
  const double s = 1.0 / 0.8;
  double t = (r - 0.1) * s;
  return 840.0 * t * (1.0 - t) * (1.0 - 5.0 * t + 5.0 * t * t) * s * s * s;
}

}  // namespace ufem
