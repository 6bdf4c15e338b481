#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ufem/assembly.hpp"

namespace ufem {

// One benchmark: domain, coefficients, initial active cells, and (when the
// solution is known in closed form) exact-error machinery.
struct Problem {
  std::string name;
  MacroDomain domain;
  CoefficientField coeffs;
  std::vector<std::array<int64_t, 2>> initial_cells;  // all initially active

  bool has_exact = false;
  double kappa_sq = 0.0;      // the constant coefficient, when it is constant
  double total_energy = 0.0;  // squared H1_kappa(R^2) norm of u, when exact
  std::function<double(Vec2)> exact_u;
  std::function<Vec2(Vec2)> exact_grad;
};

// u = chi(|x|) K0(kappa |x|): the fundamental solution smoothly cut off near
// the origin; f is supported in the annulus 0.1 <= |x| <= 0.9. The initial
// active set is the 4 squares touching the origin, so h0 >= 1 is required
// for supp f to be contained in the initial active region.
Problem make_smoothed_fundamental(double kappa_sq, double h0);

// Infinite L-shape: kappa^2 = 10 above the interface x2 = x1 and 0.1 below,
// f = indicator of (0,1)^2, initial active set the 4 triangles of that
// square. Both coefficient and source are decided per element by exact
// predicates (the interface and the support square stay mesh-aligned).
// No closed-form solution. Requires h0 == 1.
Problem make_lshape(double h0 = 1.0);

// dispatch by name: "smoothed-fundamental" | "lshape-singular"
Problem make_problem(const std::string& name, double kappa_sq, double h0);

// Squared H1_kappa(R^2) norm of the smoothed fundamental solution:
// integral of 2 pi r (kappa^2 u(r)^2 + u'(r)^2), truncated where the
// integrand drops below 1e-30. Two independent rule families for
// cross-checking; both accurate to ~1e-12 relative.
double radial_energy_gauss(double kappa_sq);
double radial_energy_simpson(double kappa_sq);

struct ErrorBreakdown {
  double total = 0.0;  // sqrt(interior_sq + tail_sq)
  double interior_sq = 0.0;
  double tail_sq = 0.0;
};

// ||u - u_l||_{H1_kappa(R^2)} with u_l extended by zero outside the active
// mesh: the interior part is integrated element-wise (quadrature degree
// min(2p+6, 12) by default), the exterior tail is
// total_energy - sum_T ||u||^2_{H1_kappa(T)}. A tail below -1e-12 signals a
// quadrature inconsistency and is fatal; smaller negatives clamp to zero.
ErrorBreakdown h1kappa_error(const MeshForest& forest, const DofMap& dm,
                             const std::vector<double>& u, const Problem& prob,
                             int quad_degree = 0);

}  // namespace ufem
