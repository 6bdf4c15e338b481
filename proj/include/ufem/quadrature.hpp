#pragma once

#include <array>
#include <vector>

namespace ufem {

// Symmetric triangle rule in barycentric coordinates; weights sum to 1, so
// ∫_T g dx ≈ |T| · Σ_i w_i g(λ_i). All points are strictly interior and all
// weights positive.
struct TriQuadRule {
  int exact_degree = 0;
  std::vector<std::array<double, 3>> points;
  std::vector<double> weights;
};

// Rule with exact_degree >= degree; 1 <= degree <= 12. Cached; the reference
// never invalidates.
const TriQuadRule& quadrature_rule(int degree);

// Gauss–Legendre rule on [0, 1]; weights sum to 1.
struct LineQuadRule {
  std::vector<double> points;
  std::vector<double> weights;
};

// n-point rule, exact for polynomial degree 2n − 1; 1 <= n <= 24. Cached.
const LineQuadRule& line_rule(int n);

// nodes/weights of the n-point Gauss–Legendre rule on [0,1], computed by
// Newton iteration on the Legendre recurrence (no coefficient tables)
void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w);

}  // namespace ufem
