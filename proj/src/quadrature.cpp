#include "ufem/quadrature.hpp"

#include <cassert>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace ufem {

namespace {

// Legendre P_n(t) and derivative on [-1, 1] by the three-term recurrence
void legendre(int n, double t, double& p, double& dp) {
  double p0 = 1.0, p1 = t;
  if (n == 0) {
    p = p0;
    dp = 0.0;
    return;
  }
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2.0 * k - 1.0) * t * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  p = p1;
  dp = n * (t * p1 - p0) / (t * t - 1.0);
}

}  // namespace

void gauss_legendre_01(int n, std::vector<double>& x, std::vector<double>& w) {
  assert(n >= 1);
  x.assign(static_cast<size_t>(n), 0.0);
  w.assign(static_cast<size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    // Chebyshev-like initial guess, then Newton on P_n
    double t = std::cos(M_PI * (k + 0.75) / (n + 0.5));
    double p, dp;
    for (int it = 0; it < 100; ++it) {
      legendre(n, t, p, dp);
      double dt = p / dp;
      t -= dt;
      if (std::fabs(dt) < 1e-15) break;
    }
    legendre(n, t, p, dp);
    t -= p / dp;  // one polishing step
    legendre(n, t, p, dp);
    // map [-1,1] -> [0,1]; roots come out descending in t, store ascending
    x[static_cast<size_t>(n - 1 - k)] = 0.5 * (t + 1.0);
    w[static_cast<size_t>(n - 1 - k)] = 1.0 / ((1.0 - t * t) * dp * dp);
  }
}

namespace {

// Collapsed-coordinate product rule on the reference triangle, symmetrized
// over the three cyclic relabelings of the barycentric coordinates. With n
// Gauss points per direction the base rule integrates total degree 2n - 2
// exactly (the collapse multiplies one direction's integrand by (1 - u)).
TriQuadRule build_tri_rule(int degree) {
  int n = (degree + 2 + 1) / 2;  // ceil((degree + 2) / 2)
  std::vector<double> gx, gw;
  gauss_legendre_01(n, gx, gw);

  TriQuadRule r;
  r.exact_degree = 2 * n - 2;
  for (int rot = 0; rot < 3; ++rot) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double u = gx[static_cast<size_t>(i)];
        double v = gx[static_cast<size_t>(j)];
        double x = u, y = v * (1.0 - u);
        std::array<double, 3> lam{1.0 - x - y, x, y};
        std::array<double, 3> p;
        for (int c = 0; c < 3; ++c) p[static_cast<size_t>(c)] = lam[static_cast<size_t>((c + rot) % 3)];
        // reference-area normalization: weights sum to 1 over all 3n^2 points
        double wt = 2.0 * gw[static_cast<size_t>(i)] * gw[static_cast<size_t>(j)] * (1.0 - u) / 3.0;
        r.points.push_back(p);
        r.weights.push_back(wt);
      }
    }
  }
  return r;
}

}  // namespace

const TriQuadRule& quadrature_rule(int degree) {
  if (degree < 1 || degree > 12) throw std::invalid_argument("quadrature degree must be in 1..12");
  static TriQuadRule cache[13];
  static std::once_flag once;
  std::call_once(once, [] {
    for (int d = 1; d <= 12; ++d) cache[d] = build_tri_rule(d);
  });
  return cache[degree];
}

const LineQuadRule& line_rule(int n) {
  if (n < 1 || n > 24) throw std::invalid_argument("line rule size must be in 1..24");
  static LineQuadRule cache[25];
  static std::once_flag once;
  std::call_once(once, [] {
    for (int k = 1; k <= 24; ++k) gauss_legendre_01(k, cache[k].points, cache[k].weights);
  });
  return cache[n];
}

}  // namespace ufem
