#include <cmath>
#include <vector>

#include "doctest.h"
#include "ufem/quadrature.hpp"

using namespace ufem;

namespace {

// exact unit-measure integral of a barycentric monomial:
// (1/|T|) ∫_T λ0^a λ1^b λ2^c dx = a! b! c! 2! / (a+b+c+2)!
double monomial_exact(int a, int b, int c) {
  double v = 1.0;
  int k = 2;
  for (int i = 1; i <= a; ++i) v *= static_cast<double>(i) / ++k;
  for (int i = 1; i <= b; ++i) v *= static_cast<double>(i) / ++k;
  for (int i = 1; i <= c; ++i) v *= static_cast<double>(i) / ++k;
  return v;
}

double apply(const TriQuadRule& q, int a, int b, int c) {
  double s = 0.0;
  for (size_t i = 0; i < q.points.size(); ++i) {
    const auto& l = q.points[i];
    s += q.weights[i] * std::pow(l[0], a) * std::pow(l[1], b) * std::pow(l[2], c);
  }
  return s;
}

}  // namespace

TEST_CASE("triangle rules: structure") {
  for (int d = 1; d <= 12; ++d) {
    const TriQuadRule& q = quadrature_rule(d);
    CHECK(q.exact_degree >= d);
    REQUIRE(q.points.size() == q.weights.size());
    double wsum = 0.0;
    for (size_t i = 0; i < q.points.size(); ++i) {
      CHECK(q.weights[i] > 0.0);
      const auto& l = q.points[i];
      CHECK(l[0] > 0.0);
      CHECK(l[1] > 0.0);
      CHECK(l[2] > 0.0);
      CHECK(std::fabs(l[0] + l[1] + l[2] - 1.0) <= 1e-14);
      wsum += q.weights[i];
    }
    CHECK(std::fabs(wsum - 1.0) <= 1e-13);
  }
}

TEST_CASE("triangle rules: exact on barycentric monomials up to stated degree") {
  for (int d = 1; d <= 12; ++d) {
    const TriQuadRule& q = quadrature_rule(d);
    for (int total = 0; total <= q.exact_degree; ++total)
      for (int a = 0; a <= total; ++a)
        for (int b = 0; a + b <= total; ++b) {
          int c = total - a - b;
          double got = apply(q, a, b, c);
          double want = monomial_exact(a, b, c);
          CHECK(std::fabs(got - want) <= 1e-13 * std::max(1.0, std::fabs(want)));
        }
  }
}

TEST_CASE("line rules: Gauss accuracy on [0,1]") {
  for (int n = 1; n <= 24; ++n) {
    const LineQuadRule& q = line_rule(n);
    REQUIRE(q.points.size() == static_cast<size_t>(n));
    REQUIRE(q.weights.size() == static_cast<size_t>(n));
    double wsum = 0.0;
    for (int i = 0; i < n; ++i) {
      CHECK(q.points[i] > 0.0);
      CHECK(q.points[i] < 1.0);
      CHECK(q.weights[i] > 0.0);
      wsum += q.weights[i];
    }
    CHECK(std::fabs(wsum - 1.0) <= 1e-14);
    // ∫_0^1 t^k = 1/(k+1), exact through degree 2n-1
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], k);
      CHECK(std::fabs(s - 1.0 / (k + 1)) <= 1e-14);
    }
  }
}

TEST_CASE("line rules: degree 2n is not exact (sharpness)") {
  for (int n = 1; n <= 6; ++n) {
    const LineQuadRule& q = line_rule(n);
    int k = 2 * n;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += q.weights[i] * std::pow(q.points[i], k);
    CHECK(std::fabs(s - 1.0 / (k + 1)) > 1e-12);
  }
}

TEST_CASE("gauss_legendre_01 matches line_rule") {
  std::vector<double> x, w;
  gauss_legendre_01(7, x, w);
  const LineQuadRule& q = line_rule(7);
  REQUIRE(x.size() == 7);
  for (int i = 0; i < 7; ++i) {
    CHECK(x[i] == doctest::Approx(q.points[i]).epsilon(1e-15));
    CHECK(w[i] == doctest::Approx(q.weights[i]).epsilon(1e-15));
  }
}
