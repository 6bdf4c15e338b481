#include "ufem/solver.hpp"

#include <cassert>
#include <cmath>

namespace ufem {

namespace {

double dotv(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

SolveResult solve_spd(const CsrMatrix& A, const std::vector<double>& b, const SolverConfig& cfg) {
  const int64_t n = A.n;
  assert(static_cast<int64_t>(b.size()) == n);
  SolveResult res;
  res.x.assign(static_cast<size_t>(n), 0.0);
  double bnorm = std::sqrt(dotv(b, b));
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  int64_t max_iter = cfg.max_iter > 0 ? cfg.max_iter : 10 * n;

  std::vector<double> dinv(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) {
    double d = A.diag(i);
    assert(d > 0.0 && "system matrix has a nonpositive diagonal entry");
    dinv[static_cast<size_t>(i)] = 1.0 / d;
  }

  std::vector<double> r(b), z(static_cast<size_t>(n)), p(static_cast<size_t>(n)),
      ap(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i) z[static_cast<size_t>(i)] = dinv[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
  p = z;
  double rz = dotv(r, z);
  double best_res = 1.0;
  std::vector<double> best_x = res.x;

  for (int64_t it = 0; it < max_iter; ++it) {
    A.mul(p, ap);
    double pap = dotv(p, ap);
    if (pap <= 0.0) break;  // loss of positive definiteness: bail with best iterate
    double alpha = rz / pap;
    for (size_t i = 0; i < res.x.size(); ++i) {
      res.x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    res.iterations = it + 1;
    double rel = std::sqrt(dotv(r, r)) / bnorm;
    if (rel < best_res) {
      best_res = rel;
      best_x = res.x;
    }
    if (rel <= cfg.rel_tol) {
      res.converged = true;
      res.rel_residual = rel;
      return res;
    }
    for (int64_t i = 0; i < n; ++i) z[static_cast<size_t>(i)] = dinv[static_cast<size_t>(i)] * r[static_cast<size_t>(i)];
    double rz_new = dotv(r, z);
    double beta = rz_new / rz;
    rz = rz_new;
    for (size_t i = 0; i < p.size(); ++i) p[i] = z[i] + beta * p[i];
  }
  res.x = best_x;
  res.rel_residual = best_res;
  res.converged = false;
  return res;
}

}  // namespace ufem
