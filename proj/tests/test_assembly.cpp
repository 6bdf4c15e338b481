#include <cmath>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "ufem/assembly.hpp"
#include "ufem/solver.hpp"

using namespace ufem;
using namespace testutil;

namespace {

// independent quadratic-form evaluation: sum of per-element energies of the
// expanded nodal field, bypassing the CSR structure entirely
double energy_by_elements(const MeshForest& f, const DofMap& dm, const CoefficientField& coeffs,
                          const std::vector<double>& u, int quad_degree) {
  const RefBasis& rb = ref_basis(dm.p);
  const TriQuadRule& q = quadrature_rule(quad_degree);
  RefBasis::Eval ev;
  double total = 0.0;
  for (size_t r = 0; r < dm.elems.size(); ++r) {
    ElementId e = dm.elems[r];
    ElementGeometry g = element_geometry(f, e);
    double ksq = coeffs.kappa_sq(f, e);
    double acc = 0.0;
    for (size_t i = 0; i < q.points.size(); ++i) {
      rb.eval(q.points[i], ev);
      double val = 0.0;
      Vec2 grad{0.0, 0.0};
      for (int m = 0; m < rb.n_nodes(); ++m) {
        int32_t idx = dm.conn[r][static_cast<size_t>(m)];
        double um = idx >= 0 ? u[static_cast<size_t>(idx)] : 0.0;
        val += um * ev.val[m];
        for (int c = 0; c < 3; ++c) {
          grad.x += um * ev.dlam[m][c] * g.grad_lambda[static_cast<size_t>(c)].x;
          grad.y += um * ev.dlam[m][c] * g.grad_lambda[static_cast<size_t>(c)].y;
        }
      }
      acc += q.weights[i] * (ksq * val * val + grad.x * grad.x + grad.y * grad.y);
    }
    total += g.abs_area * acc;
  }
  return total;
}

}  // namespace

TEST_CASE("element system on a macro triangle: exact stiffness and mass") {
  MeshForest f = one_square();
  ElementId bottom = find_leaf(f, {{{0, 0}, {0.5, 0.5}, {1, 0}}});
  REQUIRE(bottom != kNoElement);
  // stored order [ (0,0), (0.5,0.5), (1,0) ]: an isoceles right triangle with
  // the right angle at the center vertex; legs length 1/sqrt(2), area 1/4.
  // Stiffness for p=1: K_cd = |T| grad(lam_c).grad(lam_d);
  // mass: M = |T|/12 [[2,1,1],[1,2,1],[1,1,2]].
  double ksq = 3.0;
  CoefficientField coeffs = const_coeffs(ksq, 0.0);
  double ke[9], fe[3];
  element_system(f, bottom, coeffs, 1, quadrature_rule(4), ke, fe);

  ElementGeometry g = element_geometry(f, bottom);
  double area = g.abs_area;
  CHECK(area == doctest::Approx(0.25).epsilon(1e-15));
  for (int c = 0; c < 3; ++c)
    for (int d = 0; d < 3; ++d) {
      double stiff = area * (g.grad_lambda[static_cast<size_t>(c)].x *
                                 g.grad_lambda[static_cast<size_t>(d)].x +
                             g.grad_lambda[static_cast<size_t>(c)].y *
                                 g.grad_lambda[static_cast<size_t>(d)].y);
      double mass = ksq * area / 12.0 * (c == d ? 2.0 : 1.0);
      CHECK(ke[3 * c + d] == doctest::Approx(stiff + mass).epsilon(1e-14));
    }
  for (int c = 0; c < 3; ++c) CHECK(fe[c] == 0.0);

  // the analytic stiffness of this shape: grad(lam) for vertices
  // (0,0),(0.5,0.5),(1,0) are (-1,-1), (0,2), (1,-1); K = area * Gram
  CHECK(area * 2.0 == doctest::Approx(ke[0] - ksq * area / 6.0).epsilon(1e-13));
  CHECK(area * 4.0 == doctest::Approx(ke[4] - ksq * area / 6.0).epsilon(1e-13));
  CHECK(area * (-2.0) == doctest::Approx(ke[1] - ksq * area / 12.0).epsilon(1e-13));
  CHECK(area * 0.0 == doctest::Approx(ke[2] - ksq * area / 12.0).epsilon(1e-13));
}

TEST_CASE("one active cell, p = 1: closed-form system") {
  MeshForest f = one_square();
  ActiveSet a = ActiveSet::compute(f);
  DofMap dm = build_dofmap(f, a, 1);
  REQUIRE(dm.n_dofs == 1);

  SparseSystem sys = assemble(f, dm, const_coeffs(1.0, 1.0));
  // hat function at the center: stiffness 4, mass 1/24, kappa^2 = 1, so
  // A = 4 + 4 * 1/24 = 25/6; b = 4 * |T|/3 * 1 = 1/3
  CHECK(sys.A.n == 1);
  CHECK(sys.A.entry(0, 0) == doctest::Approx(25.0 / 6.0).epsilon(1e-14));
  CHECK(sys.b[0] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
}

TEST_CASE("assembled matrix is exactly symmetric") {
  MeshForest f(plane());
  f.materialize_macro_cell(0, 0, true);
  f.materialize_macro_cell(1, 0, true);
  Rng rng(5);
  random_round(f, rng, 3);
  random_round(f, rng, 2);
  ActiveSet a = ActiveSet::compute(f);
  for (int p = 1; p <= 3; ++p) {
    DofMap dm = build_dofmap(f, a, p);
    SparseSystem sys = assemble(f, dm, const_coeffs(2.0, 1.0));
    for (int64_t i = 0; i < sys.A.n; ++i)
      for (int64_t k = sys.A.row_ptr[static_cast<size_t>(i)];
           k < sys.A.row_ptr[static_cast<size_t>(i) + 1]; ++k) {
        int64_t j = sys.A.col[static_cast<size_t>(k)];
        CHECK(sys.A.val[static_cast<size_t>(k)] == sys.A.entry(j, i));  // bitwise
      }
  }
}

TEST_CASE("energy identity: quadratic form equals per-element quadrature") {
  MeshForest f(plane());
  f.materialize_macro_cell(0, 0, true);
  Rng rng(23);
  random_round(f, rng, 2);
  random_round(f, rng, 2);
  ActiveSet a = ActiveSet::compute(f);
  for (int p = 1; p <= 3; ++p) {
    DofMap dm = build_dofmap(f, a, p);
    REQUIRE(dm.n_dofs > 3);
    CoefficientField coeffs = const_coeffs(0.7, 0.0);
    SparseSystem sys = assemble(f, dm, coeffs);
    for (int trial = 0; trial < 15; ++trial) {
      std::vector<double> v(static_cast<size_t>(dm.n_dofs));
      for (auto& x : v) x = rng.sym();
      double lhs = sys.A.quad_form(v);
      double rhs = energy_by_elements(f, dm, coeffs, v, 2 * p + 2);
      CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
  }
}

TEST_CASE("matrix is positive definite on the constrained space") {
  MeshForest f(plane());
  f.materialize_macro_cell(0, 0, true);
  Rng rng(31);
  random_round(f, rng, 3);
  ActiveSet a = ActiveSet::compute(f);
  DofMap dm = build_dofmap(f, a, 2);
  SparseSystem sys = assemble(f, dm, const_coeffs(1.0, 0.0));

  // inverse iteration drives x toward the lowest mode; with an SPD matrix
  // every CG solve converges and the Rayleigh quotient stays positive
  std::vector<double> x(static_cast<size_t>(sys.A.n));
  for (auto& v : x) v = rng.sym();
  SolverConfig sc;
  sc.rel_tol = 1e-12;
  for (int it = 0; it < 8; ++it) {
    double nrm = 0.0;
    for (double v : x) nrm += v * v;
    nrm = std::sqrt(nrm);
    for (auto& v : x) v /= nrm;
    SolveResult r = solve_spd(sys.A, x, sc);
    REQUIRE(r.converged);
    x = r.x;
  }
  double xx = 0.0;
  for (double v : x) xx += v * v;
  REQUIRE(xx > 0.0);
  double rq = sys.A.quad_form(x) / xx;
  // kappa^2 = 1 keeps even the lowest mode well away from zero
  CHECK(rq > 1e-6);
}

TEST_CASE("zero source yields zero load for any degree") {
  MeshForest f = one_square();
  ActiveSet a = ActiveSet::compute(f);
  for (int p = 1; p <= 4; ++p) {
    DofMap dm = build_dofmap(f, a, p);
    SparseSystem sys = assemble(f, dm, const_coeffs(5.0, 0.0));
    for (double v : sys.b) CHECK(v == 0.0);
  }
}

TEST_CASE("Galerkin orthogonality across nested spaces") {
  // solve on a coarse active set, refine, solve again; the coarse residual
  // of the fine solution restricted through P^T must vanish
  MeshForest f(plane());
  f.materialize_macro_cell(0, 0, true);
  ActiveSet a0 = ActiveSet::compute(f);
  DofMap coarse = build_dofmap(f, a0, 2);
  CoefficientField coeffs = const_coeffs(1.0, 1.0);
  SparseSystem cs = assemble(f, coarse, coeffs);
  SolverConfig sc;
  sc.rel_tol = 1e-12;
  SolveResult uc = solve_spd(cs.A, cs.b, sc);
  REQUIRE(uc.converged);

  Rng rng(77);
  random_round(f, rng, 3);
  ActiveSet a1 = ActiveSet::compute(f);
  DofMap fine = build_dofmap(f, a1, 2);
  SparseSystem fs = assemble(f, fine, coeffs);
  SolveResult uf = solve_spd(fs.A, fs.b, sc);
  REQUIRE(uf.converged);

  Prolongation P = build_prolongation(f, coarse, fine);
  // d = u_f - P u_c; orthogonality: P^T A_f d = P^T (b_f - A_f P u_c) ... both
  // equal because A_f u_f = b_f; check s = P^T (A_f u_f - A_f P u_c) against
  // the coarse residual b_c - A_c u_c = 0
  std::vector<double> Puc = P.apply(uc.x);
  std::vector<double> d(static_cast<size_t>(fine.n_dofs));
  for (size_t i = 0; i < d.size(); ++i) d[i] = uf.x[i] - Puc[i];
  std::vector<double> Ad(d.size());
  fs.A.mul(d, Ad);
  std::vector<double> s = P.apply_transpose(Ad);

  double dnorm = std::sqrt(fs.A.quad_form(d));
  REQUIRE(dnorm > 0.0);
  for (int64_t j = 0; j < coarse.n_dofs; ++j) {
    double scale = dnorm * std::sqrt(cs.A.diag(j));
    CHECK(std::fabs(s[static_cast<size_t>(j)]) <= 1e-8 * scale);
  }
}
