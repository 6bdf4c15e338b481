#include "ufem/assembly.hpp"

#include <algorithm>
#include <cassert>
#include <stdexcept>

namespace ufem {

void CsrMatrix::mul(const std::vector<double>& x, std::vector<double>& y) const {
  assert(static_cast<int64_t>(x.size()) == n);
  y.assign(static_cast<size_t>(n), 0.0);
  for (int64_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (int64_t k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k)
      s += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
    y[static_cast<size_t>(i)] = s;
  }
}

double CsrMatrix::quad_form(const std::vector<double>& x) const {
  double s = 0.0;
  for (int64_t i = 0; i < n; ++i) {
    double row = 0.0;
    for (int64_t k = row_ptr[static_cast<size_t>(i)]; k < row_ptr[static_cast<size_t>(i) + 1]; ++k)
      row += val[static_cast<size_t>(k)] * x[static_cast<size_t>(col[static_cast<size_t>(k)])];
    s += x[static_cast<size_t>(i)] * row;
  }
  return s;
}

double CsrMatrix::entry(int64_t i, int64_t j) const {
  const int32_t* first = col.data() + row_ptr[static_cast<size_t>(i)];
  const int32_t* last = col.data() + row_ptr[static_cast<size_t>(i) + 1];
  const int32_t* it = std::lower_bound(first, last, static_cast<int32_t>(j));
  if (it == last || *it != j) return 0.0;
  return val[static_cast<size_t>(row_ptr[static_cast<size_t>(i)] + (it - first))];
}

namespace {

// virtual bisection piece of an element: tagged vertex order, vertex
// barycentrics w.r.t. the element, exact dyadic area, absolute level
struct LoadPiece {
  std::array<Vec2, 3> x;
  std::array<std::array<double, 3>, 3> lam;
  double area = 0.0;
  int level = 0;
};

void accumulate_load(const MeshForest& forest, ElementId e, const CoefficientField& coeffs,
                     const RefBasis& basis, const TriQuadRule& rule, const LoadPiece& pc,
                     int guard, double* fe) {
  if (guard > 0 && coeffs.load_subdivide(pc.x, pc.area, pc.level)) {
    // same split as MeshForest::bisect: midpoint of conv{z0, z2},
    // children [z0, m, z1] and [z2, m, z1]
    Vec2 m = 0.5 * (pc.x[0] + pc.x[2]);
    std::array<double, 3> lm;
    for (int k = 0; k < 3; ++k) lm[k] = 0.5 * (pc.lam[0][k] + pc.lam[2][k]);
    accumulate_load(forest, e, coeffs, basis, rule,
                    LoadPiece{{pc.x[0], m, pc.x[1]},
                              {pc.lam[0], lm, pc.lam[1]},
                              pc.area * 0.5,
                              pc.level + 1},
                    guard - 1, fe);
    accumulate_load(forest, e, coeffs, basis, rule,
                    LoadPiece{{pc.x[2], m, pc.x[1]},
                              {pc.lam[2], lm, pc.lam[1]},
                              pc.area * 0.5,
                              pc.level + 1},
                    guard - 1, fe);
    return;
  }
  RefBasis::Eval ev;
  const int ne = basis.n_nodes();
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const auto& lp = rule.points[q];
    double w = rule.weights[q] * pc.area;
    std::array<double, 3> le;
    for (int k = 0; k < 3; ++k)
      le[k] = lp[0] * pc.lam[0][k] + lp[1] * pc.lam[1][k] + lp[2] * pc.lam[2][k];
    basis.eval(le, ev);
    Vec2 x = lp[0] * pc.x[0] + lp[1] * pc.x[1] + lp[2] * pc.x[2];
    double fv = coeffs.f(forest, e, x);
    for (int m = 0; m < ne; ++m) fe[m] += w * fv * ev.val[static_cast<size_t>(m)];
  }
}

}  // namespace

void element_system(const MeshForest& forest, ElementId e, const CoefficientField& coeffs,
                    int p, const TriQuadRule& rule, double* ke, double* fe) {
  assert(rule.exact_degree >= 2 * p + 2);
  const RefBasis& basis = ref_basis(p);
  const int ne = basis.n_nodes();
  ElementGeometry g = element_geometry(forest, e);
  double ksq = coeffs.kappa_sq(forest, e);
  const bool composite_load = static_cast<bool>(coeffs.load_subdivide);

  for (int i = 0; i < ne * ne; ++i) ke[i] = 0.0;
  for (int i = 0; i < ne; ++i) fe[i] = 0.0;

  RefBasis::Eval ev;
  Vec2 gphi[kMaxNodesPerElem];
  for (size_t q = 0; q < rule.points.size(); ++q) {
    const auto& lam = rule.points[q];
    double w = rule.weights[q] * g.abs_area;
    basis.eval(lam, ev);
    Vec2 x = lam[0] * g.x[0] + lam[1] * g.x[1] + lam[2] * g.x[2];
    for (int m = 0; m < ne; ++m) {
      const auto& d = ev.dlam[static_cast<size_t>(m)];
      gphi[m] = d[0] * g.grad_lambda[0] + d[1] * g.grad_lambda[1] + d[2] * g.grad_lambda[2];
    }
    double fv = composite_load ? 0.0 : coeffs.f(forest, e, x);
    for (int m = 0; m < ne; ++m) {
      double vm = ev.val[static_cast<size_t>(m)];
      if (!composite_load) fe[m] += w * fv * vm;
      for (int nn = m; nn < ne; ++nn) {
        double add = w * (ksq * vm * ev.val[static_cast<size_t>(nn)] + dot(gphi[m], gphi[nn]));
        ke[m * ne + nn] += add;
      }
    }
  }
  if (composite_load) {
    LoadPiece root{g.x,
                   {{{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}},
                   g.abs_area,
                   forest.elem(e).level};
    accumulate_load(forest, e, coeffs, basis, rule, root, 40, fe);
  }
  // mirror the upper triangle: exact symmetry by construction
  for (int m = 0; m < ne; ++m)
    for (int nn = 0; nn < m; ++nn) ke[m * ne + nn] = ke[nn * ne + m];
}

SparseSystem assemble(const MeshForest& forest, const DofMap& dm, const CoefficientField& coeffs,
                      int quad_degree) {
  if (quad_degree == 0) quad_degree = std::max(2 * dm.p + 2, 8);
  const TriQuadRule& rule = quadrature_rule(quad_degree);
  const int ne = dm.n_en;

  SparseSystem sys;
  sys.A.n = dm.n_dofs;
  sys.b.assign(static_cast<size_t>(dm.n_dofs), 0.0);

  // sparsity pattern: per-row sorted unique column lists
  std::vector<std::vector<int32_t>> cols(static_cast<size_t>(dm.n_dofs));
  for (const auto& row : dm.conn) {
    for (int m = 0; m < ne; ++m) {
      int32_t gm = row[static_cast<size_t>(m)];
      if (gm < 0) continue;
      for (int nn = 0; nn < ne; ++nn) {
        int32_t gn = row[static_cast<size_t>(nn)];
        if (gn >= 0) cols[static_cast<size_t>(gm)].push_back(gn);
      }
    }
  }
  sys.A.row_ptr.assign(static_cast<size_t>(dm.n_dofs) + 1, 0);
  for (int64_t i = 0; i < dm.n_dofs; ++i) {
    auto& c = cols[static_cast<size_t>(i)];
    std::sort(c.begin(), c.end());
    c.erase(std::unique(c.begin(), c.end()), c.end());
    sys.A.row_ptr[static_cast<size_t>(i) + 1] = sys.A.row_ptr[static_cast<size_t>(i)] +
                                                static_cast<int64_t>(c.size());
  }
  sys.A.col.reserve(static_cast<size_t>(sys.A.row_ptr.back()));
  for (const auto& c : cols) sys.A.col.insert(sys.A.col.end(), c.begin(), c.end());
  sys.A.val.assign(sys.A.col.size(), 0.0);

  auto slot = [&](int32_t i, int32_t j) -> double& {
    const int32_t* first = sys.A.col.data() + sys.A.row_ptr[static_cast<size_t>(i)];
    const int32_t* last = sys.A.col.data() + sys.A.row_ptr[static_cast<size_t>(i) + 1];
    const int32_t* it = std::lower_bound(first, last, j);
    assert(it != last && *it == j);
    return sys.A.val[static_cast<size_t>(sys.A.row_ptr[static_cast<size_t>(i)] +
                                         (it - first))];
  };

  double ke[kMaxNodesPerElem * kMaxNodesPerElem];
  double fe[kMaxNodesPerElem];
  for (size_t r = 0; r < dm.elems.size(); ++r) {
    element_system(forest, dm.elems[r], coeffs, dm.p, rule, ke, fe);
    const auto& row = dm.conn[r];
    for (int m = 0; m < ne; ++m) {
      int32_t gm = row[static_cast<size_t>(m)];
      if (gm < 0) continue;
      sys.b[static_cast<size_t>(gm)] += fe[m];
      for (int nn = 0; nn < ne; ++nn) {
        int32_t gn = row[static_cast<size_t>(nn)];
        if (gn >= 0) slot(gm, gn) += ke[m * ne + nn];
      }
    }
  }
  return sys;
}

}  // namespace ufem
