#pragma once

#include <functional>
#include <vector>

#include "ufem/fem.hpp"
#include "ufem/quadrature.hpp"

namespace ufem {

// Problem coefficients. kappa_sq is evaluated per element (it is piecewise
// constant along mesh-aligned interfaces in every supported problem); the
// source f is pointwise with an element hint for exact support decisions.
//
// load_subdivide (optional): composite load quadrature. When set, ∫_T f φ is
// accumulated over virtual bisection descendants of T, splitting every piece
// for which the predicate returns true (vertices in tagged order, piece area,
// absolute forest level). Because the predicate sees only the piece's own
// geometry, a parent's piece set is exactly the union of its children's piece
// sets, so coarse and refined load vectors agree identically (P^T b_h = b_H
// up to roundoff) and Galerkin orthogonality across refinement survives
// non-polynomial sources with localized roughness.
struct CoefficientField {
  std::function<double(const MeshForest&, ElementId)> kappa_sq;
  std::function<double(const MeshForest&, ElementId, Vec2)> f;
  std::function<bool(const std::array<Vec2, 3>&, double, int)> load_subdivide;
};

struct CsrMatrix {
  int64_t n = 0;
  std::vector<int64_t> row_ptr;
  std::vector<int32_t> col;
  std::vector<double> val;

  void mul(const std::vector<double>& x, std::vector<double>& y) const;
  double quad_form(const std::vector<double>& x) const;  // x^T A x
  double entry(int64_t i, int64_t j) const;
  double diag(int64_t i) const { return entry(i, i); }
};

struct SparseSystem {
  CsrMatrix A;
  std::vector<double> b;
};

// local matrix (n_en x n_en, row-major) and load for one element:
// a(u,v) = ∫_T κ² u v + ∇u·∇v, l(v) = ∫_T f v
void element_system(const MeshForest& forest, ElementId e, const CoefficientField& coeffs,
                    int p, const TriQuadRule& rule, double* ke, double* fe);

// Galerkin system over the active elements of the dof map. Matrix quadrature
// must be exact to degree 2p+2 at least; the default rule degree is
// max(2p+2, 8) to keep data-term quadrature error below discretization error.
SparseSystem assemble(const MeshForest& forest, const DofMap& dm, const CoefficientField& coeffs,
                      int quad_degree = 0 /* 0 = default */);

}  // namespace ufem
