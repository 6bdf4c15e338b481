#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ufem/adaptive.hpp"
#include "ufem/estimator.hpp"

namespace testutil {

// deterministic rng for randomized properties
struct Rng {
  uint64_t s;
  explicit Rng(uint64_t seed) : s(seed ? seed : 0x9e3779b97f4a7c15ull) {}
  uint64_t next() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  }
  double uniform() { return (next() >> 11) * 0x1.0p-53; }        // [0, 1)
  double sym() { return 2.0 * uniform() - 1.0; }                 // [-1, 1)
  int index(int n) { return static_cast<int>(next() % static_cast<uint64_t>(n)); }
};

inline ufem::MacroDomain plane(double h0 = 1.0) {
  return ufem::MacroDomain{ufem::MacroDomain::Kind::FullPlane, h0};
}
inline ufem::MacroDomain lshape(double h0 = 1.0) {
  return ufem::MacroDomain{ufem::MacroDomain::Kind::LShape, h0};
}

// one macro square (0,0), all 4 triangles active
inline ufem::MeshForest one_square() {
  ufem::MeshForest f(plane());
  f.materialize_macro_cell(0, 0, true);
  return f;
}

struct Disc {
  ufem::ActiveSet active;
  ufem::DofMap dm;
};
inline Disc discretize(const ufem::MeshForest& f, int p) {
  Disc d{ufem::ActiveSet::compute(f), {}};
  d.dm = ufem::build_dofmap(f, d.active, p);
  return d;
}

inline ufem::CoefficientField const_coeffs(double ksq, double fval) {
  ufem::CoefficientField c;
  c.kappa_sq = [ksq](const ufem::MeshForest&, ufem::ElementId) { return ksq; };
  c.f = [fval](const ufem::MeshForest&, ufem::ElementId, ufem::Vec2) { return fval; };
  return c;
}

// leaf whose sorted vertex coordinates match `want` (sorted lexicographically)
inline ufem::ElementId find_leaf(const ufem::MeshForest& f,
                                 std::array<std::array<double, 2>, 3> want) {
  std::sort(want.begin(), want.end());
  for (ufem::ElementId e = 0; e < f.n_elements(); ++e) {
    if (!f.elem(e).is_leaf()) continue;
    auto xs = f.coords(e);
    std::array<std::array<double, 2>, 3> got{{{xs[0].x, xs[0].y},
                                              {xs[1].x, xs[1].y},
                                              {xs[2].x, xs[2].y}}};
    std::sort(got.begin(), got.end());
    if (got == want) return e;
  }
  return ufem::kNoElement;
}

// active leaf ids in ascending order
inline std::vector<ufem::ElementId> active_ids(const ufem::ActiveSet& a) { return a.ids(); }

// random refinement round: mark `n` random active leaves, refine with closure
inline void random_round(ufem::MeshForest& f, Rng& rng, int n) {
  ufem::ActiveSet a = ufem::ActiveSet::compute(f);
  auto ids = a.ids();
  if (ids.empty()) return;
  std::vector<ufem::ElementId> marked;
  for (int k = 0; k < n; ++k) marked.push_back(ids[static_cast<size_t>(rng.index(
      static_cast<int>(ids.size())))]);
  f.refine_closure(marked);
}

// squared energy norm of a coefficient vector through the assembled matrix
inline double energy_sq(const ufem::CsrMatrix& A, const std::vector<double>& x) {
  return A.quad_form(x);
}

}  // namespace testutil
