#pragma once

#include <cstdint>

#include "ufem/geometry.hpp"

namespace ufem {

// The unbounded polytopal domain, described through the uniform macro grid of
// axis-aligned squares with side h0. Cell (i, j) covers
// [i*h0, (i+1)*h0] x [j*h0, (j+1)*h0].
struct MacroDomain {
  enum class Kind { FullPlane, LShape };

  Kind kind = Kind::FullPlane;
  double h0 = 1.0;

  // whole cell inside the closed domain?
  bool contains_cell(int64_t i, int64_t j) const {
    if (kind == Kind::FullPlane) return true;
    return i >= 0 || j >= 0;  // L-shape: x1 >= 0 or x2 >= 0
  }

  // exact point-on-boundary predicate (macro-grid units)
  bool on_boundary(const DyadicPoint& p) const {
    if (kind == Kind::FullPlane) return false;
    return (p.ny == 0 && p.nx <= 0) || (p.nx == 0 && p.ny <= 0);
  }

  // a mesh face lies on the boundary iff both endpoints sit on the same ray
  bool face_on_boundary(const DyadicPoint& a, const DyadicPoint& b) const {
    if (kind == Kind::FullPlane) return false;
    if (a.ny == 0 && a.nx <= 0 && b.ny == 0 && b.nx <= 0) return true;
    if (a.nx == 0 && a.ny <= 0 && b.nx == 0 && b.ny <= 0) return true;
    return false;
  }
};

}  // namespace ufem
