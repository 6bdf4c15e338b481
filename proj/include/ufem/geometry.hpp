#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace ufem {

struct Vec2 {
  double x = 0.0, y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
// 90-degree counterclockwise rotation
inline Vec2 perp(Vec2 a) { return {-a.y, a.x}; }

// Exact dyadic point in macro-grid units: value = (nx, ny) / 2^exp.
// All mesh vertices are of this form (grid corners, cell centers, repeated
// edge midpoints), so equality and sign predicates are exact integer tests.
struct DyadicPoint {
  int64_t nx = 0, ny = 0;
  uint32_t exp = 0;

  void normalize() {
    while (exp > 0 && (nx % 2 == 0) && (ny % 2 == 0)) {
      nx /= 2;
      ny /= 2;
      --exp;
    }
  }

  bool operator==(const DyadicPoint& o) const {
    return nx == o.nx && ny == o.ny && exp == o.exp;
  }
};

// exponent budget: int64 numerators with headroom for one midpoint shift
inline constexpr uint32_t kMaxDyadicExp = 62;

inline DyadicPoint dyadic_midpoint(const DyadicPoint& a, const DyadicPoint& b) {
  uint32_t e = (a.exp > b.exp ? a.exp : b.exp) + 1;
  if (e > kMaxDyadicExp)
    throw std::runtime_error("dyadic exponent budget exhausted (mesh refined too deep)");
  uint32_t sa = e - 1 - a.exp, sb = e - 1 - b.exp;
  DyadicPoint m;
  m.nx = (a.nx << sa) + (b.nx << sb);
  m.ny = (a.ny << sa) + (b.ny << sb);
  m.exp = e;
  m.normalize();
  return m;
}

inline Vec2 dyadic_to_phys(const DyadicPoint& p, double h0) {
  return {std::ldexp(static_cast<double>(p.nx), -static_cast<int>(p.exp)) * h0,
          std::ldexp(static_cast<double>(p.ny), -static_cast<int>(p.exp)) * h0};
}

// sign of (y - x), exact; used for mesh-aligned interface classification
inline int dyadic_sign_y_minus_x(const DyadicPoint& p) {
  if (p.ny > p.nx) return 1;
  if (p.ny < p.nx) return -1;
  return 0;
}

}  // namespace ufem
