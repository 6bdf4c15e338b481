#include "ufem/estimator.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ufem {

namespace {

// ∇u_H on element e at the point with barycentric coordinates lam
Vec2 grad_at(const DofMap& dm, const std::vector<double>& u, ElementId e,
             const std::array<double, 3>& lam, const ElementGeometry& g,
             const RefBasis& basis, RefBasis::Eval& ev) {
  basis.eval(lam, ev);
  const auto& row = dm.conn[static_cast<size_t>(dm.row_of.at(e))];
  Vec2 grad{0.0, 0.0};
  for (int m = 0; m < dm.n_en; ++m) {
    int32_t gi = row[static_cast<size_t>(m)];
    if (gi < 0) continue;
    const auto& d = ev.dlam[static_cast<size_t>(m)];
    Vec2 gm = d[0] * g.grad_lambda[0] + d[1] * g.grad_lambda[1] + d[2] * g.grad_lambda[2];
    grad = grad + u[static_cast<size_t>(gi)] * gm;
  }
  return grad;
}

int local_vertex(const TaggedTriangle& t, VertexId v) {
  for (int k = 0; k < 3; ++k)
    if (t.v[static_cast<size_t>(k)] == v) return k;
  throw std::logic_error("vertex not on element");
}

}  // namespace

std::unordered_map<uint64_t, double> face_jump_norms(const MeshForest& forest,
                                                     const ActiveSet& active, const DofMap& dm,
                                                     const std::vector<double>& u) {
  const RefBasis& basis = ref_basis(dm.p);
  const LineQuadRule& lr = line_rule(dm.p + 1);
  RefBasis::Eval ev;
  std::unordered_map<uint64_t, double> out;
  out.reserve(dm.elems.size() * 2);

  for (ElementId e : dm.elems) {
    const TaggedTriangle& t = forest.elem(e);
    for (int k = 0; k < 3; ++k) {
      VertexId a = t.v[static_cast<size_t>(k)];
      VertexId b = t.v[static_cast<size_t>((k + 1) % 3)];
      uint64_t key = face_key(a, b);
      if (out.count(key)) continue;
      auto cls = active.classify_face(forest, key);
      if (cls == ActiveSet::FaceClass::DirichletBoundary) continue;

      // parameterize from the lower to the higher global vertex id so both
      // sides sample identical physical points
      VertexId lo = a < b ? a : b, hi = a < b ? b : a;
      Vec2 xlo = forest.vertex_xy(lo), xhi = forest.vertex_xy(hi);
      Vec2 tangent = xhi - xlo;
      double len = norm(tangent);
      Vec2 n = (1.0 / len) * perp(tangent);

      const MeshForest::FaceEntry* fe = forest.find_face(key);
      ElementId sides[2] = {kNoElement, kNoElement};
      int ns = 0;
      if (fe->e0 != kNoElement && active.is_active(fe->e0)) sides[ns++] = fe->e0;
      if (fe->e1 != kNoElement && active.is_active(fe->e1)) sides[ns++] = fe->e1;
      assert(ns >= 1);
      if (cls == ActiveSet::FaceClass::TruncationBoundary) {
        assert(ns == 1);
      } else {
        assert(ns == 2);
      }

      ElementGeometry geo[2];
      int la[2] = {0, 0}, lb[2] = {0, 0};
      for (int s = 0; s < ns; ++s) {
        geo[s] = element_geometry(forest, sides[s]);
        la[s] = local_vertex(forest.elem(sides[s]), lo);
        lb[s] = local_vertex(forest.elem(sides[s]), hi);
      }

      double acc = 0.0;
      for (size_t q = 0; q < lr.points.size(); ++q) {
        double tq = lr.points[q];
        double jump = 0.0;
        for (int s = 0; s < ns; ++s) {
          std::array<double, 3> lam{0.0, 0.0, 0.0};
          lam[static_cast<size_t>(la[s])] = 1.0 - tq;
          lam[static_cast<size_t>(lb[s])] = tq;
          Vec2 gr = grad_at(dm, u, sides[s], lam, geo[s], basis, ev);
          double dn = dot(gr, n);
          jump += (s == 0 ? dn : -dn);
        }
        acc += lr.weights[q] * jump * jump;
      }
      out.emplace(key, len * acc);
    }
  }
  return out;
}

namespace {

// dense Cholesky solve for the tiny projection Gram systems
void chol_solve(int n, double* a /* n x n, overwritten */, double* b) {
  for (int j = 0; j < n; ++j) {
    double d = a[j * n + j];
    for (int k = 0; k < j; ++k) d -= a[j * n + k] * a[j * n + k];
    assert(d > 0.0);
    d = std::sqrt(d);
    a[j * n + j] = d;
    for (int i = j + 1; i < n; ++i) {
      double s = a[i * n + j];
      for (int k = 0; k < j; ++k) s -= a[i * n + k] * a[j * n + k];
      a[i * n + j] = s / d;
    }
  }
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int k = 0; k < i; ++k) s -= a[i * n + k] * b[k];
    b[i] = s / a[i * n + i];
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = b[i];
    for (int k = i + 1; k < n; ++k) s -= a[k * n + i] * b[k];
    b[i] = s / a[i * n + i];
  }
}

// squared quadrature L² distance of g from P_q(T), i.e. ‖g‖² − ‖Π_q g‖²
double projection_defect_sq(const MeshForest& forest, ElementId e,
                            const std::function<double(Vec2)>& g, int q,
                            const TriQuadRule& rule) {
  ElementGeometry geo = element_geometry(forest, e);
  Vec2 bc = (1.0 / 3.0) * (geo.x[0] + geo.x[1] + geo.x[2]);
  double h = std::sqrt(geo.abs_area);

  const int nb = (q + 1) * (q + 2) / 2;
  assert(nb <= 21);
  double gram[21 * 21] = {0.0};
  double rhs[21] = {0.0};
  double gsq = 0.0;
  double mono[21];

  for (size_t iq = 0; iq < rule.points.size(); ++iq) {
    const auto& lam = rule.points[iq];
    double w = rule.weights[iq] * geo.abs_area;
    Vec2 x = lam[0] * geo.x[0] + lam[1] * geo.x[1] + lam[2] * geo.x[2];
    double xi = (x.x - bc.x) / h, et = (x.y - bc.y) / h;
    int m = 0;
    for (int d = 0; d <= q; ++d)
      for (int ax = d; ax >= 0; --ax) mono[m++] = std::pow(xi, ax) * std::pow(et, d - ax);
    double gv = g(x);
    gsq += w * gv * gv;
    for (int i = 0; i < nb; ++i) {
      rhs[i] += w * gv * mono[i];
      for (int j = 0; j <= i; ++j) gram[i * nb + j] += w * mono[i] * mono[j];
    }
  }
  for (int i = 0; i < nb; ++i)
    for (int j = i + 1; j < nb; ++j) gram[i * nb + j] = gram[j * nb + i];

  double coef[21];
  std::copy(rhs, rhs + nb, coef);
  chol_solve(nb, gram, coef);
  double proj_sq = 0.0;
  for (int i = 0; i < nb; ++i) proj_sq += coef[i] * rhs[i];
  return std::max(0.0, gsq - proj_sq);
}

}  // namespace

double oscillation(const MeshForest& forest, ElementId e,
                   const std::function<double(Vec2)>& g, int q, const TriQuadRule& rule) {
  return forest.area(e) * projection_defect_sq(forest, e, g, q, rule);  // h_T² = |T|
}

IndicatorField compute_indicators(const MeshForest& forest, const ActiveSet& active,
                                  const DofMap& dm, const CoefficientField& coeffs,
                                  const std::vector<double>& u, int osc_q, int vol_degree) {
  if (osc_q < 0) osc_q = std::max(dm.p - 2, 0);
  if (vol_degree == 0) vol_degree = std::min(2 * dm.p + 6, 12);
  const TriQuadRule& rule = quadrature_rule(vol_degree);
  const RefBasis& basis = ref_basis(dm.p);
  RefBasis::Eval ev;

  auto jumps = face_jump_norms(forest, active, dm, u);

  IndicatorField out;
  out.rows.assign(dm.elems.size(), {});

  for (size_t r = 0; r < dm.elems.size(); ++r) {
    ElementId e = dm.elems[r];
    const TaggedTriangle& t = forest.elem(e);
    ElementGeometry geo = element_geometry(forest, e);
    double hT2 = geo.abs_area;  // h_T²
    double hT = std::sqrt(hT2);
    double ksq = coeffs.kappa_sq(forest, e);
    const auto& row = dm.conn[r];

    double gcd[6];  // ∇λ_c · ∇λ_d packed (00,11,22,01,02,12)
    gcd[0] = dot(geo.grad_lambda[0], geo.grad_lambda[0]);
    gcd[1] = dot(geo.grad_lambda[1], geo.grad_lambda[1]);
    gcd[2] = dot(geo.grad_lambda[2], geo.grad_lambda[2]);
    gcd[3] = dot(geo.grad_lambda[0], geo.grad_lambda[1]);
    gcd[4] = dot(geo.grad_lambda[0], geo.grad_lambda[2]);
    gcd[5] = dot(geo.grad_lambda[1], geo.grad_lambda[2]);

    double vol = 0.0;
    for (size_t iq = 0; iq < rule.points.size(); ++iq) {
      const auto& lam = rule.points[iq];
      double w = rule.weights[iq] * geo.abs_area;
      basis.eval(lam, ev);
      Vec2 x = lam[0] * geo.x[0] + lam[1] * geo.x[1] + lam[2] * geo.x[2];
      double uval = 0.0, ulap = 0.0;
      for (int m = 0; m < dm.n_en; ++m) {
        int32_t gi = row[static_cast<size_t>(m)];
        if (gi < 0) continue;
        double c = u[static_cast<size_t>(gi)];
        uval += c * ev.val[static_cast<size_t>(m)];
        const auto& h2 = ev.d2lam[static_cast<size_t>(m)];
        ulap += c * (h2[0] * gcd[0] + h2[1] * gcd[1] + h2[2] * gcd[2] +
                     2.0 * (h2[3] * gcd[3] + h2[4] * gcd[4] + h2[5] * gcd[5]));
      }
      double res = coeffs.f(forest, e, x) - ksq * uval + ulap;
      vol += w * res * res;
    }

    double jmp = 0.0;
    for (int k = 0; k < 3; ++k) {
      uint64_t key = face_key(t.v[static_cast<size_t>(k)], t.v[static_cast<size_t>((k + 1) % 3)]);
      auto it = jumps.find(key);
      if (it != jumps.end()) jmp += it->second;
    }

    IndicatorRow& ir = out.rows[r];
    ir.vol_sq = hT2 * vol;
    ir.jump_sq = hT * jmp;
    ir.eta_sq = ir.vol_sq + ir.jump_sq;
    ir.osc_sq = oscillation(
        forest, e,
        [&](Vec2 x) {
          // f − κ²u_H sampled through the discrete expansion
          std::array<double, 3> lam{};
          // barycentric coordinates via the affine inverse
          Vec2 d = x - geo.x[0];
          Vec2 e1 = geo.x[1] - geo.x[0], e2 = geo.x[2] - geo.x[0];
          double det = cross(e1, e2);
          lam[1] = cross(d, e2) / det;
          lam[2] = cross(e1, d) / det;
          lam[0] = 1.0 - lam[1] - lam[2];
          basis.eval(lam, ev);
          double uval = 0.0;
          for (int m = 0; m < dm.n_en; ++m) {
            int32_t gi = row[static_cast<size_t>(m)];
            if (gi >= 0) uval += u[static_cast<size_t>(gi)] * ev.val[static_cast<size_t>(m)];
          }
          return coeffs.f(forest, e, x) - ksq * uval;
        },
        osc_q, rule);
    out.total_sq += ir.eta_sq;
  }
  return out;
}

double total_estimator(const IndicatorField& f) { return std::sqrt(f.total_sq); }

double total_estimator(const IndicatorField& f, const DofMap& dm,
                       const std::vector<ElementId>& subset) {
  double s = 0.0;
  for (ElementId e : subset) {
    auto it = dm.row_of.find(e);
    if (it == dm.row_of.end()) throw std::invalid_argument("subset element is not active");
    s += f.rows[static_cast<size_t>(it->second)].eta_sq;
  }
  return std::sqrt(s);
}

void dump_indicators(const std::string& path, const DofMap& dm, const IndicatorField& f) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(fp, "# element_id eta_sq volume_sq jump_sq osc_sq\n");
  for (size_t r = 0; r < dm.elems.size(); ++r) {
    const IndicatorRow& ir = f.rows[r];
    std::fprintf(fp, "%d %.17g %.17g %.17g %.17g\n", dm.elems[r], ir.eta_sq, ir.vol_sq,
                 ir.jump_sq, ir.osc_sq);
  }
  std::fclose(fp);
}

}  // namespace ufem
