#include "ufem/fem.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace ufem {

namespace {

// value / first / second derivative of the Silvester factor
// L_m(t) = prod_{r=0}^{m-1} (p t - r) / (m - r)
void silvester(int p, int m, double t, double& f, double& df, double& d2f) {
  f = 1.0;
  df = 0.0;
  d2f = 0.0;
  for (int r = 0; r < m; ++r) {
    double g = (p * t - r) / (m - r);
    double dg = static_cast<double>(p) / (m - r);
    d2f = d2f * g + 2.0 * df * dg;
    df = df * g + f * dg;
    f = f * g;
  }
}

}  // namespace

RefBasis::RefBasis(int p) : p_(p) {
  if (p < 1 || p > kMaxP) throw std::invalid_argument("polynomial degree must be in 1..4");
  n_nodes_ = (p + 1) * (p + 2) / 2;
  lattice_.reserve(static_cast<size_t>(n_nodes_));
  lattice_.push_back({p, 0, 0});
  lattice_.push_back({0, p, 0});
  lattice_.push_back({0, 0, p});
  for (int s = 1; s < p; ++s) lattice_.push_back({p - s, s, 0});  // edge 01
  for (int s = 1; s < p; ++s) lattice_.push_back({0, p - s, s});  // edge 12
  for (int s = 1; s < p; ++s) lattice_.push_back({s, 0, p - s});  // edge 20
  for (int i = p - 2; i >= 1; --i)
    for (int j = p - 1 - i; j >= 1; --j) {
      int k = p - i - j;
      if (k >= 1) lattice_.push_back({i, j, k});
    }
  assert(static_cast<int>(lattice_.size()) == n_nodes_);
}

void RefBasis::eval(const std::array<double, 3>& lam, Eval& out) const {
  // factor tables: per coordinate, per lattice exponent 0..p
  double F[3][kMaxP + 1], dF[3][kMaxP + 1], d2F[3][kMaxP + 1];
  for (int c = 0; c < 3; ++c)
    for (int m = 0; m <= p_; ++m)
      silvester(p_, m, lam[static_cast<size_t>(c)], F[c][m], dF[c][m], d2F[c][m]);

  for (int n = 0; n < n_nodes_; ++n) {
    const auto& l = lattice_[static_cast<size_t>(n)];
    double a = F[0][l[0]], b = F[1][l[1]], c = F[2][l[2]];
    double da = dF[0][l[0]], db = dF[1][l[1]], dc = dF[2][l[2]];
    out.val[static_cast<size_t>(n)] = a * b * c;
    auto& g = out.dlam[static_cast<size_t>(n)];
    g[0] = da * b * c;
    g[1] = a * db * c;
    g[2] = a * b * dc;
    auto& h = out.d2lam[static_cast<size_t>(n)];
    h[0] = d2F[0][l[0]] * b * c;
    h[1] = a * d2F[1][l[1]] * c;
    h[2] = a * b * d2F[2][l[2]];
    h[3] = da * db * c;
    h[4] = da * b * dc;
    h[5] = a * db * dc;
  }
}

const RefBasis& ref_basis(int p) {
  if (p < 1 || p > kMaxP) throw std::invalid_argument("polynomial degree must be in 1..4");
  static const RefBasis b1(1), b2(2), b3(3), b4(4);
  static const RefBasis* table[kMaxP + 1] = {nullptr, &b1, &b2, &b3, &b4};
  return *table[p];
}

ElementGeometry element_geometry(const MeshForest& forest, ElementId e) {
  ElementGeometry g;
  g.x = forest.coords(e);
  g.signed_area = 0.5 * cross(g.x[1] - g.x[0], g.x[2] - g.x[0]);
  g.abs_area = forest.area(e);  // exact
  if (g.abs_area <= 0.0) throw std::runtime_error("degenerate element");
  double inv2a = 1.0 / (2.0 * g.signed_area);
  for (int c = 0; c < 3; ++c) {
    Vec2 opp = g.x[static_cast<size_t>((c + 2) % 3)] - g.x[static_cast<size_t>((c + 1) % 3)];
    g.grad_lambda[static_cast<size_t>(c)] = inv2a * perp(opp);
  }
  return g;
}

namespace {

struct EntityConstraints {
  // vertex id -> used by an active element / constrained
  std::unordered_map<VertexId, uint8_t> vert;  // bit0 used, bit1 constrained
  std::unordered_map<uint64_t, uint8_t> edge;  // face key -> same bits
};

}  // namespace

DofMap build_dofmap(const MeshForest& forest, const ActiveSet& active, int p) {
  if (p < 1 || p > kMaxP) throw std::invalid_argument("polynomial degree must be in 1..4");
  DofMap dm;
  dm.p = p;
  dm.n_en = (p + 1) * (p + 2) / 2;
  dm.elems = active.ids();
  dm.conn.assign(dm.elems.size(), {});
  dm.row_of.reserve(dm.elems.size() * 2);
  for (size_t r = 0; r < dm.elems.size(); ++r)
    dm.row_of.emplace(dm.elems[r], static_cast<int32_t>(r));

  const MacroDomain& dom = forest.domain();
  EntityConstraints ec;
  for (ElementId e : dm.elems) {
    const TaggedTriangle& t = forest.elem(e);
    for (int k = 0; k < 3; ++k) {
      VertexId va = t.v[static_cast<size_t>(k)];
      VertexId vb = t.v[static_cast<size_t>((k + 1) % 3)];
      uint64_t key = face_key(va, vb);
      bool constrained =
          active.classify_face(forest, key) != ActiveSet::FaceClass::Interior ||
          dom.face_on_boundary(forest.vertex_dyadic(va), forest.vertex_dyadic(vb));
      uint8_t bits = static_cast<uint8_t>(1u | (constrained ? 2u : 0u));
      ec.edge[key] |= bits;
      ec.vert[va] |= bits;
      ec.vert[vb] |= bits;
    }
    // a vertex on the physical boundary is constrained regardless of how its
    // incident faces classify (relevant at the re-entrant corner)
    for (int k = 0; k < 3; ++k) {
      VertexId v = t.v[static_cast<size_t>(k)];
      ec.vert[v] |= 1u;
      if (dom.on_boundary(forest.vertex_dyadic(v))) ec.vert[v] |= 2u;
    }
  }

  // global numbering: vertex dofs by ascending vertex id, then edge dofs by
  // ascending face key, then element-interior dofs by ascending element id
  std::unordered_map<VertexId, int32_t> vnum;
  {
    std::vector<VertexId> vs;
    vs.reserve(ec.vert.size());
    for (const auto& [v, bits] : ec.vert)
      if ((bits & 2u) == 0) vs.push_back(v);
    std::sort(vs.begin(), vs.end());
    for (VertexId v : vs) vnum.emplace(v, static_cast<int32_t>(dm.n_dofs++));
  }
  std::unordered_map<uint64_t, int32_t> enum_;
  if (p >= 2) {
    std::vector<uint64_t> es;
    es.reserve(ec.edge.size());
    for (const auto& [k, bits] : ec.edge)
      if ((bits & 2u) == 0) es.push_back(k);
    std::sort(es.begin(), es.end());
    for (uint64_t k : es) {
      enum_.emplace(k, static_cast<int32_t>(dm.n_dofs));
      dm.n_dofs += p - 1;
    }
  }
  int n_int = (p - 1) * (p - 2) / 2;

  for (size_t r = 0; r < dm.elems.size(); ++r) {
    const TaggedTriangle& t = forest.elem(dm.elems[r]);
    auto& row = dm.conn[r];
    row.fill(-1);
    for (int k = 0; k < 3; ++k) {
      auto it = vnum.find(t.v[static_cast<size_t>(k)]);
      row[static_cast<size_t>(k)] = it == vnum.end() ? -1 : it->second;
    }
    if (p >= 2) {
      const int pairs[3][2] = {{0, 1}, {1, 2}, {2, 0}};
      for (int eix = 0; eix < 3; ++eix) {
        VertexId a = t.v[static_cast<size_t>(pairs[eix][0])];
        VertexId b = t.v[static_cast<size_t>(pairs[eix][1])];
        auto it = enum_.find(face_key(a, b));
        for (int s = 1; s < p; ++s) {
          int slot = 3 + eix * (p - 1) + (s - 1);
          if (it == enum_.end()) {
            row[static_cast<size_t>(slot)] = -1;
          } else {
            // edge dofs stored walking from the lower vertex id to the higher
            int off = a < b ? s - 1 : p - 1 - s;
            row[static_cast<size_t>(slot)] = it->second + off;
          }
        }
      }
    }
    for (int s = 0; s < n_int; ++s)
      row[static_cast<size_t>(3 + 3 * (p - 1) + s)] = static_cast<int32_t>(dm.n_dofs + s);
    if (n_int > 0) dm.n_dofs += n_int;
  }
  return dm;
}

std::array<double, 3> child_to_parent_bary(int which_child, const std::array<double, 3>& mu) {
  // child 0 = [z0, m, z1]: lam = (mu0 + mu1/2, mu2, mu1/2)
  // child 1 = [z2, m, z1]: lam = (mu1/2, mu2, mu0 + mu1/2)
  if (which_child == 0) return {mu[0] + 0.5 * mu[1], mu[2], 0.5 * mu[1]};
  return {0.5 * mu[1], mu[2], mu[0] + 0.5 * mu[1]};
}

int parent_to_child_bary(std::array<double, 3>& lam) {
  if (lam[0] >= lam[2]) {
    lam = {lam[0] - lam[2], 2.0 * lam[2], lam[1]};
    return 0;
  }
  lam = {lam[2] - lam[0], 2.0 * lam[0], lam[1]};
  return 1;
}

namespace {

// ascend from e to the nearest ancestor (or self) present in dm; returns
// kNoElement when none is (the point lies outside dm's active region)
ElementId ascend_to(const MeshForest& forest, const DofMap& dm, ElementId e,
                    std::array<double, 3>& lam) {
  while (e != kNoElement && !dm.has(e)) {
    ElementId par = forest.elem(e).parent;
    if (par != kNoElement) {
      int which = (e == forest.elem(par).child0) ? 0 : 1;
      lam = child_to_parent_bary(which, lam);
    }
    e = par;
  }
  return e;
}

}  // namespace

double eval_on_ancestors(const MeshForest& forest, const DofMap& dm, const std::vector<double>& u,
                         ElementId e, std::array<double, 3> lam) {
  ElementId host = ascend_to(forest, dm, e, lam);
  if (host == kNoElement) return 0.0;
  const RefBasis& basis = ref_basis(dm.p);
  RefBasis::Eval ev;
  basis.eval(lam, ev);
  const auto& row = dm.conn[static_cast<size_t>(dm.row_of.at(host))];
  double s = 0.0;
  for (int m = 0; m < dm.n_en; ++m) {
    int32_t g = row[static_cast<size_t>(m)];
    if (g >= 0) s += u[static_cast<size_t>(g)] * ev.val[static_cast<size_t>(m)];
  }
  return s;
}

std::vector<double> prolong(const MeshForest& forest, const DofMap& coarse,
                            const std::vector<double>& u_coarse, const DofMap& fine) {
  Prolongation P = build_prolongation(forest, coarse, fine);
  return P.apply(u_coarse);
}

std::vector<double> Prolongation::apply(const std::vector<double>& xc) const {
  assert(static_cast<int64_t>(xc.size()) == n_coarse);
  std::vector<double> out(static_cast<size_t>(n_fine), 0.0);
  for (size_t i = 0; i < rows.size(); ++i) {
    double s = 0.0;
    for (const auto& [j, w] : rows[i]) s += w * xc[static_cast<size_t>(j)];
    out[i] = s;
  }
  return out;
}

std::vector<double> Prolongation::apply_transpose(const std::vector<double>& xf) const {
  assert(static_cast<int64_t>(xf.size()) == n_fine);
  std::vector<double> out(static_cast<size_t>(n_coarse), 0.0);
  for (size_t i = 0; i < rows.size(); ++i)
    for (const auto& [j, w] : rows[i]) out[static_cast<size_t>(j)] += w * xf[i];
  return out;
}

Prolongation build_prolongation(const MeshForest& forest, const DofMap& coarse,
                                const DofMap& fine) {
  assert(coarse.p == fine.p);
  const RefBasis& basis = ref_basis(fine.p);
  Prolongation P;
  P.n_fine = fine.n_dofs;
  P.n_coarse = coarse.n_dofs;
  P.rows.assign(static_cast<size_t>(fine.n_dofs), {});
  std::vector<uint8_t> done(static_cast<size_t>(fine.n_dofs), 0);

  RefBasis::Eval ev;
  for (size_t r = 0; r < fine.elems.size(); ++r) {
    ElementId e = fine.elems[r];
    const auto& row = fine.conn[r];
    for (int m = 0; m < fine.n_en; ++m) {
      int32_t g = row[static_cast<size_t>(m)];
      if (g < 0 || done[static_cast<size_t>(g)]) continue;
      done[static_cast<size_t>(g)] = 1;
      std::array<double, 3> lam = basis.node_bary(m);
      ElementId host = ascend_to(forest, coarse, e, lam);
      if (host == kNoElement) continue;  // zero row: node outside coarse region
      basis.eval(lam, ev);
      const auto& crow = coarse.conn[static_cast<size_t>(coarse.row_of.at(host))];
      auto& out = P.rows[static_cast<size_t>(g)];
      for (int n = 0; n < coarse.n_en; ++n) {
        int32_t cg = crow[static_cast<size_t>(n)];
        double w = ev.val[static_cast<size_t>(n)];
        if (cg >= 0 && w != 0.0) out.emplace_back(cg, w);
      }
    }
  }
  return P;
}

}  // namespace ufem
