#include "ufem/mesh.hpp"

#include <algorithm>
#include <cassert>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <set>

namespace ufem {

namespace {

int64_t unpack_i(uint64_t key) { return static_cast<int32_t>(static_cast<uint32_t>(key >> 32)); }
int64_t unpack_j(uint64_t key) { return static_cast<int32_t>(static_cast<uint32_t>(key)); }

double int128_to_double(__int128 v) {
  bool neg = v < 0;
  unsigned __int128 u = neg ? -static_cast<unsigned __int128>(v) : static_cast<unsigned __int128>(v);
  double d = static_cast<double>(static_cast<uint64_t>(u >> 64)) * 18446744073709551616.0 +
             static_cast<double>(static_cast<uint64_t>(u));
  return neg ? -d : d;
}

// shift the three vertices to a common exponent; returns that exponent
uint32_t common_exp(const DyadicPoint& a, const DyadicPoint& b, const DyadicPoint& c,
                    __int128 x[3], __int128 y[3]) {
  uint32_t e = std::max(a.exp, std::max(b.exp, c.exp));
  const DyadicPoint* p[3] = {&a, &b, &c};
  for (int k = 0; k < 3; ++k) {
    x[k] = static_cast<__int128>(p[k]->nx) << (e - p[k]->exp);
    y[k] = static_cast<__int128>(p[k]->ny) << (e - p[k]->exp);
  }
  return e;
}

}  // namespace

VertexId MeshForest::add_vertex(const DyadicPoint& p) {
  DyadicPoint q = p;
  q.normalize();
  Vertex v;
  v.p = q;
  v.xy = dyadic_to_phys(q, dom_.h0);
  verts_.push_back(v);
  return static_cast<VertexId>(verts_.size() - 1);
}

VertexId MeshForest::grid_vertex(int64_t i, int64_t j) {
  uint64_t key = cell_key(i, j);
  auto it = grid_verts_.find(key);
  if (it != grid_verts_.end()) return it->second;
  VertexId v = add_vertex(DyadicPoint{i, j, 0});
  grid_verts_.emplace(key, v);
  return v;
}

void MeshForest::face_add(uint64_t key, ElementId e) {
  FaceEntry& fe = face_adj_[key];
  if (fe.e0 == kNoElement) {
    fe.e0 = e;
  } else {
    assert(fe.e1 == kNoElement && "face already has two owners");
    fe.e1 = e;
  }
}

void MeshForest::face_remove(uint64_t key, ElementId e) {
  auto it = face_adj_.find(key);
  assert(it != face_adj_.end());
  FaceEntry& fe = it->second;
  if (fe.e0 == e) {
    fe.e0 = fe.e1;
    fe.e1 = kNoElement;
  } else {
    assert(fe.e1 == e);
    fe.e1 = kNoElement;
  }
  if (fe.e0 == kNoElement) face_adj_.erase(it);
}

void MeshForest::add_leaf_faces(ElementId e) {
  const TaggedTriangle& t = elem(e);
  face_add(face_key(t.v[0], t.v[1]), e);
  face_add(face_key(t.v[1], t.v[2]), e);
  face_add(face_key(t.v[2], t.v[0]), e);
}

void MeshForest::remove_leaf_faces(ElementId e) {
  const TaggedTriangle& t = elem(e);
  face_remove(face_key(t.v[0], t.v[1]), e);
  face_remove(face_key(t.v[1], t.v[2]), e);
  face_remove(face_key(t.v[2], t.v[0]), e);
}

std::vector<ElementId> MeshForest::materialize_macro_cell(int64_t i, int64_t j,
                                                          bool initially_active) {
  uint64_t key = cell_key(i, j);
  auto it = cells_.find(key);
  if (it != cells_.end()) {
    if (it->second == kNoElement) return {};
    return {it->second, it->second + 1, it->second + 2, it->second + 3};
  }
  if (!dom_.contains_cell(i, j)) {
    cells_.emplace(key, kNoElement);
    return {};
  }
  VertexId c00 = grid_vertex(i, j);
  VertexId c10 = grid_vertex(i + 1, j);
  VertexId c11 = grid_vertex(i + 1, j + 1);
  VertexId c01 = grid_vertex(i, j + 1);
  VertexId ctr = add_vertex(DyadicPoint{2 * i + 1, 2 * j + 1, 1});

  ElementId first = static_cast<ElementId>(tris_.size());
  cells_.emplace(key, first);
  // creation order bottom, right, top, left; refinement edge = cell side
  const std::array<std::array<VertexId, 3>, 4> tri = {{
      {c00, ctr, c10},
      {c10, ctr, c11},
      {c11, ctr, c01},
      {c01, ctr, c00},
  }};
  std::vector<ElementId> out;
  for (int k = 0; k < 4; ++k) {
    TaggedTriangle t;
    t.v = tri[static_cast<size_t>(k)];
    t.tau = 0;
    t.level = 0;
    t.initially_active = initially_active;
    ElementId id = static_cast<ElementId>(tris_.size());
    tris_.push_back(t);
    root_cell_.emplace(id, key);
    add_leaf_faces(id);
    ++n_leaves_;
    out.push_back(id);
  }
  return out;
}

bool MeshForest::cell_materialized(int64_t i, int64_t j) const {
  auto it = cells_.find(cell_key(i, j));
  return it != cells_.end() && it->second != kNoElement;
}

std::pair<ElementId, ElementId> MeshForest::bisect(ElementId e) {
  assert(elem(e).is_leaf());
  VertexId z0 = elem(e).v[0], z1 = elem(e).v[1], z2 = elem(e).v[2];
  uint64_t ekey = face_key(z0, z2);
  VertexId m;
  auto it = edge_mid_.find(ekey);
  if (it != edge_mid_.end()) {
    m = it->second;
  } else {
    m = add_vertex(dyadic_midpoint(vertex_dyadic(z0), vertex_dyadic(z2)));
    edge_mid_.emplace(ekey, m);
  }
  remove_leaf_faces(e);

  int8_t ct = static_cast<int8_t>(1 - elem(e).tau);
  int32_t cl = elem(e).level + 1;
  ElementId c0 = static_cast<ElementId>(tris_.size());
  tris_[static_cast<size_t>(e)].child0 = c0;

  TaggedTriangle a;
  a.v = {z0, m, z1};
  a.tau = ct;
  a.level = cl;
  a.parent = e;
  TaggedTriangle b;
  b.v = {z2, m, z1};
  b.tau = ct;
  b.level = cl;
  b.parent = e;
  tris_.push_back(a);
  tris_.push_back(b);
  add_leaf_faces(c0);
  add_leaf_faces(c0 + 1);
  ++n_leaves_;  // net: -1 leaf, +2 leaves
  ++n_bisections_;
  return {c0, c0 + 1};
}

ElementId MeshForest::neighbor_across_refinement_edge(ElementId e) {
  uint64_t key = refinement_edge_key(e);
  {
    const FaceEntry& fe = face_adj_.at(key);
    if (fe.count() == 2) return fe.other(e);
  }
  const TaggedTriangle& t = elem(e);
  const DyadicPoint& a = vertex_dyadic(t.v[0]);
  const DyadicPoint& b = vertex_dyadic(t.v[2]);
  if (dom_.face_on_boundary(a, b)) return kNoElement;

  // single-sided and not on the domain boundary: the edge must be a full
  // macro-cell side whose far cell is not yet materialized
  assert(a.exp == 0 && b.exp == 0 && "frontier refinement edge is not a full cell side");
  int64_t ci, cj, di, dj;
  if (a.ny == b.ny) {  // horizontal side
    int64_t x0 = std::min(a.nx, b.nx);
    ci = x0, cj = a.ny - 1;  // below
    di = x0, dj = a.ny;      // above
  } else {
    assert(a.nx == b.nx);
    int64_t y0 = std::min(a.ny, b.ny);
    ci = a.nx - 1, cj = y0;  // left
    di = a.nx, dj = y0;      // right
  }
  uint64_t own = root_cell_.at(root_of(e));
  uint64_t far_key;
  if (own == cell_key(ci, cj)) {
    far_key = cell_key(di, dj);
  } else {
    assert(own == cell_key(di, dj));
    far_key = cell_key(ci, cj);
  }
  materialize_macro_cell(unpack_i(far_key), unpack_j(far_key));
  const FaceEntry& fe = face_adj_.at(key);
  if (fe.count() == 2) return fe.other(e);
  return kNoElement;  // far cell outside the domain
}

void MeshForest::bisect_conforming(ElementId e, int depth) {
  if (depth >= max_closure_depth_)
    throw std::runtime_error("refinement closure recursion exceeded depth limit");
  while (true) {
    ElementId n = neighbor_across_refinement_edge(e);
    if (n == kNoElement) {
      bisect(e);
      return;
    }
    if (refinement_edge_key(n) == refinement_edge_key(e)) {
      bisect(e);
      bisect(n);
      return;
    }
    bisect_conforming(n, depth + 1);
  }
}

std::vector<ElementId> MeshForest::refine_closure(const std::vector<ElementId>& marked) {
  std::vector<ElementId> work(marked);
  std::sort(work.begin(), work.end());
  work.erase(std::unique(work.begin(), work.end()), work.end());
  ElementId from = static_cast<ElementId>(tris_.size());
  for (ElementId e : work) {
    assert(e >= 0 && e < from);
    if (!elem(e).is_leaf()) continue;  // already split by an earlier closure step
    bisect_conforming(e, 0);
  }
  std::vector<ElementId> out;
  for (ElementId e = from; e < static_cast<ElementId>(tris_.size()); ++e)
    if (elem(e).is_leaf()) out.push_back(e);
  return out;
}

double MeshForest::area(ElementId e) const {
  const TaggedTriangle& t = elem(e);
  __int128 x[3], y[3];
  uint32_t ce = common_exp(vertex_dyadic(t.v[0]), vertex_dyadic(t.v[1]),
                           vertex_dyadic(t.v[2]), x, y);
  __int128 cr = (x[1] - x[0]) * (y[2] - y[0]) - (y[1] - y[0]) * (x[2] - x[0]);
  if (cr < 0) cr = -cr;
  double scaled = std::ldexp(int128_to_double(cr), -2 * static_cast<int>(ce) - 1);
  return scaled * dom_.h0 * dom_.h0;
}

Vec2 MeshForest::barycenter(ElementId e) const {
  auto c = coords(e);
  return {(c[0].x + c[1].x + c[2].x) / 3.0, (c[0].y + c[1].y + c[2].y) / 3.0};
}

int MeshForest::barycenter_side_of_diagonal(ElementId e) const {
  const TaggedTriangle& t = elem(e);
  __int128 x[3], y[3];
  common_exp(vertex_dyadic(t.v[0]), vertex_dyadic(t.v[1]), vertex_dyadic(t.v[2]), x, y);
  __int128 s = (y[0] - x[0]) + (y[1] - x[1]) + (y[2] - x[2]);
  return s > 0 ? 1 : (s < 0 ? -1 : 0);
}

bool MeshForest::inside_unit_cell(ElementId e) const {
  const TaggedTriangle& t = elem(e);
  for (int k = 0; k < 3; ++k) {
    const DyadicPoint& p = vertex_dyadic(t.v[static_cast<size_t>(k)]);
    int64_t one = static_cast<int64_t>(1) << p.exp;
    if (p.nx < 0 || p.nx > one || p.ny < 0 || p.ny > one) return false;
  }
  return true;
}

ElementId MeshForest::root_of(ElementId e) const {
  while (elem(e).parent != kNoElement) e = elem(e).parent;
  return e;
}

MeshForest::RootInfo MeshForest::root_info(ElementId root) const {
  uint64_t key = root_cell_.at(root);
  RootInfo r;
  r.ci = unpack_i(key);
  r.cj = unpack_j(key);
  r.root_index = root - cells_.at(key);
  return r;
}

ElementId MeshForest::root_element(int64_t i, int64_t j, int root_index) const {
  auto it = cells_.find(cell_key(i, j));
  if (it == cells_.end() || it->second == kNoElement) return kNoElement;
  return it->second + root_index;
}

std::string MeshForest::validate_conforming() const {
  char buf[256];
  // per-element structure
  int64_t leaves = 0;
  for (ElementId e = 0; e < n_elements(); ++e) {
    const TaggedTriangle& t = elem(e);
    if (t.tau != t.level % 2) {
      snprintf(buf, sizeof buf, "element %d: tau %d != level %d mod 2", e, t.tau, t.level);
      return buf;
    }
    if (t.child0 != kNoElement) {
      for (int k = 0; k < 2; ++k) {
        const TaggedTriangle& c = elem(t.child0 + k);
        if (c.parent != e || c.level != t.level + 1) {
          snprintf(buf, sizeof buf, "element %d: inconsistent child %d", e, t.child0 + k);
          return buf;
        }
      }
    } else {
      ++leaves;
    }
  }
  if (leaves != n_leaves_) {
    snprintf(buf, sizeof buf, "leaf count drifted: counted %" PRId64 ", tracked %" PRId64,
             leaves, n_leaves_);
    return buf;
  }

  // vertex coordinate uniqueness (structural dedup audit)
  {
    std::set<std::array<int64_t, 3>> seen;
    for (const Vertex& v : verts_) {
      std::array<int64_t, 3> k{v.p.nx, v.p.ny, static_cast<int64_t>(v.p.exp)};
      if (!seen.insert(k).second) {
        snprintf(buf, sizeof buf, "duplicate vertex at (%" PRId64 ", %" PRId64 ") / 2^%u",
                 v.p.nx, v.p.ny, v.p.exp);
        return buf;
      }
    }
  }

  // rebuild the leaf face map from scratch
  std::unordered_map<uint64_t, FaceEntry> faces;
  for (ElementId e = 0; e < n_elements(); ++e) {
    if (!elem(e).is_leaf()) continue;
    const TaggedTriangle& t = elem(e);
    for (int k = 0; k < 3; ++k) {
      uint64_t key = face_key(t.v[static_cast<size_t>(k)], t.v[static_cast<size_t>((k + 1) % 3)]);
      FaceEntry& fe = faces[key];
      if (fe.e1 != kNoElement) {
        snprintf(buf, sizeof buf, "face %016" PRIx64 " has more than two owners", key);
        return buf;
      }
      (fe.e0 == kNoElement ? fe.e0 : fe.e1) = e;
    }
  }
  if (faces.size() != face_adj_.size())
    return "incremental face map out of sync with rebuild";
  for (const auto& [key, fe] : faces) {
    auto it = face_adj_.find(key);
    if (it == face_adj_.end()) return "incremental face map missing an entry";
    const FaceEntry& ge = it->second;
    if (std::minmax(fe.e0, fe.e1) != std::minmax(ge.e0, ge.e1))
      return "incremental face map entry disagrees with rebuild";

    // a midpoint vertex on a live leaf face would be a hanging vertex
    if (edge_mid_.count(key)) {
      snprintf(buf, sizeof buf, "hanging vertex on face %016" PRIx64, key);
      return buf;
    }
    if (fe.count() == 2) continue;
    // single-sided faces must lie on the domain boundary or be a full side
    // of a macro cell whose far side is not materialized
    VertexId va = static_cast<VertexId>(key >> 32), vb = static_cast<VertexId>(key & 0xffffffffu);
    const DyadicPoint& a = vertex_dyadic(va);
    const DyadicPoint& b = vertex_dyadic(vb);
    if (dom_.face_on_boundary(a, b)) continue;
    if (a.exp != 0 || b.exp != 0) {
      snprintf(buf, sizeof buf, "interior face %016" PRIx64 " with a single owner", key);
      return buf;
    }
    bool axis_unit = (a.ny == b.ny && (a.nx - b.nx == 1 || b.nx - a.nx == 1)) ||
                     (a.nx == b.nx && (a.ny - b.ny == 1 || b.ny - a.ny == 1));
    if (!axis_unit) {
      snprintf(buf, sizeof buf, "frontier face %016" PRIx64 " is not a unit cell side", key);
      return buf;
    }
  }
  return std::string();
}

void MeshForest::export_leaves(const std::string& path,
                               const std::vector<uint8_t>& active_flags) const {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(fp, "# id v0x v0y v1x v1y v2x v2y tau level active\n");
  for (ElementId e = 0; e < n_elements(); ++e) {
    if (!elem(e).is_leaf()) continue;
    const TaggedTriangle& t = elem(e);
    auto c = coords(e);
    int act = (static_cast<size_t>(e) < active_flags.size() && active_flags[static_cast<size_t>(e)]) ? 1 : 0;
    std::fprintf(fp, "%d %.17g %.17g %.17g %.17g %.17g %.17g %d %d %d\n", e, c[0].x, c[0].y,
                 c[1].x, c[1].y, c[2].x, c[2].y, t.tau, t.level, act);
  }
  std::fclose(fp);
}

ActiveSet ActiveSet::compute(const MeshForest& forest) {
  ActiveSet s;
  s.flags_.assign(static_cast<size_t>(forest.n_elements()), 0);
  for (ElementId e = 0; e < forest.n_elements(); ++e) {
    const TaggedTriangle& t = forest.elem(e);
    if (!t.is_leaf()) continue;
    if (t.level > 0 || t.initially_active) {
      s.flags_[static_cast<size_t>(e)] = 1;
      s.ids_.push_back(e);
    }
  }
  return s;
}

ActiveSet::FaceClass ActiveSet::classify_face(const MeshForest& forest, uint64_t key) const {
  const MeshForest::FaceEntry* fe = forest.find_face(key);
  assert(fe && fe->count() >= 1);
  if (fe->count() == 2 && is_active(fe->e0) && is_active(fe->e1)) return FaceClass::Interior;
  VertexId va = static_cast<VertexId>(key >> 32), vb = static_cast<VertexId>(key & 0xffffffffu);
  if (forest.domain().face_on_boundary(forest.vertex_dyadic(va), forest.vertex_dyadic(vb)))
    return FaceClass::DirichletBoundary;
  return FaceClass::TruncationBoundary;
}

namespace {

struct OverlayCursor {
  ElementId e = kNoElement;
  int state = 0;  // 0 = internal node, 1 = leaf at this node, 2 = inside a leaf above
};

OverlayCursor descend(const MeshForest& f, OverlayCursor c, int k) {
  if (c.state != 0) return {kNoElement, 2};
  ElementId ch = f.elem(c.e).child0 + k;
  return {ch, f.elem(ch).is_leaf() ? 1 : 0};
}

void overlay_rec(const MeshForest& fa, const MeshForest& fb, OverlayCursor a, OverlayCursor b,
                 int64_t ci, int64_t cj, int root_index, uint32_t depth, uint64_t path,
                 std::vector<OverlayLeaf>& out) {
  if (a.state != 0 && b.state != 0) {
    out.push_back({ci, cj, root_index, depth, path});
    return;
  }
  assert(depth < 64 && "overlay path deeper than 64 bisections");
  for (int k = 0; k < 2; ++k) {
    overlay_rec(fa, fb, descend(fa, a, k), descend(fb, b, k), ci, cj, root_index, depth + 1,
                path | (static_cast<uint64_t>(k) << depth), out);
  }
}

OverlayCursor cell_root_cursor(const MeshForest& f, int64_t i, int64_t j, int root_index) {
  ElementId r = f.root_element(i, j, root_index);
  if (r == kNoElement) return {kNoElement, 1};  // implicit macro leaf
  return {r, f.elem(r).is_leaf() ? 1 : 0};
}

}  // namespace

std::vector<OverlayLeaf> overlay(const MeshForest& a, const MeshForest& b) {
  assert(a.domain().kind == b.domain().kind);
  std::set<std::pair<int64_t, int64_t>> cells;
  auto gather = [&cells](const MeshForest& f) {
    for (ElementId e = 0; e < f.n_elements(); ++e) {
      if (f.elem(e).parent != kNoElement) continue;
      auto info = f.root_info(e);
      cells.insert({info.ci, info.cj});
    }
  };
  gather(a);
  gather(b);

  std::vector<OverlayLeaf> out;
  for (const auto& [ci, cj] : cells) {
    for (int r = 0; r < 4; ++r) {
      overlay_rec(a, b, cell_root_cursor(a, ci, cj, r), cell_root_cursor(b, ci, cj, r), ci, cj,
                  r, 0, 0, out);
    }
  }
  return out;
}

bool overlay_leaf_in(const MeshForest& f, const OverlayLeaf& leaf) {
  ElementId e = f.root_element(leaf.ci, leaf.cj, leaf.root_index);
  if (e == kNoElement) return leaf.depth == 0 && f.domain().contains_cell(leaf.ci, leaf.cj);
  for (uint32_t k = 0; k < leaf.depth; ++k) {
    if (f.elem(e).is_leaf()) return false;
    e = f.elem(e).child0 + static_cast<int>((leaf.path >> k) & 1u);
  }
  return f.elem(e).is_leaf();
}

}  // namespace ufem
