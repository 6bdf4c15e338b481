#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "ufem/geometry.hpp"
#include "ufem/macro_domain.hpp"

namespace ufem {

using ElementId = int32_t;
using VertexId = int32_t;
inline constexpr ElementId kNoElement = -1;
inline constexpr VertexId kNoVertex = -1;

// Tagged simplex [z0, z1, z2; tau]: the refinement edge is conv{z0, z2};
// bisection inserts its midpoint m and produces
//   C1 = [z0, m, z1; 1-tau],  C2 = [z2, m, z1; 1-tau].
struct TaggedTriangle {
  std::array<VertexId, 3> v{kNoVertex, kNoVertex, kNoVertex};
  int8_t tau = 0;
  bool initially_active = false;  // meaningful for level-0 elements only
  int32_t level = 0;
  ElementId parent = kNoElement;
  ElementId child0 = kNoElement;  // children are consecutive: child0, child0+1

  bool is_leaf() const { return child0 == kNoElement; }
};

inline uint64_t face_key(VertexId a, VertexId b) {
  uint32_t lo = static_cast<uint32_t>(a < b ? a : b);
  uint32_t hi = static_cast<uint32_t>(a < b ? b : a);
  return (static_cast<uint64_t>(lo) << 32) | hi;
}

inline uint64_t cell_key(int64_t i, int64_t j) {
  return (static_cast<uint64_t>(static_cast<uint32_t>(static_cast<int32_t>(i))) << 32) |
         static_cast<uint64_t>(static_cast<uint32_t>(static_cast<int32_t>(j)));
}

// Lazily materialized bisection forest over the infinite macro triangulation.
// Only macro cells actually touched by refinement or activation exist in
// memory; conformity of the leaf set is an invariant maintained by performing
// every interior edge split as a compatible pair bisection.
class MeshForest {
 public:
  struct Vertex {
    DyadicPoint p;  // exact, macro-grid units
    Vec2 xy;        // physical coordinates (p * h0)
  };

  struct FaceEntry {
    ElementId e0 = kNoElement;
    ElementId e1 = kNoElement;
    int count() const { return (e0 != kNoElement) + (e1 != kNoElement); }
    ElementId other(ElementId e) const { return e0 == e ? e1 : e0; }
  };

  explicit MeshForest(const MacroDomain& dom, int max_closure_depth = 4096)
      : dom_(dom), max_closure_depth_(max_closure_depth) {}

  const MacroDomain& domain() const { return dom_; }
  const std::vector<Vertex>& vertices() const { return verts_; }
  const std::vector<TaggedTriangle>& elements() const { return tris_; }
  const TaggedTriangle& elem(ElementId e) const { return tris_[static_cast<size_t>(e)]; }
  int64_t n_elements() const { return static_cast<int64_t>(tris_.size()); }
  int64_t n_leaves() const { return n_leaves_; }
  int64_t n_bisections() const { return n_bisections_; }

  // Materialize macro cell (i, j): 4 tagged triangles [corner, center, corner; 0]
  // around the cell center, the cell side being the refinement edge. Cells
  // outside the domain are recorded as empty. Returns ids (or empty).
  std::vector<ElementId> materialize_macro_cell(int64_t i, int64_t j,
                                                bool initially_active = false);
  bool cell_materialized(int64_t i, int64_t j) const;

  // Plain bisection of a leaf (no conformity handling). Used by the closure;
  // exposed for targeted tests.
  std::pair<ElementId, ElementId> bisect(ElementId e);

  // Conforming refinement: every marked leaf is bisected at least once; the
  // closure recursively bisects neighbors across refinement edges until they
  // form compatible pairs, materializing frontier macro cells on demand.
  // Returns the elements created by this call that are still leaves.
  std::vector<ElementId> refine_closure(const std::vector<ElementId>& marked);

  const FaceEntry& face(uint64_t key) const { return face_adj_.at(key); }
  const FaceEntry* find_face(uint64_t key) const {
    auto it = face_adj_.find(key);
    return it == face_adj_.end() ? nullptr : &it->second;
  }

  uint64_t refinement_edge_key(ElementId e) const {
    const TaggedTriangle& t = elem(e);
    return face_key(t.v[0], t.v[2]);
  }

  Vec2 vertex_xy(VertexId v) const { return verts_[static_cast<size_t>(v)].xy; }
  const DyadicPoint& vertex_dyadic(VertexId v) const { return verts_[static_cast<size_t>(v)].p; }

  std::array<Vec2, 3> coords(ElementId e) const {
    const TaggedTriangle& t = elem(e);
    return {vertex_xy(t.v[0]), vertex_xy(t.v[1]), vertex_xy(t.v[2])};
  }

  // geometric area from exact dyadic differences (double-exact at any depth)
  double area(ElementId e) const;
  double h_elem(ElementId e) const { return std::sqrt(area(e)); }  // h_T = |T|^(1/2)
  Vec2 barycenter(ElementId e) const;
  // exact sign of (y - x) at the barycenter; +1 above the diagonal
  int barycenter_side_of_diagonal(ElementId e) const;
  // exact: all vertices inside [0,1]^2 in macro units (only sensible for h0=1)
  bool inside_unit_cell(ElementId e) const;

  // level-0 ancestor and its macro cell
  ElementId root_of(ElementId e) const;
  struct RootInfo {
    int64_t ci = 0, cj = 0;
    int root_index = 0;  // 0..3: bottom, right, top, left
  };
  RootInfo root_info(ElementId root) const;
  ElementId root_element(int64_t i, int64_t j, int root_index) const;

  // full consistency audit (rebuilds adjacency independently); returns an
  // empty string when conforming, else a description of the first violation
  std::string validate_conforming() const;

  // plain-text export of all leaves: id v0x v0y v1x v1y v2x v2y tau level active
  void export_leaves(const std::string& path,
                     const std::vector<uint8_t>& active_flags) const;

 private:
  friend class ActiveSet;

  VertexId grid_vertex(int64_t i, int64_t j);
  VertexId add_vertex(const DyadicPoint& p);
  void face_add(uint64_t key, ElementId e);
  void face_remove(uint64_t key, ElementId e);
  void add_leaf_faces(ElementId e);
  void remove_leaf_faces(ElementId e);
  // neighbor across the refinement edge of e, materializing the macro cell on
  // the far side if needed; kNoElement when the edge lies on the boundary
  ElementId neighbor_across_refinement_edge(ElementId e);
  void bisect_conforming(ElementId e, int depth);

  MacroDomain dom_;
  int max_closure_depth_;
  std::vector<Vertex> verts_;
  std::vector<TaggedTriangle> tris_;
  std::unordered_map<uint64_t, VertexId> grid_verts_;  // cell corner (i,j) -> vertex
  std::unordered_map<uint64_t, VertexId> edge_mid_;    // face key -> midpoint vertex
  std::unordered_map<uint64_t, FaceEntry> face_adj_;   // face key -> adjacent leaves
  std::unordered_map<uint64_t, ElementId> cells_;      // cell key -> first root id, or kNoElement (outside)
  std::unordered_map<ElementId, uint64_t> root_cell_;  // root id -> cell key
  int64_t n_leaves_ = 0;
  int64_t n_bisections_ = 0;
};

// The finite active subtriangulation carrying degrees of freedom. Its union
// is the computational domain; the truncation boundary is the part of its
// boundary not on the physical domain boundary.
class ActiveSet {
 public:
  enum class FaceClass { Interior, DirichletBoundary, TruncationBoundary };

  // activation rule: a leaf is active iff it has level > 0 or is an
  // initially-active macro triangle ("activate all refined elements")
  static ActiveSet compute(const MeshForest& forest);

  const std::vector<ElementId>& ids() const { return ids_; }  // ascending
  int64_t size() const { return static_cast<int64_t>(ids_.size()); }
  bool is_active(ElementId e) const {
    return e >= 0 && static_cast<size_t>(e) < flags_.size() && flags_[static_cast<size_t>(e)];
  }
  const std::vector<uint8_t>& flags() const { return flags_; }

  FaceClass classify_face(const MeshForest& forest, uint64_t key) const;

 private:
  std::vector<ElementId> ids_;
  std::vector<uint8_t> flags_;
};

// Leaf of the finest common refinement of two forests grown from the same
// macro triangulation; path bit k = which child was taken at depth k.
struct OverlayLeaf {
  int64_t ci = 0, cj = 0;
  int root_index = 0;
  uint32_t depth = 0;
  uint64_t path = 0;
};

// Finest common refinement (overlay) of two forests over the same macro grid.
// Unmaterialized cells count as their 4 implicit macro triangles.
std::vector<OverlayLeaf> overlay(const MeshForest& a, const MeshForest& b);

// is the given overlay leaf an element of the forest's leaf set?
bool overlay_leaf_in(const MeshForest& f, const OverlayLeaf& leaf);

}  // namespace ufem
