#pragma once

#include <array>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "ufem/mesh.hpp"

namespace ufem {

inline constexpr int kMaxP = 4;
inline constexpr int kMaxNodesPerElem = (kMaxP + 1) * (kMaxP + 2) / 2;  // 15

// Degree-p Lagrange basis on the reference triangle, nodal on the uniform
// barycentric lattice. Node order: the 3 vertices, then p-1 nodes per edge
// (01, 12, 20, each walked from the edge's first vertex), then interior
// nodes. Shape functions are Silvester products, differentiated exactly.
class RefBasis {
 public:
  explicit RefBasis(int p);

  int p() const { return p_; }
  int n_nodes() const { return n_nodes_; }
  const std::array<int, 3>& node_lattice(int m) const { return lattice_[static_cast<size_t>(m)]; }
  std::array<double, 3> node_bary(int m) const {
    const auto& l = lattice_[static_cast<size_t>(m)];
    return {static_cast<double>(l[0]) / p_, static_cast<double>(l[1]) / p_,
            static_cast<double>(l[2]) / p_};
  }

  struct Eval {
    std::array<double, kMaxNodesPerElem> val;
    // derivatives w.r.t. the three barycentric coordinates (treated as free)
    std::array<std::array<double, 3>, kMaxNodesPerElem> dlam;
    // second derivatives, packed (00, 11, 22, 01, 02, 12)
    std::array<std::array<double, 6>, kMaxNodesPerElem> d2lam;
  };
  void eval(const std::array<double, 3>& lam, Eval& out) const;

 private:
  int p_;
  int n_nodes_;
  std::vector<std::array<int, 3>> lattice_;
};

const RefBasis& ref_basis(int p);

// Affine geometry of one element: physical vertex coordinates, signed area,
// and barycentric gradients ∇λ_c (constant vectors).
struct ElementGeometry {
  std::array<Vec2, 3> x;
  double signed_area = 0.0;
  double abs_area = 0.0;
  std::array<Vec2, 3> grad_lambda;
};
ElementGeometry element_geometry(const MeshForest& forest, ElementId e);

// Global Lagrange dof numbering for the zero-trace space on the active
// subtriangulation: nodes on truncation or physical-boundary faces (or on
// the physical boundary itself) carry no index.
struct DofMap {
  int p = 1;
  int64_t n_dofs = 0;
  int n_en = 3;  // nodes per element
  std::vector<ElementId> elems;                   // active elements, ascending
  std::vector<std::array<int32_t, kMaxNodesPerElem>> conn;  // -1 = constrained
  std::unordered_map<ElementId, int32_t> row_of;  // element id -> row in elems/conn

  bool has(ElementId e) const { return row_of.count(e) != 0; }
};

DofMap build_dofmap(const MeshForest& forest, const ActiveSet& active, int p);

// exact barycentric transfer between a bisected parent and its children:
// child 0 = [z0, m, z1], child 1 = [z2, m, z1]
std::array<double, 3> child_to_parent_bary(int which_child, const std::array<double, 3>& mu);
// in-place descent: picks the child containing the point (ties to child 0)
// and rewrites lam to that child's coordinates; returns the child index
int parent_to_child_bary(std::array<double, 3>& lam);

// Value of the discrete field `u` (coefficients over `dm`) at the point with
// barycentric coordinates `lam` inside element `e`, where `e` may be any
// descendant of (or equal to) an element of dm; outside the dm active region
// the field is zero by extension.
double eval_on_ancestors(const MeshForest& forest, const DofMap& dm, const std::vector<double>& u,
                         ElementId e, std::array<double, 3> lam);

// Nodal interpolation of a coarse-space field into a finer space on the same
// forest (the spaces are nested, so this is exact prolongation).
std::vector<double> prolong(const MeshForest& forest, const DofMap& coarse,
                            const std::vector<double>& u_coarse, const DofMap& fine);

// Sparse prolongation operator P (fine dofs x coarse dofs) as triplet rows:
// row i holds the coarse dofs and weights reproducing fine nodal value i.
struct Prolongation {
  int64_t n_fine = 0, n_coarse = 0;
  std::vector<std::vector<std::pair<int32_t, double>>> rows;

  std::vector<double> apply(const std::vector<double>& xc) const;
  std::vector<double> apply_transpose(const std::vector<double>& xf) const;
};
Prolongation build_prolongation(const MeshForest& forest, const DofMap& coarse,
                                const DofMap& fine);

}  // namespace ufem
