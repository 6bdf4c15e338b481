#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "ufem/assembly.hpp"

namespace ufem {

// Residual refinement indicator per active element T:
//   η(T)² = h_T² ‖f − κ²u + Δu‖²_T + h_T ‖[∂ₙu]‖²_{∂T∩Ω},  h_T = |T|^{1/2}.
// Interior faces carry the two-sided normal-derivative jump and contribute
// fully to BOTH adjacent elements; truncation-boundary faces carry the full
// one-sided normal derivative (the discrete function is zero beyond); faces
// on the physical boundary contribute nothing.
struct IndicatorRow {
  double eta_sq = 0.0;
  double vol_sq = 0.0;
  double jump_sq = 0.0;
  double osc_sq = 0.0;
};

struct IndicatorField {
  std::vector<IndicatorRow> rows;  // aligned with DofMap::elems
  double total_sq = 0.0;
};

// Squared L² norms of the normal-derivative jumps, one entry per face of an
// active element (physical-boundary faces excluded). Gauss rule with p+1
// points per face.
std::unordered_map<uint64_t, double> face_jump_norms(const MeshForest& forest,
                                                     const ActiveSet& active, const DofMap& dm,
                                                     const std::vector<double>& u);

// osc_q < 0 selects the default projection degree max(p-2, 0); vol_degree 0
// selects the default volume-quadrature degree min(2p+6, 12).
IndicatorField compute_indicators(const MeshForest& forest, const ActiveSet& active,
                                  const DofMap& dm, const CoefficientField& coeffs,
                                  const std::vector<double>& u, int osc_q = -1,
                                  int vol_degree = 0);

double total_estimator(const IndicatorField& f);
// subset by element id; every element must be active in dm
double total_estimator(const IndicatorField& f, const DofMap& dm,
                       const std::vector<ElementId>& subset);

// h_T² ‖(1 − Π_q) g‖²_T with Π_q the L²(T)-projection onto polynomials of
// total degree q, both computed in the quadrature inner product
double oscillation(const MeshForest& forest, ElementId e,
                   const std::function<double(Vec2)>& g, int q, const TriQuadRule& rule);

// plain-text dump: element_id eta_sq volume_sq jump_sq osc_sq
void dump_indicators(const std::string& path, const DofMap& dm, const IndicatorField& f);

}  // namespace ufem
