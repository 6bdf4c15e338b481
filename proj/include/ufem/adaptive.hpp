#pragma once

#include <functional>
#include <limits>
#include <vector>

#include "ufem/estimator.hpp"
#include "ufem/problems.hpp"
#include "ufem/solver.hpp"

namespace ufem {

struct AdaptiveConfig {
  double theta = 0.2;       // Dörfler parameter in (0, 1]
  int p = 1;                // polynomial degree
  int max_iterations = 100;
  int64_t dof_cap = 200000;  // stop once n_dofs >= cap (0 = disabled)
  double min_eta = 0.0;      // stop once eta <= min_eta (0 = stop only at eta == 0)
  int quad_degree = 0;       // 0 = assembly default max(2p+2, 8)
  SolverConfig solver;
  bool compute_error = true;  // exact error per row when the problem has one
};

struct HistoryRow {
  int iter = 0;
  int64_t n_dofs = 0;
  double eta = 0.0;
  double err = std::numeric_limits<double>::quiet_NaN();
  bool has_err = false;
  int64_t n_elems = 0;  // active elements
  int64_t n_marked = 0;
  int64_t cg_iters = 0;
  double wall_seconds = 0.0;
};

// Minimal marked set: elements sorted by indicator descending (ties by
// ascending id); the shortest prefix with sum >= theta * eta^2. Zero total
// yields the empty set; zero-indicator elements are never marked.
std::vector<ElementId> dorfler_mark(const DofMap& dm, const IndicatorField& ind, double theta);

// Everything the loop knows at the end of one iteration, before refining.
struct IterationState {
  int iter;
  const MeshForest& forest;
  const ActiveSet& active;
  const DofMap& dm;
  const SparseSystem& sys;
  const SolveResult& solve;
  const IndicatorField& indicators;
  const std::vector<ElementId>& marked;
};
using IterationHook = std::function<void(const IterationState&)>;

// Solve–estimate–mark–refine on a fresh forest seeded with the problem's
// initial active cells. One history row per solve; the final row's marked
// set is computed but not refined. Fully deterministic.
std::vector<HistoryRow> run_adaptive(const Problem& prob, const AdaptiveConfig& cfg,
                                     const IterationHook& hook = {});

}  // namespace ufem
