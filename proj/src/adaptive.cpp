#include "ufem/adaptive.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace ufem {

std::vector<ElementId> dorfler_mark(const DofMap& dm, const IndicatorField& ind, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("theta must be in (0, 1]");
  std::vector<ElementId> marked;
  if (ind.total_sq <= 0.0) return marked;

  std::vector<std::pair<double, ElementId>> order;
  order.reserve(dm.elems.size());
  for (size_t r = 0; r < dm.elems.size(); ++r)
    order.emplace_back(-ind.rows[r].eta_sq, dm.elems[r]);
  std::sort(order.begin(), order.end());

  double need = theta * ind.total_sq, sum = 0.0;
  for (const auto& [neg, id] : order) {
    if (neg >= 0.0) break;  // only positive indicators are ever marked
    marked.push_back(id);
    sum -= neg;
    if (sum >= need) break;
  }
  return marked;
}

std::vector<HistoryRow> run_adaptive(const Problem& prob, const AdaptiveConfig& cfg,
                                     const IterationHook& hook) {
  if (!(cfg.theta > 0.0 && cfg.theta <= 1.0))
    throw std::invalid_argument("theta must be in (0, 1]");
  if (cfg.p < 1 || cfg.p > kMaxP) throw std::invalid_argument("p must be in 1..4");
  if (cfg.max_iterations < 0) throw std::invalid_argument("max_iterations must be >= 0");

  MeshForest forest(prob.domain);
  for (const auto& c : prob.initial_cells) forest.materialize_macro_cell(c[0], c[1], true);

  std::vector<HistoryRow> rows;
  for (int l = 0;; ++l) {
    auto t0 = std::chrono::steady_clock::now();
    ActiveSet active = ActiveSet::compute(forest);
    DofMap dm = build_dofmap(forest, active, cfg.p);
    SparseSystem sys = assemble(forest, dm, prob.coeffs, cfg.quad_degree);
    SolveResult sr = solve_spd(sys.A, sys.b, cfg.solver);
    if (!sr.converged) {
      std::fprintf(stderr,
                   "iteration %d: solver stalled at relative residual %.3e after %ld steps "
                   "(n = %lld)\n",
                   l, sr.rel_residual, static_cast<long>(sr.iterations),
                   static_cast<long long>(dm.n_dofs));
      throw std::runtime_error("linear solver did not converge");
    }
    IndicatorField ind = compute_indicators(forest, active, dm, prob.coeffs, sr.x);
    double eta = total_estimator(ind);
    std::vector<ElementId> marked = dorfler_mark(dm, ind, cfg.theta);

    HistoryRow row;
    row.iter = l;
    row.n_dofs = dm.n_dofs;
    row.eta = eta;
    if (prob.has_exact && cfg.compute_error) {
      row.err = h1kappa_error(forest, dm, sr.x, prob).total;
      row.has_err = true;
    }
    row.n_elems = static_cast<int64_t>(dm.elems.size());
    row.n_marked = static_cast<int64_t>(marked.size());
    row.cg_iters = sr.iterations;
    row.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rows.push_back(row);

    if (hook) hook(IterationState{l, forest, active, dm, sys, sr, ind, marked});

    if (l >= cfg.max_iterations) break;
    if (cfg.dof_cap > 0 && dm.n_dofs >= cfg.dof_cap) break;
    if (eta <= cfg.min_eta) break;
    forest.refine_closure(marked);
  }
  return rows;
}

}  // namespace ufem
