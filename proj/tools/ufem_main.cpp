#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "ufem/adaptive.hpp"
#include "ufem/reporting.hpp"

namespace {

struct ExperimentOpts {
  std::string problem = "smoothed-fundamental";
  int p = 1;
  double kappa_sq = 1.0;
  double h0 = 1.0;
  double theta = 0.2;
  int iters = 100;
  long long dof_cap = 200000;
  std::string out;
};

void add_experiment_options(CLI::App* cmd, ExperimentOpts& o) {
  cmd->add_option("--problem", o.problem, "smoothed-fundamental | lshape-singular")
      ->capture_default_str();
  cmd->add_option("--p", o.p, "polynomial degree")->check(CLI::Range(1, 4))
      ->capture_default_str();
  cmd->add_option("--kappa-sq", o.kappa_sq, "reaction coefficient (constant problems)")
      ->capture_default_str();
  cmd->add_option("--h0", o.h0, "macro cell size")->capture_default_str();
  cmd->add_option("--theta", o.theta, "marking parameter in (0,1]")->capture_default_str();
  cmd->add_option("--iters", o.iters, "adaptive iterations")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--dof-cap", o.dof_cap, "stop once dofs reach this (0 = off)")
      ->capture_default_str();
  cmd->set_config("--config", "", "plain key=value file; command-line flags win");
}

ufem::AdaptiveConfig make_config(const ExperimentOpts& o) {
  ufem::AdaptiveConfig cfg;
  cfg.theta = o.theta;
  cfg.p = o.p;
  cfg.max_iterations = o.iters;
  cfg.dof_cap = o.dof_cap;
  return cfg;
}

int cmd_run(const ExperimentOpts& o) {
  ufem::Problem prob = ufem::make_problem(o.problem, o.kappa_sq, o.h0);
  ufem::AdaptiveConfig cfg = make_config(o);
  auto rows = ufem::run_adaptive(prob, cfg, [](const ufem::IterationState& st) {
    std::fflush(stdout);
    (void)st;
  });
  for (const auto& r : rows) {
    if (r.has_err)
      std::printf("iter=%3d dofs=%8lld eta=%.6e err=%.6e elems=%lld marked=%lld cg=%lld t=%.2fs\n",
                  r.iter, static_cast<long long>(r.n_dofs), r.eta, r.err,
                  static_cast<long long>(r.n_elems), static_cast<long long>(r.n_marked),
                  static_cast<long long>(r.cg_iters), r.wall_seconds);
    else
      std::printf("iter=%3d dofs=%8lld eta=%.6e elems=%lld marked=%lld cg=%lld t=%.2fs\n",
                  r.iter, static_cast<long long>(r.n_dofs), r.eta,
                  static_cast<long long>(r.n_elems), static_cast<long long>(r.n_marked),
                  static_cast<long long>(r.cg_iters), r.wall_seconds);
  }
  std::string out = o.out.empty() ? "history.txt" : o.out;
  ufem::write_history(out, rows);
  std::printf("wrote %zu rows to %s\n", rows.size(), out.c_str());
  return 0;
}

int cmd_mesh_dump(const ExperimentOpts& o, int dump_iter) {
  ufem::Problem prob = ufem::make_problem(o.problem, o.kappa_sq, o.h0);
  ufem::AdaptiveConfig cfg = make_config(o);
  cfg.max_iterations = dump_iter;
  cfg.compute_error = false;
  std::string out = o.out.empty() ? "mesh.txt" : o.out;
  bool dumped = false;
  ufem::run_adaptive(prob, cfg, [&](const ufem::IterationState& st) {
    bool last = st.iter >= cfg.max_iterations ||
                (cfg.dof_cap > 0 && st.dm.n_dofs >= cfg.dof_cap) ||
                st.indicators.total_sq == 0.0;
    if (last && !dumped) {
      st.forest.export_leaves(out, st.active.flags());
      std::printf("iteration %d: %lld leaves (%zu active) -> %s\n", st.iter,
                  static_cast<long long>(st.forest.n_leaves()), st.dm.elems.size(), out.c_str());
      dumped = true;
    }
  });
  return dumped ? 0 : 1;
}

int cmd_fit(const std::string& in, double window) {
  auto rows = ufem::read_history(in);
  bool has_err = !rows.empty() && rows.front().has_err;
  if (has_err) {
    ufem::RateFit f = ufem::fit_rate(rows, window, false);
    std::printf("err: slope=%.6f stderr=%.6f n=%d\n", f.slope, f.stderr_slope, f.n);
  }
  ufem::RateFit f = ufem::fit_rate(rows, window, true);
  std::printf("est: slope=%.6f stderr=%.6f n=%d\n", f.slope, f.stderr_slope, f.n);
  return 0;
}

int cmd_plot(const std::string& in, const std::string& out) {
  auto rows = ufem::read_history(in);
  bool has_err = !rows.empty() && rows.front().has_err;
  ufem::write_plot_script(out, in, has_err);
  std::printf("wrote %s (gnuplot %s)\n", out.c_str(), in.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adaptive FEM for kappa^2 u - div grad u = f on unbounded domains"};
  app.require_subcommand(1);

  ExperimentOpts run_opts;
  CLI::App* run = app.add_subcommand("run", "run an adaptive experiment, write the history");
  add_experiment_options(run, run_opts);
  run->add_option("--out", run_opts.out, "history output path (default history.txt)");

  ExperimentOpts dump_opts;
  int dump_iter = 0;
  CLI::App* dump = app.add_subcommand("mesh-dump", "run to an iteration and export the mesh");
  add_experiment_options(dump, dump_opts);
  dump->add_option("--iter", dump_iter, "iteration to dump")->required()
      ->check(CLI::NonNegativeNumber);
  dump->add_option("--out", dump_opts.out, "mesh output path (default mesh.txt)");

  std::string fit_in, plot_in, plot_out = "plot.gp";
  double fit_window = 0.5;
  CLI::App* fit = app.add_subcommand("fit", "least-squares convergence rate from a history");
  fit->add_option("--in", fit_in, "history file")->required();
  fit->add_option("--window", fit_window, "trailing fraction of rows")->capture_default_str();

  CLI::App* plot = app.add_subcommand("plot", "emit a gnuplot script for a history");
  plot->add_option("--in", plot_in, "history file")->required();
  plot->add_option("--out", plot_out, "script path")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(run_opts);
    if (dump->parsed()) return cmd_mesh_dump(dump_opts, dump_iter);
    if (fit->parsed()) return cmd_fit(fit_in, fit_window);
    if (plot->parsed()) return cmd_plot(plot_in, plot_out);
  } catch (const std::exception& ex) {
    std::fprintf(stderr, "error: %s\n", ex.what());
    return 1;
  }
  return 0;
}
