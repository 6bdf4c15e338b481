#pragma once

#include <string>
#include <vector>

#include "ufem/adaptive.hpp"

namespace ufem {

// History file: whitespace-separated, header "dof err est" (or "dof est"
// when the problem has no exact solution), one row per iteration, values
// printed with %.17g so reading a file back reproduces the doubles exactly.
void write_history(const std::string& path, const std::vector<HistoryRow>& rows);

// Reads rows back; iter is the row index, n_dofs/eta/err/has_err are
// populated, the remaining diagnostics fields are zero.
std::vector<HistoryRow> read_history(const std::string& path);

struct RateFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  int n = 0;  // rows in the window
};

// Ordinary least-squares slope of log(y) vs log(dof) over the trailing
// `window` fraction of the rows, y = err (use_est = false, requires the err
// column) or est. At least 5 rows must land in the window.
RateFit fit_rate(const std::vector<HistoryRow>& rows, double window, bool use_est);

struct Effectivity {
  std::vector<double> ratio;    // eta / err, one per row
  double trailing_mean = 0.0;   // over the last min(20, n) rows
  double trailing_cv = 0.0;     // sample std / mean over the same rows
};

Effectivity effectivity(const std::vector<HistoryRow>& rows);

// gnuplot script for the standard log-log convergence picture
void write_plot_script(const std::string& path, const std::string& history_path, bool has_err);

}  // namespace ufem
