#include "ufem/reporting.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <stdexcept>

namespace ufem {

void write_history(const std::string& path, const std::vector<HistoryRow>& rows) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  bool has_err = !rows.empty() && rows.front().has_err;
  for (const auto& r : rows)
    if (r.has_err != has_err) {
      std::fclose(fp);
      throw std::logic_error("history rows disagree on the presence of the err column");
    }
  std::fprintf(fp, has_err ? "dof err est\n" : "dof est\n");
  for (const auto& r : rows) {
    if (has_err)
      std::fprintf(fp, "%lld %.17g %.17g\n", static_cast<long long>(r.n_dofs), r.err, r.eta);
    else
      std::fprintf(fp, "%lld %.17g\n", static_cast<long long>(r.n_dofs), r.eta);
  }
  std::fclose(fp);
}

std::vector<HistoryRow> read_history(const std::string& path) {
  FILE* fp = std::fopen(path.c_str(), "r");
  if (!fp) throw std::runtime_error("cannot open " + path);
  char line[512];
  if (!std::fgets(line, sizeof line, fp)) {
    std::fclose(fp);
    throw std::runtime_error(path + ": empty history");
  }
  bool has_err;
  if (std::strncmp(line, "dof err est", 11) == 0)
    has_err = true;
  else if (std::strncmp(line, "dof est", 7) == 0)
    has_err = false;
  else {
    std::fclose(fp);
    throw std::runtime_error(path + ": unrecognized history header");
  }

  std::vector<HistoryRow> rows;
  while (std::fgets(line, sizeof line, fp)) {
    if (line[0] == '\n' || line[0] == '#') continue;
    HistoryRow r;
    long long dof;
    int ok = has_err ? std::sscanf(line, "%lld %lg %lg", &dof, &r.err, &r.eta)
                     : std::sscanf(line, "%lld %lg", &dof, &r.eta);
    if (ok != (has_err ? 3 : 2)) {
      std::fclose(fp);
      throw std::runtime_error(path + ": malformed history row");
    }
    r.iter = static_cast<int>(rows.size());
    r.n_dofs = dof;
    r.has_err = has_err;
    rows.push_back(r);
  }
  std::fclose(fp);
  return rows;
}

RateFit fit_rate(const std::vector<HistoryRow>& rows, double window, bool use_est) {
  if (!(window > 0.0 && window <= 1.0)) throw std::invalid_argument("window must be in (0, 1]");
  size_t n = rows.size();
  size_t k = static_cast<size_t>(std::ceil(window * static_cast<double>(n)));
  if (k < 5) throw std::invalid_argument("rate fit needs at least 5 rows in the window");
  size_t from = n - k;

  double sx = 0.0, sy = 0.0;
  std::vector<double> xs(k), ys(k);
  for (size_t i = 0; i < k; ++i) {
    const HistoryRow& r = rows[from + i];
    double y = use_est ? r.eta : r.err;
    if (!use_est && !r.has_err) throw std::invalid_argument("err column absent; fit est instead");
    if (!(r.n_dofs > 0) || !(y > 0.0))
      throw std::invalid_argument("rate fit needs positive dof and value columns");
    xs[i] = std::log(static_cast<double>(r.n_dofs));
    ys[i] = std::log(y);
    sx += xs[i];
    sy += ys[i];
  }
  double mx = sx / k, my = sy / k;
  double sxx = 0.0, sxy = 0.0;
  for (size_t i = 0; i < k; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("rate fit needs varying dof counts");

  RateFit fit;
  fit.n = static_cast<int>(k);
  fit.slope = sxy / sxx;
  double rss = 0.0;
  for (size_t i = 0; i < k; ++i) {
    double resid = ys[i] - my - fit.slope * (xs[i] - mx);
    rss += resid * resid;
  }
  fit.stderr_slope = k > 2 ? std::sqrt(rss / (k - 2) / sxx) : 0.0;
  return fit;
}

Effectivity effectivity(const std::vector<HistoryRow>& rows) {
  Effectivity out;
  out.ratio.reserve(rows.size());
  for (const auto& r : rows) {
    if (!r.has_err) throw std::invalid_argument("effectivity needs the err column");
    out.ratio.push_back(r.eta / r.err);
  }
  if (out.ratio.empty()) return out;
  size_t w = out.ratio.size() < 20 ? out.ratio.size() : 20;
  size_t from = out.ratio.size() - w;
  double mean = 0.0;
  for (size_t i = from; i < out.ratio.size(); ++i) mean += out.ratio[i];
  mean /= w;
  double var = 0.0;
  for (size_t i = from; i < out.ratio.size(); ++i)
    var += (out.ratio[i] - mean) * (out.ratio[i] - mean);
  var = w > 1 ? var / (w - 1) : 0.0;
  out.trailing_mean = mean;
  out.trailing_cv = mean != 0.0 ? std::sqrt(var) / mean : 0.0;
  return out;
}

void write_plot_script(const std::string& path, const std::string& history_path, bool has_err) {
  FILE* fp = std::fopen(path.c_str(), "w");
  if (!fp) throw std::runtime_error("cannot open " + path + " for writing");
  std::fprintf(fp,
               "set logscale xy\n"
               "set xlabel 'degrees of freedom'\n"
               "set ylabel 'energy norm'\n"
               "set key top right\n"
               "set grid\n");
  if (has_err)
    std::fprintf(fp,
                 "plot '%s' using 1:2 with linespoints pt 7 ps 0.5 title 'error', \\\n"
                 "     '%s' using 1:3 with linespoints pt 5 ps 0.5 title 'estimator'\n",
                 history_path.c_str(), history_path.c_str());
  else
    std::fprintf(fp, "plot '%s' using 1:2 with linespoints pt 5 ps 0.5 title 'estimator'\n",
                 history_path.c_str());
  std::fclose(fp);
}

}  // namespace ufem
