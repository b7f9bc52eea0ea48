#include "hepi/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace hepi {

TargetSeries seven_day_average(const Date& start, std::span<const real> daily) {
  if (daily.empty()) throw Error("seven_day_average: empty series");
  TargetSeries t{start, std::vector<real>(daily.size())};
  real window = 0;
  for (std::size_t i = 0; i < daily.size(); ++i) {
    window += daily[i];
    if (i >= 7) window -= daily[i - 7];
    t.values[i] = window / static_cast<real>(std::min<std::size_t>(i + 1, 7));
  }
  return t;
}

real mean_absolute_error(std::span<const real> simulated, const TargetSeries& target) {
  if (simulated.size() != target.values.size())
    throw Error("mean_absolute_error: " + std::to_string(simulated.size()) + " simulated days vs " +
                std::to_string(target.values.size()) + " target days");
  if (simulated.empty()) throw Error("mean_absolute_error: empty series");
  real s = 0;
  for (std::size_t i = 0; i < simulated.size(); ++i) s += std::abs(simulated[i] - target.values[i]);
  return s / static_cast<real>(simulated.size());
}

TargetSeries parse_target_csv(std::string_view text, const std::string& source) {
  TargetSeries t;
  std::size_t number = 0, pos = 0;
  bool header = false;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    if (!header) {
      if (line != "date,symptomatic_7day_avg") throw ParseError(source, number, "expected header 'date,symptomatic_7day_avg'");
      header = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 2) throw ParseError(source, number, "expected 2 fields");
    Date d;
    try {
      d = Date::parse(f[0]);
    } catch (const Error& e) {
      throw ParseError(source, number, e.what());
    }
    if (t.values.empty()) t.start = d;
    else if (d != t.start.plus_days(static_cast<long>(t.values.size())))
      throw ParseError(source, number, "dates must be contiguous");
    const real v = parse_real(f[1], source, number);
    if (!(v >= 0)) throw ParseError(source, number, "values must be non-negative");
    t.values.push_back(v);
  }
  if (t.values.empty()) throw ParseError(source, number, "no data rows");
  return t;
}

std::string target_to_csv(const TargetSeries& t) {
  std::ostringstream os;
  os << "date,symptomatic_7day_avg\n";
  for (std::size_t i = 0; i < t.values.size(); ++i)
    os << t.start.plus_days(static_cast<long>(i)).to_string() << ',' << format_real(t.values[i]) << '\n';
  return os.str();
}

GridSearchResult grid_search(std::span<const real> interval1, std::span<const real> interval2, int n_runs,
                             const ScenarioFn& scenario, const TargetSeries& target,
                             std::span<const std::uint64_t> seeds) {
  if (interval1.empty() || interval2.empty()) throw Error("grid_search: empty candidate list");
  if (n_runs < 1) throw Error("grid_search: need at least one run per cell");
  if (seeds.size() < static_cast<std::size_t>(n_runs)) throw Error("grid_search: fewer seeds than runs");
  GridSearchResult r;
  r.interval1.assign(interval1.begin(), interval1.end());
  r.interval2.assign(interval2.begin(), interval2.end());
  r.mean_error.assign(interval1.size(), std::vector<real>(interval2.size(), 0));
  r.best_error = std::numeric_limits<real>::infinity();
  for (std::size_t i = 0; i < interval1.size(); ++i)
    for (std::size_t j = 0; j < interval2.size(); ++j) {
      real acc = 0;
      for (int k = 0; k < n_runs; ++k)
        acc += mean_absolute_error(scenario(interval1[i], interval2[j], seeds[static_cast<std::size_t>(k)]), target);
      const real e = acc / n_runs;
      r.mean_error[i][j] = e;
      const bool better = e < r.best_error ||
                          (e == r.best_error && std::pair{interval1[i], interval2[j]} < std::pair{r.best_1, r.best_2});
      if (better) {
        r.best_error = e;
        r.best_1 = interval1[i];
        r.best_2 = interval2[j];
      }
    }
  return r;
}

std::string error_table_csv(const GridSearchResult& r) {
  std::ostringstream os;
  os << "beta_1";
  for (real b : r.interval2) os << ',' << format_real(b);
  os << '\n';
  for (std::size_t i = 0; i < r.interval1.size(); ++i) {
    os << format_real(r.interval1[i]);
    for (real e : r.mean_error[i]) os << ',' << format_real(e);
    os << '\n';
  }
  return os.str();
}

RunCountResult runs_to_threshold(std::span<const real> metrics, real threshold_pct) {
  if (metrics.size() < 2) throw Error("runs_to_threshold: need at least two runs");
  if (!(threshold_pct > 0)) throw Error("runs_to_threshold: threshold must be positive");
  RunCountResult r;
  real acc = 0;
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    acc += metrics[k];
    r.cumulative_means.push_back(acc / static_cast<real>(k + 1));
  }
  const real thr = threshold_pct / 100.0;
  const std::size_t n = metrics.size();
  // 1-based K; d_k compares c_k and c_{k+1}
  std::size_t K = 1;
  for (std::size_t k = 1; k < n; ++k) {
    const real c = r.cumulative_means[k - 1], c_next = r.cumulative_means[k];
    const real d = c != 0 ? std::abs(c_next - c) / std::abs(c) : (c_next == c ? 0 : std::numeric_limits<real>::infinity());
    if (!(d < thr)) K = k + 1;
  }
  r.runs = static_cast<int>(K);
  r.converged = K < n;
  return r;
}

std::vector<real> read_metric_column(std::string_view csv_text, const std::string& column, const std::string& source) {
  std::vector<real> out;
  std::size_t number = 0, pos = 0;
  int col = -1;
  while (pos < csv_text.size()) {
    auto end = csv_text.find('\n', pos);
    if (end == std::string_view::npos) end = csv_text.size();
    ++number;
    const auto line = trim(csv_text.substr(pos, end - pos));
    pos = end + 1;
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (col < 0) {
      for (std::size_t i = 0; i < f.size(); ++i)
        if (trim(f[i]) == column) col = static_cast<int>(i);
      if (col < 0) throw ParseError(source, number, "no column named '" + column + "'");
      continue;
    }
    if (static_cast<std::size_t>(col) >= f.size()) throw ParseError(source, number, "missing column '" + column + "'");
    out.push_back(parse_real(f[static_cast<std::size_t>(col)], source, number));
  }
  if (col < 0) throw ParseError(source, 1, "empty metrics file");
  return out;
}

}  // namespace hepi
