#ifndef HEPI_CALIBRATION_HPP
#define HEPI_CALIBRATION_HPP

#include "hepi/common.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace hepi {

/// Daily expected symptomatic counts starting at `start`.
struct TargetSeries {
  Date start;
  std::vector<real> values;

  Date end() const { return start.plus_days(static_cast<long>(values.size()) - 1); }
};

/// Trailing seven-day mean (the day itself and the six before); the first six
/// days average over the days available.
TargetSeries seven_day_average(const Date& start, std::span<const real> daily);

real mean_absolute_error(std::span<const real> simulated, const TargetSeries& target);

// CSV: `date,symptomatic_7day_avg` with contiguous dates.
TargetSeries parse_target_csv(std::string_view text, const std::string& source = "target");
std::string target_to_csv(const TargetSeries& t);

/// Daily symptomatic totals of one run with calibration constants
/// (beta_1, beta_2) for the two intervals.
using ScenarioFn = std::function<std::vector<real>(real beta_1, real beta_2, std::uint64_t seed)>;

struct GridSearchResult {
  std::vector<real> interval1;
  std::vector<real> interval2;
  /// mean MAE, rows = interval1 candidates, columns = interval2 candidates
  std::vector<std::vector<real>> mean_error;
  real best_1 = 0;
  real best_2 = 0;
  real best_error = 0;
};

/// Runs every candidate pair with seeds[0..n_runs) and keeps the pair of least
/// mean MAE; ties go to the lexicographically smaller pair.
GridSearchResult grid_search(std::span<const real> interval1, std::span<const real> interval2, int n_runs,
                             const ScenarioFn& scenario, const TargetSeries& target,
                             std::span<const std::uint64_t> seeds);

/// Rows per interval-1 candidate: `beta_1,<one column per interval-2 candidate>`.
std::string error_table_csv(const GridSearchResult& r);

struct RunCountResult {
  int runs = 0;
  bool converged = false;
  std::vector<real> cumulative_means;
};

/// Smallest K such that the relative change of consecutive cumulative means
/// |c_{k+1} - c_k| / c_k stays below threshold_pct / 100 for every k >= K.
/// When even the last change is too large the sequence length is returned
/// with converged = false.
RunCountResult runs_to_threshold(std::span<const real> metrics, real threshold_pct);

/// One value per row from a `run,...` CSV column named `column`.
std::vector<real> read_metric_column(std::string_view csv_text, const std::string& column,
                                     const std::string& source = "metrics");

}  // namespace hepi

#endif  // HEPI_CALIBRATION_HPP
