#ifndef HEPI_SCENARIO_HPP
#define HEPI_SCENARIO_HPP

#include "hepi/abm.hpp"
#include "hepi/calibration.hpp"
#include "hepi/coupling.hpp"
#include "hepi/landscape.hpp"
#include "hepi/synth.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hepi {

enum class Mode { FullAbm, Hybrid };
enum class InitialPreset { Calibrated, AllPdeExposed, AllAbmExposed };

Mode parse_mode(std::string_view s);
std::string_view to_string(Mode m);
InitialPreset parse_initial_preset(std::string_view s);

/// Input files; relative paths are resolved against `base_dir`.
struct ScenarioPaths {
  std::filesystem::path base_dir;
  std::filesystem::path events_weekday, events_saturday, events_sunday;
  std::filesystem::path facilities;
  std::filesystem::path activity;
  std::filesystem::path target;     // optional
  std::filesystem::path mesh;       // Triangle base path without extension
  std::filesystem::path occupancy;  // optional, derived from the plans if empty
  std::filesystem::path landscape;  // optional raster CSV of V
};

struct ScenarioConfig {
  std::string name = "scenario";
  Mode mode = Mode::Hybrid;
  Date start = Date::parse("2020-03-02");
  Date end = Date::parse("2020-04-28");  // inclusive
  std::optional<Date> school_closure;
  Date interval_split = Date::parse("2020-03-16");
  int steps_per_day = 48;
  RateSet rates;           // progression, agent-based beta_const, diffusion
  BetaSchedule pde_beta;   // continuum beta_const
  std::string population_label = "25%";
  std::uint64_t seed = 1;
  int runs = 1;
  InitialPreset preset = InitialPreset::Calibrated;
  StateCounts abm_initial{};  // agents per state before scaling; S ignored
  StateCounts pde_initial{};  // persons per state; S is the remainder
  real abm_initial_scale = 1;
  bool outflow = true;
  bool remember_reentry_state = false;
  bool solve_pde = true;
  bool use_landscape = true;
  real landscape_cell_size = 500;
  ReactionIntegrator integrator = ReactionIntegrator::RungeKutta4;
  DriftForm drift = DriftForm::Conservative;
  ScenarioPaths paths;
  std::optional<SynthSpec> synth;  // generate inputs instead of reading files

  int num_days() const { return static_cast<int>(end - start) + 1; }
  void validate() const;
};

/// Constants of the 25% sample runs: published progression rates, D = 1e-6,
/// half-hour steps, 2020-03-02 to 2020-04-28, schools closed and beta switched
/// on 2020-03-16, agent initial counts scaled by 20.
ScenarioConfig berlin_25pct_preset();

/// Reads a JSON scenario. `"preset": "berlin-25pct"` starts from that profile;
/// every other key overrides it.
ScenarioConfig parse_scenario_config(std::string_view json_text, const std::filesystem::path& base_dir);
ScenarioConfig load_scenario_config(const std::filesystem::path& file);
SynthSpec parse_synth_spec(std::string_view json_text);

/// Parsed and derived inputs shared by all runs of a scenario.
struct ScenarioData {
  WeekPlans week;
  std::vector<Facility> facilities;  // room sizes estimated from the events
  ActivitySchedule activity;
  std::optional<TargetSeries> target;
  std::optional<TriMesh> mesh;
  NodalVectors grad_v;
  NodalField initial_density;
  OccupancySchedule occupancy;
};

ScenarioData load_scenario_data(const ScenarioConfig& config);

struct RunOutput {
  std::uint64_t seed = 0;
  std::vector<real> symptomatic_total, symptomatic_abm, symptomatic_pde;  // per day
  std::vector<StateCounts> abm_counts, pde_masses;                         // per day
  std::vector<ExchangeRecord> exchange;
  real duration_s = 0;
  real max_population_drift = 0;
  real population = 0;
  int initially_absorbed = 0;
  std::optional<real> mae;
};

RunOutput run_scenario(const ScenarioConfig& config, const ScenarioData& data, std::uint64_t seed);

struct BatchOutput {
  Date start;
  std::vector<RunOutput> runs;
  std::vector<real> mean_total, std_total, mean_abm, std_abm, mean_pde, std_pde;
};

/// Runs seeds seed, seed + 1, ...; `threads` > 1 runs them concurrently.
BatchOutput run_batch(const ScenarioConfig& config, const ScenarioData& data, int n_runs, int threads = 1);

/// symptomatic_daily.csv, symptomatic_summary.csv, compartment_masses.csv,
/// exchange_log.csv, run_metrics.csv and durations.csv.
void emit_outputs(const BatchOutput& batch, const std::filesystem::path& out_dir);

/// Returns a copy with the calibration constants of the two intervals set on
/// the continuum (hybrid) or the agents (full agent-based mode).
ScenarioConfig with_betas(const ScenarioConfig& config, real beta_1, real beta_2);

}  // namespace hepi

#endif  // HEPI_SCENARIO_HPP
