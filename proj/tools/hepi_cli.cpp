#include "hepi/calibration.hpp"
#include "hepi/scenario.hpp"
#include "hepi/synth.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>

namespace {

using namespace hepi;

int simulate(const std::string& config_path, const std::string& mode, int runs, std::optional<std::uint64_t> seed,
             const std::string& out, int threads) {
  ScenarioConfig c = load_scenario_config(config_path);
  if (!mode.empty()) c.mode = parse_mode(mode);
  if (runs > 0) c.runs = runs;
  if (seed) c.seed = *seed;
  c.validate();
  const ScenarioData data = load_scenario_data(c);
  const BatchOutput b = run_batch(c, data, c.runs, threads);
  emit_outputs(b, out);
  for (const auto& r : b.runs) {
    std::cout << "run seed=" << r.seed << " duration_s=" << format_real(r.duration_s);
    if (r.mae) std::cout << " mae=" << format_real(*r.mae);
    std::cout << " population_drift=" << format_real(r.max_population_drift) << '\n';
  }
  std::cout << "wrote " << out << '\n';
  return 0;
}

int calibrate(const std::string& config_path, const std::string& grid_path, const std::string& out) {
  const ScenarioConfig c = load_scenario_config(config_path);
  const auto g = nlohmann::json::parse(read_text_file(grid_path));
  const auto i1 = g.at("interval1").get<std::vector<real>>();
  const auto i2 = g.at("interval2").get<std::vector<real>>();
  const int runs = g.value("runs", 20);
  const auto seed0 = g.value<std::uint64_t>("seed", c.seed);
  ScenarioData data = load_scenario_data(c);
  if (g.contains("target")) {
    const std::filesystem::path tp = g["target"].get<std::string>();
    const auto full = tp.is_absolute() ? tp : std::filesystem::path(grid_path).parent_path() / tp;
    data.target = parse_target_csv(read_text_file(full), full.string());
  }
  if (!data.target) throw Error("calibrate: no target series (set data.target in the config or target in the grid)");
  std::vector<std::uint64_t> seeds;
  for (int k = 0; k < runs; ++k) seeds.push_back(seed0 + static_cast<std::uint64_t>(k));
  const ScenarioFn fn = [&](real b1, real b2, std::uint64_t s) {
    return run_scenario(with_betas(c, b1, b2), data, s).symptomatic_total;
  };
  const auto r = grid_search(i1, i2, runs, fn, *data.target, seeds);
  const std::string table = error_table_csv(r);
  if (!out.empty()) {
    std::filesystem::create_directories(out);
    write_text_file(std::filesystem::path(out) / "error_table.csv", table);
  }
  std::cout << table << "best beta_1=" << format_real(r.best_1) << " beta_2=" << format_real(r.best_2)
            << " mae=" << format_real(r.best_error) << '\n';
  return 0;
}

int analyze(const std::string& metrics, real threshold, const std::string& column) {
  const auto values = read_metric_column(read_text_file(metrics), column, metrics);
  const auto r = runs_to_threshold(values, threshold);
  std::cout << "runs=" << r.runs << " converged=" << (r.converged ? "yes" : "no") << " threshold_pct="
            << format_real(threshold) << '\n';
  return 0;
}

int gen_data(const std::string& spec_path, std::string out) {
  const std::string text = read_text_file(spec_path);
  const SynthSpec spec = parse_synth_spec(text);
  if (out.empty()) out = nlohmann::json::parse(text).value("out", std::string("synth-data"));
  write_synth(generate(spec), out);
  std::cout << "wrote " << out << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hybrid agent-based / continuum epidemic simulator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("simulate", "run a scenario batch and write CSV outputs");
  std::string config, mode, out = "out";
  int runs = 0, threads = 1;
  std::optional<std::uint64_t> seed;
  sim->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  sim->add_option("--mode", mode, "hybrid or full-abm (overrides the config)")
      ->check(CLI::IsMember({"hybrid", "full-abm"}));
  sim->add_option("--runs", runs, "number of runs (overrides the config)")->check(CLI::PositiveNumber);
  sim->add_option("--seed", seed, "first seed; run i uses seed + i");
  sim->add_option("--out", out, "output directory");
  sim->add_option("--threads", threads, "concurrent runs")->check(CLI::PositiveNumber);

  auto* cal = app.add_subcommand("calibrate", "grid search of the two-interval calibration constant");
  std::string grid, cal_out;
  cal->add_option("--config", config, "scenario JSON")->required()->check(CLI::ExistingFile);
  cal->add_option("--grid", grid, "grid JSON: interval1, interval2, runs, seed, target")
      ->required()
      ->check(CLI::ExistingFile);
  cal->add_option("--out", cal_out, "directory for error_table.csv");

  auto* an = app.add_subcommand("analyze-runs", "runs needed until the cumulative mean settles");
  std::string metrics, column = "mae";
  real threshold = 2;
  an->add_option("--metrics", metrics, "metrics CSV")->required()->check(CLI::ExistingFile);
  an->add_option("--threshold", threshold, "relative change in percent")->required();
  an->add_option("--column", column, "metric column");

  auto* gen = app.add_subcommand("gen-data", "write a synthetic population");
  std::string spec, gen_out;
  gen->add_option("--spec", spec, "synthetic population JSON")->required()->check(CLI::ExistingFile);
  gen->add_option("--out", gen_out, "output directory (default: the file's out key)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*sim) return simulate(config, mode, runs, seed, out, threads);
    if (*cal) return calibrate(config, grid, cal_out);
    if (*an) return analyze(metrics, threshold, column);
    if (*gen) return gen_data(spec, gen_out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
