#include "hepi/scenario.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cstdlib>

using namespace hepi;

namespace {

ScenarioConfig small_config(Mode mode, int n_agents, int days) {
  ScenarioConfig c;
  c.mode = mode;
  c.rates = published_rates();
  c.rates.diffusion = 1e3;
  c.start = Date::parse("2020-03-02");
  c.end = c.start.plus_days(days - 1);
  c.interval_split = c.start.plus_days(std::min(days - 1, 3));
  c.school_closure = c.interval_split;
  c.rates.beta = BetaSchedule({{c.start, 2.0}});
  c.pde_beta = BetaSchedule({{c.start, 5e5}});
  SynthSpec s;
  s.n_agents = n_agents;
  s.outer = Box2(Vec2(0, 0), Vec2(4000, 4000));
  s.inner = Box2(Vec2(1500, 1500), Vec2(2500, 2500));
  s.work_facilities = 4;
  s.schools = 2;
  s.leisure_facilities = 3;
  s.mesh_nx = 4;
  s.mesh_ny = 4;
  s.commuting_fraction = 0.3;
  c.synth = s;
  c.abm_initial[index_of(HealthState::E)] = 3;
  c.abm_initial[index_of(HealthState::I)] = 2;
  c.pde_initial[index_of(HealthState::E)] = 2;
  c.landscape_cell_size = 250;
  return c;
}

std::string slurp(const std::filesystem::path& p) { return read_text_file(p); }

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("config keys") {
  const auto c = parse_scenario_config(R"({
    "preset": "berlin-25pct",
    "name": "t",
    "mode": "full-abm",
    "end_date": "2020-03-20",
    "dt": 0.041666666666666664,
    "rates": {"kappa": 0.5},
    "abm_beta": [1.5, 0.5],
    "pde_beta": [{"start": "2020-03-02", "value": 4}, {"start": "2020-03-10", "value": 2}],
    "seed": 99, "runs": 4,
    "initial": {"preset": "all-abm-exposed", "abm": {"E": 4}, "abm_scale": 2},
    "coupling": {"outflow": false, "remember_reentry_state": true},
    "pde": {"reaction": "euler", "drift": "reduced"},
    "landscape": {"enabled": false, "cell_size": 100},
    "data": {"events_weekday": "w.csv"}
  })",
                                       "/base");
  CHECK(c.name == "t");
  CHECK(c.mode == Mode::FullAbm);
  CHECK(c.num_days() == 19);
  CHECK(c.steps_per_day == 24);
  CHECK(c.rates.kappa == 0.5);
  CHECK(c.rates.sigma == doctest::Approx(1 / 3.5));
  CHECK(c.rates.diffusion == 1e-6);
  CHECK(c.rates.beta.at(Date::parse("2020-03-15")) == 1.5);
  CHECK(c.rates.beta.at(Date::parse("2020-03-16")) == 0.5);
  CHECK(c.pde_beta.at(Date::parse("2020-03-10")) == 2);
  CHECK(c.seed == 99);
  CHECK(c.runs == 4);
  CHECK(c.preset == InitialPreset::AllAbmExposed);
  CHECK(c.abm_initial[index_of(HealthState::E)] == 4);
  CHECK(c.abm_initial_scale == 2);
  CHECK_FALSE(c.outflow);
  CHECK(c.remember_reentry_state);
  CHECK(c.integrator == ReactionIntegrator::ExplicitEuler);
  CHECK(c.drift == DriftForm::Reduced);
  CHECK_FALSE(c.use_landscape);
  CHECK(c.paths.base_dir == "/base");
  CHECK(c.school_closure == Date::parse("2020-03-16"));
}

TEST_CASE("preset constants") {
  const auto p = berlin_25pct_preset();
  CHECK(p.steps_per_day == 48);
  CHECK(p.rates.diffusion == 1e-6);
  CHECK(p.abm_initial_scale == 20);
  CHECK(p.num_days() == 58);
  CHECK(p.pde_beta.at(p.start) == 450);
  CHECK(p.pde_beta.at(Date::parse("2020-03-16")) == 160);
  CHECK(p.rates.beta.at(p.start) == doctest::Approx(0.4 * 1.7e-5));
}

TEST_CASE("config errors") {
  CHECK_THROWS_AS(parse_scenario_config("{", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "neither"})", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "full-abm", "dt": 0.3})", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "full-abm", "rates": {"zeta": 1}})", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "full-abm", "end_date": "2020-02-01"})", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "hybrid"})", "."), Error);
  CHECK_THROWS_AS(parse_scenario_config(R"({"mode": "full-abm", "synth": {"colour": 1}})", "."), Error);
}

TEST_CASE("one agent without infection stays healthy") {
  ScenarioConfig c = small_config(Mode::FullAbm, 1, 5);
  c.rates.beta = BetaSchedule({{c.start, 0.0}});
  c.abm_initial = {};
  c.pde_initial = {};
  const auto data = load_scenario_data(c);
  const auto r = run_scenario(c, data, 1);
  REQUIRE(r.symptomatic_total.size() == 5);
  for (real v : r.symptomatic_total) CHECK(v == 0);
}

TEST_CASE("same seed gives the same run") {
  const auto c = small_config(Mode::Hybrid, 300, 6);
  const auto data = load_scenario_data(c);
  const auto a = run_scenario(c, data, 7), b = run_scenario(c, data, 7);
  CHECK(a.symptomatic_total == b.symptomatic_total);
  CHECK(a.abm_counts == b.abm_counts);
  CHECK(a.pde_masses == b.pde_masses);
  CHECK(a.exchange.size() == b.exchange.size());
  CHECK(a.max_population_drift < 1);
  const auto other = run_scenario(c, data, 8);
  CHECK(other.abm_counts != a.abm_counts);
}

TEST_CASE("hybrid without a reachable continuum equals the agent model") {
  const auto full = small_config(Mode::FullAbm, 300, 8);
  const auto data = load_scenario_data(full);
  ScenarioConfig hyb = full;
  hyb.mode = Mode::Hybrid;
  ScenarioData far = data;
  far.mesh = make_rectangle_mesh(Vec2(1e7, 1e7), Vec2(1e7 + 10, 1e7 + 10), 1, 1);
  far.grad_v = NodalVectors::Zero(2, far.mesh->num_nodes());
  far.initial_density = NodalField::Constant(far.mesh->num_nodes(), 0.01);
  far.occupancy = OccupancySchedule{};
  for (std::uint64_t seed : {1, 2, 3}) {
    const auto a = run_scenario(full, data, seed);
    const auto b = run_scenario(hyb, far, seed);
    CHECK(a.symptomatic_total == b.symptomatic_total);
    CHECK(a.abm_counts == b.abm_counts);
    for (real v : b.symptomatic_pde) CHECK(v == 0);
  }
}

TEST_CASE("batch statistics and outputs") {
  const auto c = small_config(Mode::Hybrid, 200, 4);
  const auto data = load_scenario_data(c);
  const auto one = run_batch(c, data, 1);
  for (real v : one.std_total) CHECK(v == 0);

  const auto three = run_batch(c, data, 3, 2);
  REQUIRE(three.runs.size() == 3);
  CHECK(three.runs[2].seed == c.seed + 2);
  const auto dir = hepi::test::scratch_dir("batch3");
  emit_outputs(three, dir);
  const auto metrics = slurp(dir / "run_metrics.csv");
  CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 4);
  const auto daily = slurp(dir / "symptomatic_daily.csv");
  CHECK(std::count(daily.begin(), daily.end(), '\n') == 1 + 3 * 4);
  // threads do not change results
  const auto serial = run_batch(c, data, 3, 1);
  for (int i = 0; i < 3; ++i)
    CHECK(serial.runs[static_cast<std::size_t>(i)].abm_counts == three.runs[static_cast<std::size_t>(i)].abm_counts);

  const auto empty_dir = hepi::test::scratch_dir("batch0");
  emit_outputs(run_batch(c, data, 0), empty_dir);
  CHECK(slurp(empty_dir / "run_metrics.csv") == "run,seed,mae\n");
  CHECK(slurp(empty_dir / "symptomatic_daily.csv") == "run,seed,date,total,abm,pde\n");
}

TEST_CASE("continuum-only population is deterministic across seeds") {
  ScenarioConfig c = small_config(Mode::Hybrid, 100, 5);
  c.synth->inner_home_fraction = 1;
  c.synth->worker_fraction = 0;
  c.synth->weekday_leisure_probability = 0;
  c.synth->weekend_leisure_probability = 0;
  c.abm_initial = {};
  const auto data = load_scenario_data(c);
  const auto b = run_batch(c, data, 3);
  CHECK(b.runs[0].initially_absorbed == 100);
  for (real v : b.std_total) CHECK(v == 0);
  CHECK(b.runs[0].pde_masses.back()[index_of(HealthState::E)] > 0);
}

TEST_CASE("golden smoke scenario") {
  const std::filesystem::path golden = HEPI_GOLDEN_DIR;
  const auto c = load_scenario_config(golden / "smoke.json");
  const auto data = load_scenario_data(c);
  const auto b = run_batch(c, data, c.runs);
  const auto dir = hepi::test::scratch_dir("golden");
  emit_outputs(b, dir);
  const bool update = std::getenv("HEPI_UPDATE_GOLDEN") != nullptr;
  for (const char* f : {"symptomatic_daily.csv", "symptomatic_summary.csv", "compartment_masses.csv",
                        "exchange_log.csv", "run_metrics.csv"}) {
    const auto expected = golden / "smoke" / f;
    if (update) {
      std::filesystem::create_directories(expected.parent_path());
      std::filesystem::copy_file(dir / f, expected, std::filesystem::copy_options::overwrite_existing);
    }
    REQUIRE(std::filesystem::exists(expected));
    CHECK_MESSAGE(slurp(dir / f) == slurp(expected), f);
  }
}

TEST_CASE("with_betas targets the active model half") {
  auto c = small_config(Mode::Hybrid, 10, 10);
  auto h = with_betas(c, 3, 1);
  CHECK(h.pde_beta.at(c.start) == 3);
  CHECK(h.pde_beta.at(c.interval_split) == 1);
  CHECK(h.rates.beta.at(c.start) == 2.0);
  c.mode = Mode::FullAbm;
  const auto f = with_betas(c, 3, 1);
  CHECK(f.rates.beta.at(c.interval_split) == 1);
  c.interval_split = c.start;
  CHECK(with_betas(c, 3, 1).rates.beta.at(c.start) == 1);
}

}
