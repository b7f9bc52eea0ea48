#include "hepi/coupling.hpp"
#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace hepi;
using hepi::test::end;
using hepi::test::start;

namespace {

TriMesh hexagon_fan() {
  const real side = std::sqrt(8 / std::sqrt(3.0));
  Eigen::Matrix2Xd n(2, 7);
  n.col(0) = Vec2::Zero();
  for (int k = 0; k < 6; ++k) {
    const real a = k * std::numbers::pi / 3;
    n.col(k + 1) = side * Vec2(std::cos(a), std::sin(a));
  }
  TriMesh::Triangles t(3, 6);
  for (int k = 0; k < 6; ++k) t.col(k) << 0, 1 + k, 1 + (k + 1) % 6;
  return TriMesh(n, t);
}

CompartmentField zeros(const TriMesh& m) {
  CompartmentField f;
  f.values = Eigen::MatrixXd::Zero(m.num_nodes(), kNumStates);
  return f;
}

// floor-then-S split recomputed from scratch
std::array<int, kNumStates> split_oracle(const StateCounts& m, int n) {
  real total = 0;
  for (real x : m) total += x;
  std::array<int, kNumStates> c{};
  int assigned = 0;
  for (int s = 0; s < kNumStates; ++s) {
    c[static_cast<std::size_t>(s)] = static_cast<int>(std::floor(n * m[static_cast<std::size_t>(s)] / total));
    assigned += c[static_cast<std::size_t>(s)];
  }
  c[0] += n - assigned;
  while (c[0] > m[0] + 1e-9) {
    int best = -1;
    real left = -1;
    for (int s = 1; s < kNumStates; ++s) {
      const real r = m[static_cast<std::size_t>(s)] - c[static_cast<std::size_t>(s)];
      if (r > left) left = r, best = s;
    }
    --c[0];
    ++c[static_cast<std::size_t>(best)];
  }
  return c;
}

}  // namespace

TEST_SUITE("coupling") {

TEST_CASE("epsilon at a fan of area 12") {
  const auto m = hexagon_fan();
  const auto eps = epsilon_weights(m);
  CHECK(eps[0] == doctest::Approx(0.25));
  auto f = zeros(m);
  const int node = agent_to_density(f, m, eps, Vec2(0.01, 0.0), HealthState::S);
  CHECK(node == 0);
  CHECK(f.values(0, 0) == doctest::Approx(0.25));
  CHECK(total_mass(m, f)[0] == doctest::Approx(1.0).epsilon(1e-12));
  agent_to_density(f, m, eps, Vec2(0.0, 0.02), HealthState::S);
  CHECK(f.values(0, 0) == doctest::Approx(0.5));
  CHECK(total_mass(m, f)[0] == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("agent routed to its own compartment") {
  Rng rng = make_rng(1, 0);
  const auto m = make_jittered_rectangle_mesh(Vec2(0, 0), Vec2(10, 10), 5, 5, 0.3, rng);
  const auto eps = epsilon_weights(m);
  for (int k = 0; k < m.num_nodes(); ++k) CHECK(eps[k] * fan_area(m, k) / 3 == doctest::Approx(1.0).epsilon(1e-15));
  auto f = zeros(m);
  agent_to_density(f, m, eps, Vec2(3.3, 7.1), HealthState::I);
  const auto mass = total_mass(m, f);
  for (int s = 0; s < kNumStates; ++s)
    CHECK(mass[static_cast<std::size_t>(s)] == doctest::Approx(s == index_of(HealthState::I) ? 1.0 : 0.0));
  CHECK_THROWS_AS(agent_to_density(f, m, eps, Vec2(11, 5), HealthState::S), Error);
}

TEST_CASE("expected outflow") {
  std::array<OccupancySchedule::Day, kNumDayTypes> h{};
  for (auto& d : h) d.fill(500);
  CHECK(expected_outflow(OccupancySchedule(h), DayType::Weekday, 8 * 3600, 1800) == 0);
  h[0][8] = 1000;
  h[0][9] = 940;
  const OccupancySchedule s(h);
  CHECK(expected_outflow(s, DayType::Weekday, 8 * 3600, 1800) == doctest::Approx(30));
  CHECK(s.at(DayType::Weekday, 8.5 * 3600) == doctest::Approx(970));
  // rising from 7:00 to 8:00
  CHECK(expected_outflow(s, DayType::Weekday, 7 * 3600, 1800) == 0);
  // 23:30 interpolates towards hour 0 of the same type
  h[1][23] = 100;
  h[1][0] = 40;
  CHECK(OccupancySchedule(h).at(DayType::Saturday, 23.5 * 3600) == doctest::Approx(70));
}

TEST_CASE("occupancy csv round trip") {
  std::array<OccupancySchedule::Day, kNumDayTypes> h{};
  for (int d = 0; d < kNumDayTypes; ++d)
    for (int k = 0; k < 24; ++k) h[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)] = d * 100 + k * 0.5;
  const auto back = parse_occupancy_csv(occupancy_to_csv(OccupancySchedule(h)));
  for (int d = 0; d < kNumDayTypes; ++d) CHECK(back.day(static_cast<DayType>(d)) == h[static_cast<std::size_t>(d)]);
  CHECK_THROWS_AS(parse_occupancy_csv("day_type,hour,expected_persons\nweekday,25,1\n"), ParseError);
}

TEST_CASE("outflow split") {
  CHECK(split_outflow(StateCounts{90, 7, 3}, 0).counts == std::array<int, kNumStates>{});
  auto s = split_outflow(StateCounts{90, 7, 3}, 10);
  CHECK(s.counts == std::array<int, kNumStates>{10, 0, 0, 0, 0, 0, 0, 0});
  CHECK(s.counts == split_oracle(StateCounts{90, 7, 3}, 10));
  CHECK(split_outflow(StateCounts{50}, 5).counts[0] == 5);

  // S too poor for the remainder: 4 + 3 floors, 2 left over, moved to E then I
  const StateCounts poor{0.2, 5.5, 4.3};
  CHECK(whole_persons(poor) == 9);
  s = split_outflow(poor, 9);
  CHECK(s.counts == split_oracle(poor, 9));
  CHECK(s.counts == std::array<int, kNumStates>{0, 5, 4, 0, 0, 0, 0, 0});
  CHECK(s.susceptible_deficit == 2);
  CHECK_THROWS_AS(split_outflow(poor, 10), Error);

  Rng rng = make_rng(2, 0);
  for (int rep = 0; rep < 500; ++rep) {
    StateCounts m{};
    real total = 0;
    for (auto& x : m) total += x = uniform01(rng) < 0.3 ? 0 : 40 * uniform01(rng);
    if (total < 1) continue;
    if (whole_persons(m) < 1) continue;
    const int n = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(whole_persons(m))) + 1);
    const auto got = split_outflow(m, n);
    CHECK(got.counts == split_oracle(m, n));
    int sum_counts = 0;
    for (int c : got.counts) sum_counts += c;
    CHECK(sum_counts == n);
  }
}

TEST_CASE("remove persons scales each compartment") {
  const auto m = make_rectangle_mesh(Vec2(0, 0), Vec2(2, 2), 2, 2);
  auto f = initialize(m, NodalField::Constant(m.num_nodes(), 0.25), StateCounts{100, 10, 0, 4});
  std::array<int, kNumStates> c{};
  c[0] = 25;
  c[3] = 4;
  remove_persons(f, m.lumped_mass(), c);
  const auto mass = total_mass(m, f);
  CHECK(mass[0] == doctest::Approx(75));
  CHECK(mass[1] == doctest::Approx(10));
  CHECK(mass[3] == doctest::Approx(0).epsilon(1e-12));
  c = {};
  c[2] = 1;
  CHECK_THROWS_AS(remove_persons(f, m.lumped_mass(), c), Error);
}

TEST_CASE("free id pool") {
  FreeIdPool p;
  p.add(4);
  p.add(9);
  p.add(1);
  CHECK(p.contains(9));
  p.remove(9);
  CHECK_FALSE(p.contains(9));
  CHECK(p.size() == 2);
  CHECK_THROWS_AS(p.add(4), Error);
  CHECK_THROWS_AS(p.remove(9), Error);
}

TEST_CASE("commuter entering the continuum is absorbed once") {
  const auto mesh = make_rectangle_mesh(Vec2(0, 0), Vec2(100, 100), 4, 4);
  const Vec2 home(-300, 50), work(50, 50), other(-500, -500);
  std::vector<MobilityEvent> ev{start(0, 0, 0, home, ActivityCategory::Home),
                                end(0, 8 * 3600, 0, home, ActivityCategory::Home),
                                start(0, 9 * 3600, 1, work),
                                end(0, 17 * 3600, 1, work),
                                start(0, 18 * 3600, 0, home, ActivityCategory::Home),
                                end(0, kSecondsPerDay, 0, home, ActivityCategory::Home),
                                start(1, 0, 2, other, ActivityCategory::Home),
                                end(1, kSecondsPerDay, 2, other, ActivityCategory::Home)};
  const std::vector<Facility> fac{{0, ActivityCategory::Home, home, 1},
                                  {1, ActivityCategory::Work, work, 1},
                                  {2, ActivityCategory::Home, other, 1}};
  const WeekPlans week(ev, ev, ev);
  AbmSettings s;
  s.start_date = Date::parse("2020-03-02");
  s.rates = published_rates();
  AbmEngine engine(week, fac, s, 1);
  HybridSettings hs;
  HybridSimulation sim(engine, &mesh, nullptr, OccupancySchedule{}, hs, s.rates, s.activity, s.start_date, 1);
  CHECK(sim.initially_absorbed().empty());
  sim.initialize_continuum({});
  int absorbed = 0, emitted = 0;
  for (int st = 0; st < 48; ++st) {
    const auto& r = sim.step(st);
    absorbed += r.agents_absorbed;
    emitted += r.persons_emitted;
    CHECK(std::abs(sim.population() - 2) < 1e-6);
  }
  CHECK(absorbed == 1);
  CHECK(emitted == 0);
  CHECK(sim.active_agents() == 1);
  CHECK(sim.continuum_mass()[0] == doctest::Approx(1.0));
  CHECK(sim.free_ids().contains(0));
}

TEST_CASE("outflow emits agents and conserves population") {
  const auto mesh = make_rectangle_mesh(Vec2(0, 0), Vec2(100, 100), 4, 4);
  std::vector<MobilityEvent> ev;
  std::vector<Facility> fac;
  // 40 plans: half start inside, all inside plans leave at 8:00 for a place outside
  for (int a = 0; a < 40; ++a) {
    const Vec2 h = a < 20 ? Vec2(10 + 2 * a, 50) : Vec2(-100 - a, 50);
    const Vec2 w(300, 10 * a);
    fac.push_back({2 * a, ActivityCategory::Home, h, 1});
    fac.push_back({2 * a + 1, ActivityCategory::Work, w, 1});
    ev.push_back(start(a, 0, 2 * a, h, ActivityCategory::Home));
    ev.push_back(end(a, 8 * 3600, 2 * a, h, ActivityCategory::Home));
    ev.push_back(start(a, 8.5 * 3600, 2 * a + 1, w));
    ev.push_back(end(a, kSecondsPerDay, 2 * a + 1, w));
  }
  const WeekPlans week(ev, ev, ev);
  AbmSettings s;
  s.start_date = Date::parse("2020-03-02");
  s.rates = published_rates();
  AbmEngine engine(week, fac, s, 9);
  std::array<OccupancySchedule::Day, kNumDayTypes> occ{};
  for (auto& d : occ)
    for (int k = 0; k < 24; ++k) d[static_cast<std::size_t>(k)] = k <= 8 ? 20 : 0;
  HybridSettings hs;
  hs.pde_beta = BetaSchedule({{s.start_date, 0.0}});
  HybridSimulation sim(engine, &mesh, nullptr, OccupancySchedule(occ), hs, s.rates, s.activity, s.start_date, 9);
  CHECK(sim.initially_absorbed().size() == 20);
  ContinuumInit init;
  init.totals = StateCounts{18, 2};
  sim.initialize_continuum(init);
  CHECK(sim.population() == doctest::Approx(40));
  int emitted = 0;
  for (int st = 0; st < 48; ++st) {
    emitted += sim.step(st).persons_emitted;
    CHECK(std::abs(sim.population() - 40) < 1);
  }
  // progression leaves fractional persons behind that cannot be emitted whole
  const auto left = sim.continuum_mass();
  CHECK(emitted + sum(left) == doctest::Approx(20));
  CHECK(emitted >= 18);
  CHECK(whole_persons(left) == 0);
  CHECK(sim.active_agents() == 20 + emitted);
  CHECK(sim.max_population_drift() < 1e-6);
}

TEST_CASE("exchange log format") {
  CHECK(exchange_log_header() == "step,time_days,agents_absorbed,persons_emitted,S_out,E_out,I_out,SY_out,H_out,C_out,HC_out,R_out,shortfall,s_deficit,clipped_mass\n");
  ExchangeRecord r;
  r.step = 3;
  r.time_days = 0.5;
  r.agents_absorbed = 2;
  r.persons_emitted = 1;
  r.out[0] = 1;
  r.outflow_shortfall = 4;
  r.susceptible_deficit = 1;
  r.clipped_mass = 0.25;
  std::string line;
  append_exchange_csv(line, r);
  CHECK(line == "3,0.5,2,1,1,0,0,0,0,0,0,0,4,1,0.25\n");
}

}
