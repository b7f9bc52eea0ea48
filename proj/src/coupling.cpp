#include "hepi/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hepi {

NodalField epsilon_weights(const TriMesh& mesh) {
  NodalField eps(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) eps[i] = 3.0 / mesh.fan_area(i);
  return eps;
}

int agent_to_density(CompartmentField& field, const TriMesh& mesh, const NodalField& epsilon, const Vec2& position,
                     HealthState s) {
  if (!mesh.contains(position)) {
    std::ostringstream os;
    os << "agent_to_density: position (" << position.x() << ", " << position.y() << ") is outside the mesh";
    throw Error(os.str());
  }
  const int node = mesh.nearest_node(position);
  field.values(node, index_of(s)) += epsilon[node];
  return node;
}

OccupancySchedule::OccupancySchedule(std::array<Day, kNumDayTypes> hourly) : hourly_(hourly) {
  for (const auto& d : hourly_)
    for (real v : d)
      if (!(v >= 0)) throw Error("occupancy values must be non-negative");
}

real OccupancySchedule::at(DayType type, real t_s) const {
  const auto& d = day(type);
  const real h = std::clamp(t_s / 3600.0, 0.0, 24.0);
  const int h0 = std::min(static_cast<int>(std::floor(h)), 23);
  const real f = h - h0;
  const real a = d[static_cast<std::size_t>(h0)], b = d[static_cast<std::size_t>((h0 + 1) % 24)];
  return a + f * (b - a);
}

real expected_outflow(const OccupancySchedule& schedule, DayType type, real t_s, real dt_s) {
  return std::max(0.0, schedule.at(type, t_s) - schedule.at(type, t_s + dt_s));
}

OccupancySchedule occupancy_from_plans(const WeekPlans& week, const TriMesh& mesh) {
  std::array<OccupancySchedule::Day, kNumDayTypes> hourly{};
  for (int d = 0; d < kNumDayTypes; ++d)
    for (int id = 0; id < week.num_plans(); ++id) {
      const auto& plan = week.plan(static_cast<DayType>(d), id);
      if (plan.empty()) continue;
      for (int h = 0; h < 24; ++h)
        if (mesh.contains(position_at(plan, h * 3600.0).position))
          hourly[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)] += 1;
    }
  return OccupancySchedule(hourly);
}

OccupancySchedule parse_occupancy_csv(std::string_view text, const std::string& source) {
  std::array<OccupancySchedule::Day, kNumDayTypes> hourly{};
  std::array<std::array<bool, 24>, kNumDayTypes> seen{};
  std::size_t number = 0, start = 0;
  bool header = false;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto line = trim(text.substr(start, end - start));
    start = end + 1;
    if (line.empty()) continue;
    if (!header) {
      if (line != "day_type,hour,expected_persons")
        throw ParseError(source, number, "expected header 'day_type,hour,expected_persons'");
      header = true;
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 3) throw ParseError(source, number, "expected 3 fields");
    int d = -1;
    for (int k = 0; k < kNumDayTypes; ++k)
      if (f[0] == to_string(static_cast<DayType>(k))) d = k;
    if (d < 0) throw ParseError(source, number, "unknown day type '" + std::string(f[0]) + "'");
    const auto h = parse_int(f[1], source, number);
    if (h < 0 || h > 23) throw ParseError(source, number, "hour must be in 0..23");
    const real v = parse_real(f[2], source, number);
    if (!(v >= 0)) throw ParseError(source, number, "expected_persons must be non-negative");
    hourly[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)] = v;
    seen[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)] = true;
  }
  if (!header) throw ParseError(source, 1, "missing header");
  for (int d = 0; d < kNumDayTypes; ++d)
    for (int h = 0; h < 24; ++h)
      if (!seen[static_cast<std::size_t>(d)][static_cast<std::size_t>(h)])
        throw ParseError(source, number, "missing " + std::string(to_string(static_cast<DayType>(d))) + " hour " +
                                             std::to_string(h));
  return OccupancySchedule(hourly);
}

std::string occupancy_to_csv(const OccupancySchedule& schedule) {
  std::ostringstream os;
  os << "day_type,hour,expected_persons\n";
  for (int d = 0; d < kNumDayTypes; ++d)
    for (int h = 0; h < 24; ++h)
      os << to_string(static_cast<DayType>(d)) << ',' << h << ','
         << format_real(schedule.day(static_cast<DayType>(d))[static_cast<std::size_t>(h)]) << '\n';
  return os.str();
}

int whole_persons(const StateCounts& masses) {
  int n = 0;
  for (real m : masses) n += static_cast<int>(std::floor(std::max(0.0, m) + 1e-9));
  return n;
}

OutflowSplit split_outflow(const StateCounts& masses, int n_out) {
  OutflowSplit out;
  if (n_out <= 0) return out;
  if (n_out > whole_persons(masses))
    throw Error("split_outflow: " + std::to_string(n_out) + " persons requested but the compartments hold only " +
                std::to_string(whole_persons(masses)) + " whole persons");
  real total = 0;
  for (real m : masses) total += std::max(0.0, m);
  int assigned = 0;
  for (int c = 0; c < kNumStates; ++c) {
    const auto i = static_cast<std::size_t>(c);
    out.counts[i] = static_cast<int>(std::floor(n_out * std::max(0.0, masses[i]) / total));
    assigned += out.counts[i];
  }
  out.counts[0] += n_out - assigned;
  // feasible by the whole_persons bound: some other compartment keeps >= 1 person
  while (out.counts[0] > masses[0] + 1e-9) {
    std::size_t best = 1;
    for (std::size_t c = 2; c < kNumStates; ++c)
      if (masses[c] - out.counts[c] > masses[best] - out.counts[best]) best = c;
    --out.counts[0];
    ++out.counts[best];
    ++out.susceptible_deficit;
  }
  return out;
}

void remove_persons(CompartmentField& field, const Eigen::VectorXd& lumped, const std::array<int, kNumStates>& counts) {
  for (int c = 0; c < kNumStates; ++c) {
    const int n = counts[static_cast<std::size_t>(c)];
    if (n == 0) continue;
    const real m = lumped.dot(field.values.col(c));
    if (n > m + 1e-6) throw Error("remove_persons: compartment " + std::string(to_string(kAllStates[c])) + " holds only " +
                           format_real(m) + " persons");
    field.values.col(c) *= std::max(0.0, (m - n) / m);
  }
}

void FreeIdPool::add(int id) {
  if (id < 0) throw Error("FreeIdPool: negative id");
  if (static_cast<std::size_t>(id) >= where_.size()) where_.resize(static_cast<std::size_t>(id) + 1, -1);
  if (where_[static_cast<std::size_t>(id)] >= 0) throw Error("FreeIdPool: id already free");
  where_[static_cast<std::size_t>(id)] = static_cast<int>(ids_.size());
  ids_.push_back(id);
}

bool FreeIdPool::contains(int id) const {
  return id >= 0 && static_cast<std::size_t>(id) < where_.size() && where_[static_cast<std::size_t>(id)] >= 0;
}

void FreeIdPool::remove(int id) {
  if (!contains(id)) throw Error("FreeIdPool: id not free");
  const auto pos = static_cast<std::size_t>(where_[static_cast<std::size_t>(id)]);
  const int last = ids_.back();
  ids_[pos] = last;
  where_[static_cast<std::size_t>(last)] = static_cast<int>(pos);
  ids_.pop_back();
  where_[static_cast<std::size_t>(id)] = -1;
}

std::string exchange_log_header() {
  return "step,time_days,agents_absorbed,persons_emitted,S_out,E_out,I_out,SY_out,H_out,C_out,HC_out,R_out,shortfall,s_deficit,clipped_mass\n";
}

void append_exchange_csv(std::string& out, const ExchangeRecord& r) {
  out += std::to_string(r.step) + ',' + format_real(r.time_days) + ',' + std::to_string(r.agents_absorbed) + ',' +
         std::to_string(r.persons_emitted);
  for (int v : r.out) out += ',' + std::to_string(v);
  out += ',' + std::to_string(r.outflow_shortfall) + ',' + std::to_string(r.susceptible_deficit) + ',' +
         format_real(r.clipped_mass) + '\n';
}

namespace {
constexpr std::uint64_t kCouplingStream = 3;
constexpr int kPickAttempts = 64;
}  // namespace

HybridSimulation::HybridSimulation(AbmEngine& engine, const TriMesh* mesh, const NodalVectors* grad_v,
                                   OccupancySchedule occupancy, HybridSettings settings, const RateSet& rates,
                                   const ActivitySchedule& activity, Date start, std::uint64_t seed)
    : engine_(&engine),
      mesh_(mesh),
      settings_(std::move(settings)),
      rates_(rates),
      activity_(&activity),
      start_(start),
      occupancy_(occupancy),
      remembered_(static_cast<std::size_t>(engine.num_agents())),
      rng_(make_rng(seed, kCouplingStream)) {
  engine_->begin_day(0);
  day_ = 0;
  if (!mesh_) {
    reference_population_ = engine_->num_active();
    return;
  }
  epsilon_ = epsilon_weights(*mesh_);
  const NodalVectors zero = NodalVectors::Zero(2, mesh_->num_nodes());
  const NodalVectors& g = grad_v ? *grad_v : zero;
  if (settings_.solve_pde) {
    const real dt = engine_->dt_days();
    solver_.emplace(*mesh_, assemble(*mesh_, g, rates_.diffusion, settings_.drift), dt, settings_.integrator);
  }
  field_.values = Eigen::MatrixXd::Zero(mesh_->num_nodes(), kNumStates);
  for (int id = 0; id < engine_->num_agents(); ++id) {
    const auto p = engine_->plan_position(id, 0.0);
    if (p.position.allFinite() && mesh_->contains(p.position)) {
      engine_->deactivate(id);
      pool_.add(id);
      initial_ids_.push_back(id);
    }
  }
}

void HybridSimulation::initialize_continuum(const ContinuumInit& init) {
  if (!mesh_) {
    if (sum(init.totals) > 0) throw Error("continuum totals given but no continuum region exists");
    return;
  }
  NodalField dist = init.distribution;
  if (dist.size() == 0) dist = NodalField::Constant(mesh_->num_nodes(), 1.0 / mesh_->total_area());
  field_ = initialize(*mesh_, dist, init.totals);
  field_.time = 0;
  reference_population_ = population();
}

StateCounts HybridSimulation::continuum_mass() const {
  if (!mesh_) return StateCounts{};
  return total_mass(solver_ ? solver_->operators().lumped : mesh_->lumped_mass(), field_);
}

void HybridSimulation::begin_day(int day) {
  if (day != day_) engine_->begin_day(day);
  day_ = day;
  const Date date = start_.plus_days(day);
  beta_today_ = settings_.pde_beta.empty() ? 0.0 : effective_beta(activity_->out_of_home(date), settings_.pde_beta.at(date));
}

int HybridSimulation::pick_free_id(HealthState s, real t_s) {
  const auto& ids = pool_.ids();
  auto outside = [&](int id) {
    const auto p = engine_->plan_position(id, t_s).position;
    return p.allFinite() && !mesh_->contains(p);
  };
  if (settings_.remember_reentry_state)
    for (int k = 0; k < kPickAttempts; ++k) {
      const int id = ids[uniform_index(rng_, ids.size())];
      if (remembered_[static_cast<std::size_t>(id)] == s && outside(id)) return id;
    }
  int id = -1;
  for (int k = 0; k < kPickAttempts; ++k) {
    id = ids[uniform_index(rng_, ids.size())];
    if (outside(id)) return id;
  }
  return id;
}

const ExchangeRecord& HybridSimulation::step(int step_in_day) {
  const int spd = static_cast<int>(std::lround(1.0 / engine_->dt_days()));
  const real dt_s = kSecondsPerDay / spd;
  const real t0 = step_in_day * dt_s, t1 = t0 + dt_s;
  ExchangeRecord rec;
  rec.step = global_step_;
  rec.time_days = day_ + static_cast<real>(step_in_day + 1) / spd;

  engine_->step(step_in_day);
  if (mesh_) {
    if (solver_) rec.clipped_mass = solver_->step(field_, beta_today_, rates_).clipped_mass;
    for (int id = 0; id < engine_->num_agents(); ++id) {
      if (!engine_->is_active(id)) continue;
      const auto& a = engine_->agent(id);
      if (!mesh_->contains(a.position)) continue;
      const HealthState s = a.health;
      agent_to_density(field_, *mesh_, epsilon_, a.position, s);
      engine_->deactivate(id);
      pool_.add(id);
      if (settings_.remember_reentry_state) remembered_[static_cast<std::size_t>(id)] = s;
      ++rec.agents_absorbed;
    }
    if (settings_.outflow) {
      const DayType type = day_type_of(start_.plus_days(day_));
      carry_ += expected_outflow(occupancy_, type, t0, dt_s);
      const int requested = static_cast<int>(std::floor(carry_));
      carry_ -= requested;
      const StateCounts masses = continuum_mass();
      const int available = whole_persons(masses);
      const int n = std::max(0, std::min({requested, available, static_cast<int>(pool_.size())}));
      rec.outflow_shortfall = requested - n;
      if (n > 0) {
        const auto split = split_outflow(masses, n);
        rec.susceptible_deficit = split.susceptible_deficit;
        remove_persons(field_, solver_ ? solver_->operators().lumped : mesh_->lumped_mass(), split.counts);
        for (int c = 0; c < kNumStates; ++c)
          for (int k = 0; k < split.counts[static_cast<std::size_t>(c)]; ++k) {
            const HealthState s = kAllStates[c];
            const int id = pick_free_id(s, t1);
            pool_.remove(id);
            remembered_[static_cast<std::size_t>(id)].reset();
            engine_->activate(id, s, t1);
            ++rec.persons_emitted;
          }
        rec.out = split.counts;
      }
    }
    max_drift_ = std::max(max_drift_, std::abs(population() - reference_population_));
  }
  ++global_step_;
  log_.push_back(rec);
  return log_.back();
}

}  // namespace hepi
