#include "hepi/abm.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace hepi {

void advance_positions(std::span<Agent> agents, real t_end_s) {
  for (auto& a : agents) {
    switch (a.mode) {
      case AgentMode::InPdeDomain: break;
      case AgentMode::InFacility: break;  // position already holds the facility location
      case AgentMode::Commuting: {
        if (a.arrive_s < a.depart_s)
          throw Error("agent " + std::to_string(a.id) + ": arrival before departure");
        const real span = a.arrive_s - a.depart_s;
        real f = span > 0 ? (t_end_s - a.depart_s) / span : 1.0;
        f = std::clamp(f, 0.0, 1.0);
        a.position = a.travel_from + f * (a.travel_to - a.travel_from);
        break;
      }
    }
  }
}

std::vector<std::vector<MobilityEvent>> slice_events(std::span<const MobilityEvent> events, real dt_days) {
  if (!(dt_days > 0)) throw Error("slice_events: dt must be positive");
  if (events.empty()) return {};
  const auto plans = events_to_activities(events);  // validates ordering
  const real dt_s = dt_days * kSecondsPerDay;
  real t_first = events.front().time_s, t_last = t_first;
  for (const auto& e : events) {
    t_first = std::min(t_first, e.time_s);
    t_last = std::max(t_last, e.time_s);
  }
  if (t_first < 0) throw Error("slice_events: negative event time");
  const auto n_chunks = static_cast<std::size_t>(std::max(1.0, std::ceil(t_last / dt_s - 1e-12)));
  auto chunk_of = [&](real t) {
    return std::min(static_cast<std::size_t>(std::floor(t / dt_s)), n_chunks - 1);
  };
  std::vector<std::vector<MobilityEvent>> chunks(n_chunks);
  for (const auto& e : events) chunks[chunk_of(e.time_s)].push_back(e);

  for (const auto& [id, plan] : plans) {
    if (plan.empty()) continue;
    const real first = plan.front().start_s, last = plan.back().end_s;
    // windows [k dt, (k+1) dt) holding a real event (before clamping to the last chunk)
    std::set<long> with_event;
    for (const auto& a : plan) {
      with_event.insert(static_cast<long>(std::floor(a.start_s / dt_s)));
      with_event.insert(static_cast<long>(std::floor(a.end_s / dt_s)));
    }
    for (std::size_t k = 0; k < n_chunks; ++k) {
      const real t0 = static_cast<real>(k) * dt_s;
      if (!(first < t0 && last >= t0 + dt_s)) continue;
      if (with_event.count(static_cast<long>(k))) continue;
      const auto p = position_at(plan, t0);
      MobilityEvent c;
      c.agent_id = id;
      c.time_s = t0;
      c.kind = EventKind::Continue;
      c.facility_id = p.facility_id;
      c.location = p.position;
      if (p.facility_id >= 0) {
        const auto it = std::find_if(plan.begin(), plan.end(),
                                     [&](const Activity& a) { return a.facility_id == p.facility_id; });
        c.category = it->category;
      }
      chunks[k].push_back(c);
    }
  }
  for (auto& c : chunks)
    std::stable_sort(c.begin(), c.end(), [](const MobilityEvent& a, const MobilityEvent& b) {
      return a.time_s < b.time_s || (a.time_s == b.time_s && a.agent_id < b.agent_id);
    });
  return chunks;
}

std::map<int, int> estimate_room_sizes(std::span<const MobilityEvent> events) {
  struct Sweep {
    real t;
    int delta;
    int facility;
    int agent;
  };
  std::vector<Sweep> sweep;
  for (const auto& e : events) {
    if (e.kind == EventKind::Continue) continue;
    sweep.push_back({e.time_s, e.kind == EventKind::Start ? +1 : -1, e.facility_id, e.agent_id});
  }
  std::stable_sort(sweep.begin(), sweep.end(), [](const Sweep& a, const Sweep& b) {
    return a.t < b.t || (a.t == b.t && a.delta < b.delta);
  });
  std::map<std::pair<int, int>, int> open;  // (agent, facility) -> open count
  std::map<int, int> current, best;
  for (const auto& s : sweep) {
    auto& o = open[{s.agent, s.facility}];
    if (s.delta < 0 && o == 0)
      throw Error("agent " + std::to_string(s.agent) + " ends at facility " + std::to_string(s.facility) +
                  " before starting there");
    o += s.delta;
    int& c = current[s.facility];
    c += s.delta;
    int& b = best[s.facility];
    b = std::max({b, c, 1});
  }
  return best;
}

std::vector<Activity> reduce_plan(std::span<const Activity> plan, real removal_probability, bool schools_closed,
                                  Rng& rng) {
  std::vector<Activity> kept;
  kept.reserve(plan.size());
  for (const auto& a : plan) {
    if (a.category == ActivityCategory::Home) {
      kept.push_back(a);
      continue;
    }
    // one draw per out-of-home activity, independent of the closure outcome
    const bool removed = uniform01(rng) < removal_probability;
    if (removed) continue;
    if (schools_closed && a.category == ActivityCategory::School) continue;
    kept.push_back(a);
  }
  std::vector<Activity> merged;
  merged.reserve(kept.size());
  for (const auto& a : kept) {
    if (!merged.empty() && merged.back().facility_id == a.facility_id) merged.back().end_s = a.end_s;
    else merged.push_back(a);
  }
  return merged;
}

std::vector<MobilityEvent> apply_activity_reduction(std::span<const MobilityEvent> events,
                                                    std::span<const real> out_of_home_pct_by_day, Rng& rng) {
  const auto plans = events_to_activities(events);
  std::map<int, std::vector<Activity>> out;
  for (const auto& [id, plan] : plans) {
    auto& dst = out[id];
    for (const auto& a : plan) {
      if (a.category != ActivityCategory::Home) {
        const auto day = static_cast<std::size_t>(std::max(0.0, std::floor(a.start_s / kSecondsPerDay)));
        const real pct = day < out_of_home_pct_by_day.size() ? out_of_home_pct_by_day[day] : 0.0;
        const real p = pct < 0 ? std::min(1.0, -pct / 100.0) : 0.0;
        if (uniform01(rng) < p) continue;
      }
      dst.push_back(a);
    }
  }
  return activities_to_events(out);
}

std::vector<MobilityEvent> apply_school_closures(std::span<const MobilityEvent> events, int closure_day) {
  const auto plans = events_to_activities(events);
  const real cutoff = closure_day * kSecondsPerDay;
  std::map<int, std::vector<Activity>> out;
  for (const auto& [id, plan] : plans) {
    auto& dst = out[id];
    for (const auto& a : plan)
      if (!(a.category == ActivityCategory::School && a.start_s >= cutoff)) dst.push_back(a);
  }
  return activities_to_events(out);
}

real infection_hazard(real co_present_infectious, real room_size, real overlap_days, real beta_const) {
  if (overlap_days < 0) throw Error("infection_hazard: negative overlap");
  if (co_present_infectious < 0) throw Error("infection_hazard: negative infectious count");
  if (!(room_size >= 1)) throw Error("infection_hazard: room size must be at least 1");
  return beta_const * (co_present_infectious / room_size) * overlap_days;
}

namespace {
constexpr std::uint64_t kHealthStream = 1;
constexpr std::uint64_t kPlanStream = 2;
}  // namespace

AbmEngine::AbmEngine(const WeekPlans& plans, std::span<const Facility> facilities, AbmSettings settings,
                     std::uint64_t seed)
    : plans_(&plans),
      settings_(std::move(settings)),
      facilities_(facilities.begin(), facilities.end()),
      health_rng_(make_rng(seed, kHealthStream)),
      plan_rng_(make_rng(seed, kPlanStream)) {
  if (settings_.steps_per_day < 1) throw Error("steps_per_day must be at least 1");
  settings_.rates.validate();
  for (std::size_t i = 0; i < facilities_.size(); ++i) {
    if (!facility_index_.emplace(facilities_[i].id, static_cast<int>(i)).second)
      throw Error("duplicate facility id " + std::to_string(facilities_[i].id));
    facilities_[i].room_size = std::max<real>(1, facilities_[i].room_size);
  }
  for (int d = 0; d < kNumDayTypes; ++d)
    for (const auto& e : plans.events(static_cast<DayType>(d)))
      if (!facility_index_.count(e.facility_id))
        throw Error("event of agent " + std::to_string(e.agent_id) + " references unknown facility " +
                    std::to_string(e.facility_id));
  const auto n = static_cast<std::size_t>(plans.num_plans());
  agents_.resize(n);
  active_.assign(n, true);
  num_active_ = static_cast<int>(n);
  today_.resize(n);
  cursor_.assign(n, 0);
  infectious_presence_.assign(facilities_.size(), 0);
  for (std::size_t i = 0; i < n; ++i) agents_[i].id = static_cast<int>(i);
}

const Facility& AbmEngine::facility(int id) const {
  const auto it = facility_index_.find(id);
  if (it == facility_index_.end()) throw Error("unknown facility " + std::to_string(id));
  return facilities_[static_cast<std::size_t>(it->second)];
}

void AbmEngine::begin_day(int day) {
  day_ = day;
  const Date date = settings_.start_date.plus_days(day);
  const DayType type = day_type_of(date);
  const real pct = settings_.activity.out_of_home(date);
  const real p = pct < 0 ? std::min(1.0, -pct / 100.0) : 0.0;
  const bool closed = settings_.school_closure && *settings_.school_closure <= date;
  beta_today_ = settings_.rates.beta.empty() ? 0.0 : settings_.rates.beta.at(date);
  for (std::size_t i = 0; i < today_.size(); ++i) {
    today_[i] = reduce_plan(plans_->plan(type, static_cast<int>(i)), p, closed, plan_rng_);
    cursor_[i] = 0;
    auto& a = agents_[i];
    a.pending_hazard = 0;
    if (active_[i]) place(a, 0.0);
  }
}

PlanPosition AbmEngine::plan_position(int id, real t_s) const {
  return position_at(today_[static_cast<std::size_t>(id)], t_s);
}

void AbmEngine::place(Agent& a, real t_s) const {
  const auto& plan = today_[static_cast<std::size_t>(a.id)];
  if (plan.empty()) {  // no plan today: stays where it was, isolated
    a.mode = AgentMode::Commuting;
    a.facility_id = -1;
    a.travel_from = a.travel_to = a.position;
    a.depart_s = a.arrive_s = t_s;
    return;
  }
  const auto p = position_at(plan, t_s);
  if (p.facility_id >= 0) {
    a.mode = AgentMode::InFacility;
    a.facility_id = p.facility_id;
    a.position = p.position;
    return;
  }
  auto it = std::lower_bound(plan.begin(), plan.end(), t_s, [](const Activity& x, real v) { return x.end_s < v; });
  a.mode = AgentMode::Commuting;
  a.facility_id = -1;
  a.travel_from = (it - 1)->location;
  a.travel_to = it->location;
  a.depart_s = (it - 1)->end_s;
  a.arrive_s = it->start_s;
  a.position = p.position;
}

void AbmEngine::step(int step_in_day) {
  if (day_ < 0) throw Error("AbmEngine::step called before begin_day");
  const real dt_s = kSecondsPerDay / settings_.steps_per_day;
  const real t0 = step_in_day * dt_s, t1 = t0 + dt_s;
  const real time_days = day_ + static_cast<real>(step_in_day) / settings_.steps_per_day;

  // 1. presence and infectious presence per facility
  presence_.clear();
  std::fill(infectious_presence_.begin(), infectious_presence_.end(), 0.0);
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!active_[i]) continue;
    const auto& plan = today_[i];
    auto& c = cursor_[i];
    while (c < plan.size() && plan[c].end_s <= t0) ++c;
    const bool infectious = is_infectious(agents_[i].health);
    for (std::size_t k = c; k < plan.size() && plan[k].start_s < t1; ++k) {
      const real overlap = std::min(plan[k].end_s, t1) - std::max(plan[k].start_s, t0);
      if (overlap <= 0) continue;
      const int f = facility_index_.at(plan[k].facility_id);
      presence_.push_back({static_cast<int>(i), f, overlap});
      if (infectious) infectious_presence_[static_cast<std::size_t>(f)] += overlap;
    }
  }
  // 2. hazard accumulation for susceptibles
  for (const auto& pr : presence_) {
    auto& a = agents_[static_cast<std::size_t>(pr.agent)];
    if (a.health != HealthState::S) continue;
    const auto f = static_cast<std::size_t>(pr.facility);
    const real inf = infectious_presence_[f] / dt_s;
    if (inf <= 0) continue;
    a.pending_hazard += infection_hazard(inf, facilities_[f].room_size, pr.overlap_s / kSecondsPerDay, beta_today_);
  }
  // 3. progression of non-susceptibles
  const real dt = dt_days();
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!active_[i]) continue;
    auto& a = agents_[i];
    if (a.health == HealthState::S) continue;
    const auto out = outgoing_rates(a.health, settings_.rates);
    if (out.count == 0) continue;
    if (const auto next = sample_transition(out, dt, health_rng_)) {
      a.health = *next;
      a.state_entry_time = time_days + dt;
    }
  }
  // 4. infection resolved when a stay ends inside (t0, t1]
  for (std::size_t i = 0; i < agents_.size(); ++i) {
    if (!active_[i]) continue;
    auto& a = agents_[i];
    if (a.health != HealthState::S) continue;
    const auto& plan = today_[i];
    for (std::size_t k = cursor_[i]; k < plan.size() && plan[k].start_s < t1; ++k) {
      if (!(plan[k].end_s > t0 && plan[k].end_s <= t1)) continue;
      const real h = a.pending_hazard;
      a.pending_hazard = 0;
      if (h > 0 && uniform01(health_rng_) < infection_probability(h)) {
        a.health = HealthState::E;
        a.state_entry_time = time_days + dt;
        break;
      }
    }
  }
  // 5. end-of-step positions
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (active_[i]) place(agents_[i], t1);
}

void AbmEngine::set_health(int id, HealthState s, real time_days) {
  auto& a = agents_.at(static_cast<std::size_t>(id));
  a.health = s;
  a.state_entry_time = time_days;
}

void AbmEngine::deactivate(int id) {
  const auto i = static_cast<std::size_t>(id);
  if (!active_.at(i)) throw Error("agent " + std::to_string(id) + " is already inactive");
  active_[i] = false;
  --num_active_;
  auto& a = agents_[i];
  a.mode = AgentMode::InPdeDomain;
  a.facility_id = -1;
  a.pending_hazard = 0;
}

void AbmEngine::activate(int id, HealthState s, real t_s) {
  const auto i = static_cast<std::size_t>(id);
  if (active_.at(i)) throw Error("agent " + std::to_string(id) + " is already active");
  active_[i] = true;
  ++num_active_;
  auto& a = agents_[i];
  a.health = s;
  a.state_entry_time = day_ + t_s / kSecondsPerDay;
  a.pending_hazard = 0;
  const auto& plan = today_[i];
  cursor_[i] = static_cast<std::size_t>(
      std::lower_bound(plan.begin(), plan.end(), t_s, [](const Activity& x, real v) { return x.end_s <= v; }) -
      plan.begin());
  place(a, t_s);
}

std::array<int, kNumStates> AbmEngine::state_counts() const {
  std::array<int, kNumStates> c{};
  for (std::size_t i = 0; i < agents_.size(); ++i)
    if (active_[i]) ++c[static_cast<std::size_t>(index_of(agents_[i].health))];
  return c;
}

}  // namespace hepi
