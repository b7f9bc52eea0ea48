#include "hepi/synth.hpp"

#include <algorithm>
#include <cmath>

namespace hepi {

void SynthSpec::validate() const {
  if (n_agents < 1) throw Error("synth: n_agents must be at least 1");
  if (household_size < 1) throw Error("synth: household_size must be at least 1");
  auto in01 = [](real v, const char* name) {
    if (!(v >= 0 && v <= 1)) throw Error(std::string("synth: ") + name + " must lie in [0, 1]");
  };
  in01(inner_home_fraction, "inner_home_fraction");
  in01(commuting_fraction, "commuting_fraction");
  in01(worker_fraction, "worker_fraction");
  in01(school_fraction, "school_fraction");
  in01(weekday_leisure_probability, "weekday_leisure_probability");
  in01(weekend_leisure_probability, "weekend_leisure_probability");
  if (outer.isEmpty() || inner.isEmpty() || !outer.contains(inner)) throw Error("synth: inner must lie inside outer");
  if (inner.volume() >= outer.volume()) throw Error("synth: inner must be smaller than outer");
  if (work_facilities < 1 || schools < 1 || leisure_facilities < 1)
    throw Error("synth: need at least one facility per category and region");
  if (!(travel_speed > 0)) throw Error("synth: travel_speed must be positive");
  if (mesh_nx < 1 || mesh_ny < 1) throw Error("synth: mesh resolution must be positive");
  if (num_days < 1) throw Error("synth: num_days must be positive");
}

namespace {
constexpr real kHour = 3600.0;

Vec2 uniform_in(const Box2& b, Rng& rng) {
  return b.min() + Vec2(uniform01(rng), uniform01(rng)).cwiseProduct(b.sizes());
}

Vec2 uniform_outside(const Box2& outer, const Box2& inner, Rng& rng) {
  for (;;) {
    const Vec2 p = uniform_in(outer, rng);
    if (!inner.contains(p)) return p;
  }
}

struct Builder {
  int agent;
  std::vector<MobilityEvent>& out;
  const SynthSpec& spec;
  const Facility* last = nullptr;
  real last_end = 0;

  real travel(const Facility& a, const Facility& b) const {
    return std::max(300.0, (a.location - b.location).norm() / spec.travel_speed);
  }
  void add(const Facility& f, real start, real end) {
    out.push_back({agent, start, EventKind::Start, f.id, f.category, f.location});
    out.push_back({agent, end, EventKind::End, f.id, f.category, f.location});
    last = &f;
    last_end = end;
  }
  // stay at `f` from arrival for `duration`; false if the day would overflow
  bool visit(const Facility& home, const Facility& f, real depart, real duration) {
    const real arrive = depart + travel(*last, f);
    const real end = arrive + duration;
    if (end + travel(f, home) >= kSecondsPerDay - 60) return false;
    add(f, arrive, end);
    return true;
  }
};
}  // namespace

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed, 0);
  SynthData data;
  const int n_homes = (spec.n_agents + spec.household_size - 1) / spec.household_size;
  const int inner_homes = static_cast<int>(std::lround(n_homes * spec.inner_home_fraction));
  int next_id = 0;
  data.home_in_inner.resize(static_cast<std::size_t>(spec.n_agents));
  for (int h = 0; h < n_homes; ++h) {
    const bool in = h < inner_homes;
    data.facilities.push_back({next_id++, ActivityCategory::Home,
                               in ? uniform_in(spec.inner, rng) : uniform_outside(spec.outer, spec.inner, rng), 1});
  }
  // [category][region: 0 inner, 1 outer] -> facility indices
  std::array<std::array<std::vector<std::size_t>, 2>, 5> pools;
  auto make = [&](ActivityCategory c, int count) {
    for (int region = 0; region < 2; ++region)
      for (int k = 0; k < count; ++k) {
        const Vec2 p = region == 0 ? uniform_in(spec.inner, rng) : uniform_outside(spec.outer, spec.inner, rng);
        pools[static_cast<std::size_t>(c)][static_cast<std::size_t>(region)].push_back(data.facilities.size());
        data.facilities.push_back({next_id++, c, p, 1});
      }
  };
  make(ActivityCategory::Work, spec.work_facilities);
  make(ActivityCategory::School, spec.schools);
  make(ActivityCategory::Leisure, spec.leisure_facilities);
  auto pick = [&](ActivityCategory c, int region) -> const Facility& {
    const auto& pool = pools[static_cast<std::size_t>(c)][static_cast<std::size_t>(region)];
    return data.facilities[pool[uniform_index(rng, pool.size())]];
  };
  auto pick_leisure = [&]() -> const Facility& {
    return pick(ActivityCategory::Leisure, uniform01(rng) < 0.5 ? 0 : 1);
  };

  for (int a = 0; a < spec.n_agents; ++a) {
    const auto home_idx = static_cast<std::size_t>(a / spec.household_size);
    const Facility& home = data.facilities[home_idx];
    data.home_in_inner[static_cast<std::size_t>(a)] = static_cast<int>(home_idx) < inner_homes ? 1 : 0;
    const bool worker = uniform01(rng) < spec.worker_fraction;
    const bool pupil = worker && uniform01(rng) < spec.school_fraction;
    const int region = uniform01(rng) < spec.commuting_fraction ? 0 : 1;
    const Facility* main = nullptr;
    if (worker) main = &pick(pupil ? ActivityCategory::School : ActivityCategory::Work, region);

    for (int d = 0; d < kNumDayTypes; ++d) {
      const auto type = static_cast<DayType>(d);
      auto& out = data.events[static_cast<std::size_t>(d)];
      std::vector<MobilityEvent> plan;
      Builder b{a, plan, spec};
      b.last = &home;
      // draws happen unconditionally so every agent consumes the same amount
      const real u_leave = uniform01(rng), u_dur = uniform01(rng), u_leisure = uniform01(rng);
      const real u_lstart = uniform01(rng), u_ldur = uniform01(rng);
      const Facility& leisure = pick_leisure();
      const bool weekday = type == DayType::Weekday;
      const bool go_leisure = u_leisure < (weekday ? spec.weekday_leisure_probability : spec.weekend_leisure_probability);

      real home_end = kSecondsPerDay;
      std::vector<MobilityEvent> away;
      Builder w{a, away, spec};
      w.last = &home;
      if (weekday && main) {
        const real leave = pupil ? 7.25 * kHour + 0.5 * kHour * u_leave : 6 * kHour + 2 * kHour * u_leave;
        const real duration = pupil ? 5.5 * kHour + kHour * u_dur : 7 * kHour + 2 * kHour * u_dur;
        if (w.visit(home, *main, leave, duration)) {
          home_end = leave;
          if (go_leisure) w.visit(home, leisure, w.last_end, kHour + kHour * u_ldur);
        }
      } else if (go_leisure) {
        const real leave = 10 * kHour + 6 * kHour * u_lstart;
        if (w.visit(home, leisure, leave, kHour + 2 * kHour * u_ldur)) home_end = leave;
      }
      if (away.empty()) {
        b.add(home, 0, kSecondsPerDay);
      } else {
        b.add(home, 0, home_end);
        plan.insert(plan.end(), away.begin(), away.end());
        const real back = w.last_end + w.travel(*w.last, home);
        plan.push_back({a, back, EventKind::Start, home.id, home.category, home.location});
        plan.push_back({a, kSecondsPerDay, EventKind::End, home.id, home.category, home.location});
      }
      out.insert(out.end(), plan.begin(), plan.end());
    }
  }
  for (auto& ev : data.events) validate_events(ev);

  data.mesh = make_rectangle_mesh(spec.inner.min(), spec.inner.max(), spec.mesh_nx, spec.mesh_ny);
  const WeekPlans week(data.events[0], data.events[1], data.events[2]);
  data.occupancy = occupancy_from_plans(week, data.mesh);

  std::vector<ActivityDay> days;
  for (int d = 0; d < spec.num_days; ++d) {
    real pct = spec.reduced_out_of_home;
    if (d < spec.reduction_day) pct = spec.reduction_day > 0 ? spec.reduced_out_of_home * d / spec.reduction_day : pct;
    days.push_back({spec.start.plus_days(d), -pct / 2, pct});
  }
  data.activity = ActivitySchedule(std::move(days));
  return data;
}

void write_synth(const SynthData& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  write_text_file(dir / "facilities.csv", facilities_to_csv(data.facilities));
  for (int d = 0; d < kNumDayTypes; ++d)
    write_text_file(dir / ("events_" + std::string(to_string(static_cast<DayType>(d))) + ".csv"),
                    events_to_csv(data.events[static_cast<std::size_t>(d)]));
  write_text_file(dir / "occupancy.csv", occupancy_to_csv(data.occupancy));
  write_text_file(dir / "activity.csv", activity_to_csv(data.activity));
  save_triangle_mesh(data.mesh, dir / "mesh");
}

}  // namespace hepi
