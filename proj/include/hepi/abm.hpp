#ifndef HEPI_ABM_HPP
#define HEPI_ABM_HPP

#include "hepi/common.hpp"
#include "hepi/health.hpp"
#include "hepi/mobility.hpp"

#include <map>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

namespace hepi {

enum class AgentMode : std::uint8_t { InFacility, Commuting, InPdeDomain };

struct Agent {
  int id = 0;
  HealthState health = HealthState::S;
  Vec2 position = Vec2::Zero();
  AgentMode mode = AgentMode::InFacility;
  int facility_id = -1;
  // travel window while commuting (seconds, same origin as the plan)
  Vec2 travel_from = Vec2::Zero();
  Vec2 travel_to = Vec2::Zero();
  real depart_s = 0;
  real arrive_s = 0;
  real state_entry_time = 0;  // days since simulation start
  real pending_hazard = 0;    // accumulated while inside a facility
};

/// Moves every agent to its position at `t_end_s`: facility location while
/// inside, straight-line interpolation by elapsed travel fraction while
/// commuting. Agents absorbed into the continuum are left untouched.
void advance_positions(std::span<Agent> agents, real t_end_s);

/// Cuts an event stream into chunks [k dt, (k+1) dt). Events at exactly the
/// final boundary close the last chunk. Every agent that is between its first
/// and last event but has no event inside a chunk receives one artificial
/// `Continue` event at the chunk start carrying its position and facility
/// (-1 while travelling).
std::vector<std::vector<MobilityEvent>> slice_events(std::span<const MobilityEvent> events, real dt_days);

/// Maximum simultaneous occupancy per facility (ends processed before starts
/// at equal times). Throws on an End without a matching Start.
std::map<int, int> estimate_room_sizes(std::span<const MobilityEvent> events);

/// Randomly removes out-of-home activities: on day k (= floor(start / 1 day))
/// every non-home activity is dropped with probability -pct[k] / 100 when
/// pct[k] < 0. Days beyond the schedule and non-negative rates keep all.
std::vector<MobilityEvent> apply_activity_reduction(std::span<const MobilityEvent> events,
                                                    std::span<const real> out_of_home_pct_by_day, Rng& rng);

/// Drops every school activity starting on or after day `closure_day`.
std::vector<MobilityEvent> apply_school_closures(std::span<const MobilityEvent> events, int closure_day);

/// beta_const * (co-present infectious / room size) * overlap (days).
real infection_hazard(real co_present_infectious, real room_size, real overlap_days, real beta_const);
inline real infection_probability(real hazard) { return -std::expm1(-hazard); }

/// Per-day inputs of the agent-based engine.
struct AbmSettings {
  RateSet rates;  // progression rates plus the beta_const schedule
  Date start_date;
  int steps_per_day = 48;
  std::optional<Date> school_closure;
  ActivitySchedule activity;
};

/// Facility-confined transmission on trajectory plans.
///
/// One engine per run. Plans of every id are rebuilt each day (activity
/// reductions and school closures applied with a dedicated random stream) so
/// that the random sequence does not depend on which agents are active.
class AbmEngine {
 public:
  AbmEngine(const WeekPlans& plans, std::span<const Facility> facilities, AbmSettings settings, std::uint64_t seed);

  int num_agents() const { return static_cast<int>(agents_.size()); }
  const std::vector<Agent>& agents() const { return agents_; }
  const Agent& agent(int id) const { return agents_[static_cast<std::size_t>(id)]; }
  bool is_active(int id) const { return active_[static_cast<std::size_t>(id)]; }
  int num_active() const { return num_active_; }

  /// Rebuilds today's plans; must be called before the first step of each day.
  void begin_day(int day);
  /// Advances all active agents by one step of the current day.
  void step(int step_in_day);

  void set_health(int id, HealthState s, real time_days = 0);
  /// Marks the agent as absorbed by the continuum; its hazard is discarded.
  void deactivate(int id);
  /// Re-activates a plan id at today's plan position for time `t_s` of the day.
  void activate(int id, HealthState s, real t_s);

  PlanPosition plan_position(int id, real t_s) const;
  const std::vector<Activity>& today_plan(int id) const { return today_[static_cast<std::size_t>(id)]; }

  real dt_days() const { return 1.0 / settings_.steps_per_day; }
  int current_day() const { return day_; }
  const Facility& facility(int id) const;
  const std::unordered_map<int, int>& facility_index() const { return facility_index_; }
  std::array<int, kNumStates> state_counts() const;
  Rng& health_rng() { return health_rng_; }

 private:
  void place(Agent& a, real t_s) const;

  const WeekPlans* plans_;
  AbmSettings settings_;
  std::vector<Facility> facilities_;
  std::unordered_map<int, int> facility_index_;
  std::vector<Agent> agents_;
  std::vector<bool> active_;
  int num_active_ = 0;
  std::vector<std::vector<Activity>> today_;
  std::vector<std::size_t> cursor_;
  int day_ = -1;
  real beta_today_ = 0;
  Rng health_rng_;
  Rng plan_rng_;
  // scratch
  std::vector<real> infectious_presence_;
  struct Presence {
    int agent;
    int facility;
    real overlap_s;
  };
  std::vector<Presence> presence_;
};

/// Today's stays after reductions, with consecutive stays at one facility
/// merged (the agent remains inside during the gap).
std::vector<Activity> reduce_plan(std::span<const Activity> plan, real removal_probability, bool schools_closed,
                                  Rng& rng);

}  // namespace hepi

#endif  // HEPI_ABM_HPP
