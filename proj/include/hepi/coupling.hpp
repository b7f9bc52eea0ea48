#ifndef HEPI_COUPLING_HPP
#define HEPI_COUPLING_HPP

#include "hepi/abm.hpp"
#include "hepi/landscape.hpp"
#include "hepi/pde.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace hepi {

/// Nodal density equivalent to one person: 3 / fan_area(node).
NodalField epsilon_weights(const TriMesh& mesh);

/// Deposits one person in state `s` at the node nearest to `position`.
/// Returns the node. Throws if the position lies outside the mesh.
int agent_to_density(CompartmentField& field, const TriMesh& mesh, const NodalField& epsilon, const Vec2& position,
                     HealthState s);

/// Expected number of persons inside the continuum region at every full hour
/// of each day type. Hour 24 wraps to hour 0 of the same day type.
class OccupancySchedule {
 public:
  using Day = std::array<real, 24>;

  OccupancySchedule() = default;
  explicit OccupancySchedule(std::array<Day, kNumDayTypes> hourly);

  /// Occupancy at `t_s` seconds into a day of type `type`, linearly
  /// interpolated between hours.
  real at(DayType type, real t_s) const;
  const Day& day(DayType type) const { return hourly_[static_cast<std::size_t>(type)]; }

 private:
  std::array<Day, kNumDayTypes> hourly_{};
};

/// max(0, occ(t) - occ(t + dt)); both arguments in seconds.
real expected_outflow(const OccupancySchedule& schedule, DayType type, real t_s, real dt_s);

/// Hourly occupancy computed directly from the plans: number of plans whose
/// position at each full hour lies inside the mesh.
OccupancySchedule occupancy_from_plans(const WeekPlans& week, const TriMesh& mesh);

// CSV: `day_type,hour,expected_persons` with day_type weekday|saturday|sunday.
OccupancySchedule parse_occupancy_csv(std::string_view text, const std::string& source = "occupancy");
std::string occupancy_to_csv(const OccupancySchedule& schedule);

struct OutflowSplit {
  std::array<int, kNumStates> counts{};
  /// Persons moved from S to another compartment because S had too little mass.
  int susceptible_deficit = 0;
};

/// Sum over compartments of the whole persons each holds (floor of its mass).
int whole_persons(const StateCounts& masses);

/// Splits `n_out` persons over the compartments: floor(n * m_c / sum m),
/// remainder to S; if S then exceeds its mass, the excess is taken one person
/// at a time from the compartment with the largest remaining mass. Throws
/// when `n_out` exceeds whole_persons(masses).
OutflowSplit split_outflow(const StateCounts& masses, int n_out);

/// Removes `counts` persons from the field, scaling compartment c by
/// (m_c - count_c) / m_c.
void remove_persons(CompartmentField& field, const Eigen::VectorXd& lumped, const std::array<int, kNumStates>& counts);

/// Pool of plan ids currently represented by the continuum.
class FreeIdPool {
 public:
  void add(int id);
  void remove(int id);
  bool contains(int id) const;
  std::size_t size() const { return ids_.size(); }
  bool empty() const { return ids_.empty(); }
  const std::vector<int>& ids() const { return ids_; }

 private:
  std::vector<int> ids_;
  std::vector<int> where_;  // position in ids_ or -1
};

struct ExchangeRecord {
  int step = 0;
  real time_days = 0;
  int agents_absorbed = 0;
  int persons_emitted = 0;
  std::array<int, kNumStates> out{};
  int outflow_shortfall = 0;  // requested persons that could not be emitted
  int susceptible_deficit = 0;
  real clipped_mass = 0;
};

std::string exchange_log_header();
void append_exchange_csv(std::string& out, const ExchangeRecord& r);

struct HybridSettings {
  bool solve_pde = true;
  /// Continuum to agent transfer; off reproduces the one-way coupled variant.
  bool outflow = true;
  /// Remember the state of absorbed agents and prefer ids whose remembered
  /// state matches the emitted compartment.
  bool remember_reentry_state = false;
  BetaSchedule pde_beta;
  ReactionIntegrator integrator = ReactionIntegrator::RungeKutta4;
  DriftForm drift = DriftForm::Conservative;
};

/// Initial continuum content.
struct ContinuumInit {
  StateCounts totals{};
  NodalField distribution;  // integrates to one; empty means uniform
};

/// Agent-based model outside, continuum inside the mesh.
///
/// Plans whose first position of the first day lies inside the mesh start as
/// free ids represented by the continuum. Without a mesh the simulation is the
/// plain agent-based model.
class HybridSimulation {
 public:
  HybridSimulation(AbmEngine& engine, const TriMesh* mesh, const NodalVectors* grad_v, OccupancySchedule occupancy,
                   HybridSettings settings, const RateSet& rates, const ActivitySchedule& activity, Date start,
                   std::uint64_t seed);

  /// Plan ids absorbed at start; call once before `initialize_continuum`.
  const std::vector<int>& initially_absorbed() const { return initial_ids_; }
  void initialize_continuum(const ContinuumInit& init);

  void begin_day(int day);
  const ExchangeRecord& step(int step_in_day);

  bool has_continuum() const { return mesh_ != nullptr; }
  const CompartmentField& field() const { return field_; }
  StateCounts continuum_mass() const;
  int active_agents() const { return engine_->num_active(); }
  real population() const { return engine_->num_active() + sum(continuum_mass()); }
  const FreeIdPool& free_ids() const { return pool_; }
  const std::vector<ExchangeRecord>& log() const { return log_; }
  /// |population - reference| accumulated as maximum over steps.
  real max_population_drift() const { return max_drift_; }
  real reference_population() const { return reference_population_; }

 private:
  int pick_free_id(HealthState s, real t_s);

  AbmEngine* engine_;
  const TriMesh* mesh_;
  HybridSettings settings_;
  RateSet rates_;
  const ActivitySchedule* activity_;
  Date start_;
  OccupancySchedule occupancy_;
  std::optional<PdeSolver> solver_;
  NodalField epsilon_;
  CompartmentField field_;
  FreeIdPool pool_;
  std::vector<int> initial_ids_;
  std::vector<std::optional<HealthState>> remembered_;
  Rng rng_;
  int day_ = -1;
  int global_step_ = 0;
  real beta_today_ = 0;
  real carry_ = 0;
  real reference_population_ = 0;
  real max_drift_ = 0;
  std::vector<ExchangeRecord> log_;
};

}  // namespace hepi

#endif  // HEPI_COUPLING_HPP
