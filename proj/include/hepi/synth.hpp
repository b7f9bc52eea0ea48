#ifndef HEPI_SYNTH_HPP
#define HEPI_SYNTH_HPP

#include "hepi/coupling.hpp"
#include "hepi/mesh.hpp"
#include "hepi/mobility.hpp"

#include <filesystem>

namespace hepi {

/// Synthetic population on a rectangular area with an inner rectangle that
/// serves as the continuum region.
struct SynthSpec {
  int n_agents = 1000;
  Box2 outer{Vec2(0, 0), Vec2(20000, 20000)};  // metres
  Box2 inner{Vec2(7000, 7000), Vec2(13000, 13000)};
  int household_size = 2;
  /// Share of homes placed inside the inner rectangle.
  real inner_home_fraction = 0.25;
  /// Probability that an agent's work or school facility lies inside the
  /// inner rectangle (for outer residents this is a cross-boundary commute).
  real commuting_fraction = 0.2;
  /// Share of agents with a weekday work or school activity.
  real worker_fraction = 0.8;
  /// Share of those with school instead of work.
  real school_fraction = 0.2;
  real weekday_leisure_probability = 0.3;
  real weekend_leisure_probability = 0.6;
  // facilities per region (inner and outer each)
  int work_facilities = 20;
  int schools = 5;
  int leisure_facilities = 10;
  real travel_speed = 5.0;  // m/s
  // continuum mesh resolution
  int mesh_nx = 10;
  int mesh_ny = 10;
  // activity schedule template
  Date start = Date::parse("2020-03-02");
  int num_days = 58;
  int reduction_day = 14;           // first day of the reduced level
  real reduced_out_of_home = -40;   // percent
  std::uint64_t seed = 1;

  void validate() const;
};

struct SynthData {
  std::vector<Facility> facilities;
  std::array<std::vector<MobilityEvent>, kNumDayTypes> events;
  OccupancySchedule occupancy;
  ActivitySchedule activity;
  TriMesh mesh;
  std::vector<int> home_in_inner;  // per agent: 1 when the home lies in the inner rectangle
};

SynthData generate(const SynthSpec& spec);

/// Writes facilities.csv, events_{weekday,saturday,sunday}.csv, occupancy.csv,
/// activity.csv and mesh.{node,ele,poly} into `dir`.
void write_synth(const SynthData& data, const std::filesystem::path& dir);

}  // namespace hepi

#endif  // HEPI_SYNTH_HPP
