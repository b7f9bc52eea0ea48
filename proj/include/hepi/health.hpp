#ifndef HEPI_HEALTH_HPP
#define HEPI_HEALTH_HPP

#include "hepi/common.hpp"

#include <array>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

namespace hepi {

/// The eight compartments: susceptible, exposed, infectious (pre-symptomatic),
/// symptomatic, hospitalized, critical, hospitalized after critical, recovered.
enum class HealthState : std::uint8_t { S = 0, E, I, SY, H, C, HC, R };

constexpr int kNumStates = 8;
constexpr std::array<HealthState, kNumStates> kAllStates{HealthState::S,  HealthState::E, HealthState::I,
                                                         HealthState::SY, HealthState::H, HealthState::C,
                                                         HealthState::HC, HealthState::R};

constexpr int index_of(HealthState s) { return static_cast<int>(s); }
constexpr bool is_infectious(HealthState s) { return s == HealthState::I || s == HealthState::SY; }

std::string_view to_string(HealthState s);
HealthState parse_health_state(std::string_view text);

using StateCounts = std::array<real, kNumStates>;

/// One piece of a piecewise-constant calibration constant, valid from `start`
/// until the next interval begins.
struct BetaInterval {
  Date start;
  real value = 0;
};

class BetaSchedule {
 public:
  BetaSchedule() = default;
  explicit BetaSchedule(std::vector<BetaInterval> intervals);

  /// Value in force on `day`; days before the first interval use the first value.
  real at(const Date& day) const;
  const std::vector<BetaInterval>& intervals() const { return intervals_; }
  bool empty() const { return intervals_.empty(); }

 private:
  std::vector<BetaInterval> intervals_;
};

/// Transition rates (1/day) shared by the agent-based and continuum models,
/// the diffusion coefficient (m^2/day) and the fitted infection constant.
struct RateSet {
  real sigma = 0;   // E -> I
  real gamma = 0;   // I -> SY
  real eta = 0;     // SY -> H
  real kappa = 0;   // H -> C
  real eta_c = 0;   // C -> HC
  real phi_i = 0;   // I -> R
  real phi_sy = 0;  // SY -> R
  real phi_h = 0;   // H -> R
  real phi_hc = 0;  // HC -> R
  BetaSchedule beta;
  real diffusion = 0;

  void validate() const;
};

/// Progression rates used in both model halves for the 25% and 100% runs.
RateSet published_rates();

/// An outgoing edge of the compartment graph.
struct Transition {
  HealthState to;
  real rate;
};

/// Outgoing rate-driven edges of `from` (every rule except infection of S).
/// At most two edges per state.
struct OutgoingRates {
  std::array<Transition, 2> edges{};
  int count = 0;
  real total() const;
};

OutgoingRates outgoing_rates(HealthState from, const RateSet& rates);

/// True iff `from -> to` is one of the ten rules of the compartment graph.
bool is_allowed_transition(HealthState from, HealthState to);

/// Draws whether an agent with the given outgoing edges changes state within
/// `dt` (probability 1 - exp(-dt * total)) and, if so, which edge fires
/// (probability proportional to its rate).
std::optional<HealthState> sample_transition(const OutgoingRates& out, real dt, Rng& rng);

/// Applies one step of rate-driven progression to every non-susceptible state.
/// Susceptibles are left untouched; their infection is handled by the caller.
void step_health_states(std::span<HealthState> states, const RateSet& rates, real dt, Rng& rng);

}  // namespace hepi

#endif  // HEPI_HEALTH_HPP
