#include "hepi/health.hpp"

#include <algorithm>
#include <cmath>

namespace hepi {

namespace {
constexpr std::array<std::string_view, kNumStates> kNames{"S", "E", "I", "SY", "H", "C", "HC", "R"};
}

std::string_view to_string(HealthState s) { return kNames[static_cast<std::size_t>(index_of(s))]; }

HealthState parse_health_state(std::string_view text) {
  text = trim(text);
  for (int i = 0; i < kNumStates; ++i)
    if (kNames[static_cast<std::size_t>(i)] == text) return static_cast<HealthState>(i);
  throw Error("unknown health state '" + std::string(text) + "'");
}

BetaSchedule::BetaSchedule(std::vector<BetaInterval> intervals) : intervals_(std::move(intervals)) {
  for (std::size_t i = 1; i < intervals_.size(); ++i)
    if (!(intervals_[i - 1].start < intervals_[i].start))
      throw Error("beta intervals must be strictly ordered by start date");
  for (const auto& iv : intervals_)
    if (!(iv.value >= 0)) throw Error("beta values must be non-negative");
}

real BetaSchedule::at(const Date& day) const {
  if (intervals_.empty()) return 0;
  real v = intervals_.front().value;
  for (const auto& iv : intervals_) {
    if (iv.start <= day) v = iv.value;
    else break;
  }
  return v;
}

void RateSet::validate() const {
  for (real r : {sigma, gamma, eta, kappa, eta_c, phi_i, phi_sy, phi_h, phi_hc, diffusion})
    if (!(r >= 0) || !std::isfinite(r)) throw Error("rates must be finite and non-negative");
}

RateSet published_rates() {
  RateSet r;
  r.sigma = 1.0 / 3.5;
  r.gamma = 1.0 / 2.0;
  r.eta = 1.0 / 4.0;
  r.kappa = 1.0;
  r.eta_c = 1.0 / 21.0;
  r.phi_i = 1.0 / 4.0;
  r.phi_sy = 1.0 / 8.0;
  r.phi_h = 1.0 / 14.0;
  r.phi_hc = 1.0 / 7.0;
  r.diffusion = 1e-6;
  return r;
}

real OutgoingRates::total() const {
  real t = 0;
  for (int i = 0; i < count; ++i) t += edges[static_cast<std::size_t>(i)].rate;
  return t;
}

OutgoingRates outgoing_rates(HealthState from, const RateSet& r) {
  using enum HealthState;
  OutgoingRates out;
  auto add = [&](HealthState to, real rate) { out.edges[static_cast<std::size_t>(out.count++)] = {to, rate}; };
  switch (from) {
    case E: add(I, r.sigma); break;
    case I: add(R, r.phi_i); add(SY, r.gamma); break;
    case SY: add(R, r.phi_sy); add(H, r.eta); break;
    case H: add(R, r.phi_h); add(C, r.kappa); break;
    case C: add(HC, r.eta_c); break;
    case HC: add(R, r.phi_hc); break;
    case S:
    case R: break;
  }
  return out;
}

bool is_allowed_transition(HealthState from, HealthState to) {
  using enum HealthState;
  switch (from) {
    case S: return to == E;
    case E: return to == I;
    case I: return to == R || to == SY;
    case SY: return to == R || to == H;
    case H: return to == R || to == C;
    case C: return to == HC;
    case HC: return to == R;
    case R: return false;
  }
  return false;
}

std::optional<HealthState> sample_transition(const OutgoingRates& out, real dt, Rng& rng) {
  const real total = out.total();
  if (out.count == 0 || total <= 0) return std::nullopt;
  const real p = -std::expm1(-dt * total);
  if (uniform01(rng) >= p) return std::nullopt;
  if (out.count == 1) return out.edges[0].to;
  real u = uniform01(rng) * total;
  for (int i = 0; i < out.count - 1; ++i) {
    const auto& e = out.edges[static_cast<std::size_t>(i)];
    if (u < e.rate) return e.to;
    u -= e.rate;
  }
  return out.edges[static_cast<std::size_t>(out.count - 1)].to;
}

void step_health_states(std::span<HealthState> states, const RateSet& rates, real dt, Rng& rng) {
  if (!(dt > 0)) throw Error("step_health_states: dt must be positive");
  for (auto& s : states) {
    if (s == HealthState::S) continue;
    if (auto next = sample_transition(outgoing_rates(s, rates), dt, rng)) s = *next;
  }
}

}  // namespace hepi
