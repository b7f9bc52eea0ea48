#ifndef HEPI_LANGEVIN_HPP
#define HEPI_LANGEVIN_HPP

#include "hepi/health.hpp"
#include "hepi/landscape.hpp"
#include "hepi/pde.hpp"

#include <functional>
#include <span>
#include <vector>

namespace hepi {

struct LangevinAgent {
  Vec2 x = Vec2::Zero();
  HealthState health = HealthState::S;
};

using GradientFn = std::function<Vec2(const Vec2&)>;

/// Euler-Maruyama step of dX = -grad V dt + sqrt(2D) dB inside `domain`.
/// A proposal leaving the domain re-draws its noise (up to 100 times) and is
/// clamped to the box after that.
void step_langevin(std::span<LangevinAgent> agents, const GradientFn& grad_v, const Box2& domain, real diffusion,
                   real dt, Rng& rng);

/// Same with the bilinear raster gradient; the raster extent is the domain.
void step_langevin(std::span<LangevinAgent> agents, const Raster& v, real diffusion, real dt, Rng& rng);

/// Symmetric proximity graph: i ~ j iff i != j and |x_i - x_j| <= radius.
struct ContactGraph {
  real radius = 0;
  std::vector<std::vector<int>> neighbours;  // sorted ascending

  bool connected(int i, int j) const;
  std::size_t num_edges() const;
};

/// Grid-bucketed construction (cells of side `radius`).
ContactGraph contact_graph(std::span<const LangevinAgent> agents, real radius);

/// Infection of S at rate beta_spatial * (number of infectious neighbours);
/// every other state progresses along its outgoing rates. Neighbour counts are
/// taken before any agent changes state.
void step_states_spatial(std::span<LangevinAgent> agents, const ContactGraph& graph, const RateSet& rates,
                         real beta_spatial, real dt, Rng& rng);

/// Draws `n` positions from the piecewise-linear density given by nodal values.
std::vector<Vec2> sample_p1_density(const TriMesh& mesh, const NodalField& density, std::size_t n, Rng& rng);

/// Fraction of points per node, binning each point to its nearest node.
/// Points outside the mesh are binned to the nearest node as well.
NodalField bin_to_nodes(const TriMesh& mesh, std::span<const Vec2> points);

/// Setup of one particle / continuum comparison.
struct FokkerPlanckCase {
  TriMesh mesh;
  GradientFn grad_v;  // continuous gradient, drives the particles
  NodalField initial_density;
  real diffusion = 0;
  real horizon = 0;
  real dt_particles = 1e-3;
  real dt_continuum = 1e-2;
  std::size_t n_agents = 100000;
  std::uint64_t seed = 0;
  DriftForm form = DriftForm::Conservative;
};

struct FokkerPlanckResult {
  real l1 = 0;
  NodalField particle_fraction;
  NodalField continuum_fraction;
};

/// Evolves particles and the single-compartment continuum from the same
/// initial density; returns the L1 distance between the nearest-node particle
/// histogram and the lumped nodal masses of the continuum, both normalized.
FokkerPlanckResult compare_to_pde(const FokkerPlanckCase& c);

// CSV: `node_id,x,y,particles,continuum`.
std::string histogram_csv(const TriMesh& mesh, const FokkerPlanckResult& r);

}  // namespace hepi

#endif  // HEPI_LANGEVIN_HPP
