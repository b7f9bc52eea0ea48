#include "hepi/langevin.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

namespace hepi {

namespace {
constexpr int kReflectAttempts = 100;

Vec2 normal2(Rng& rng) {
  std::normal_distribution<real> n01;
  const real a = n01(rng);
  return {a, n01(rng)};
}
}  // namespace

void step_langevin(std::span<LangevinAgent> agents, const GradientFn& grad_v, const Box2& domain, real diffusion,
                   real dt, Rng& rng) {
  if (!(dt > 0)) throw Error("step_langevin: dt must be positive");
  if (diffusion < 0) throw Error("step_langevin: negative diffusion");
  const real noise = std::sqrt(2 * diffusion * dt);
  for (auto& a : agents) {
    const Vec2 drift = a.x - dt * grad_v(a.x);
    Vec2 next = drift + noise * normal2(rng);
    for (int k = 1; k < kReflectAttempts && !domain.contains(next); ++k) next = drift + noise * normal2(rng);
    if (!domain.contains(next)) next = next.cwiseMax(domain.min()).cwiseMin(domain.max());
    a.x = next;
  }
}

void step_langevin(std::span<LangevinAgent> agents, const Raster& v, real diffusion, real dt, Rng& rng) {
  step_langevin(
      agents, [&v](const Vec2& p) { return v.interpolate_gradient(p); }, v.extent(), diffusion, dt, rng);
}

bool ContactGraph::connected(int i, int j) const {
  const auto& n = neighbours.at(static_cast<std::size_t>(i));
  return std::binary_search(n.begin(), n.end(), j);
}

std::size_t ContactGraph::num_edges() const {
  std::size_t s = 0;
  for (const auto& n : neighbours) s += n.size();
  return s / 2;
}

ContactGraph contact_graph(std::span<const LangevinAgent> agents, real radius) {
  if (!(radius > 0)) throw Error("contact_graph: radius must be positive");
  ContactGraph g;
  g.radius = radius;
  g.neighbours.resize(agents.size());
  if (agents.empty()) return g;
  auto key = [radius](const Vec2& p) {
    const auto cx = static_cast<std::int64_t>(std::floor(p.x() / radius));
    const auto cy = static_cast<std::int64_t>(std::floor(p.y() / radius));
    return std::pair{cx, cy};
  };
  struct Hash {
    std::size_t operator()(const std::pair<std::int64_t, std::int64_t>& k) const {
      return std::hash<std::int64_t>()(k.first * 73856093LL ^ k.second * 19349663LL);
    }
  };
  std::unordered_map<std::pair<std::int64_t, std::int64_t>, std::vector<int>, Hash> buckets;
  for (std::size_t i = 0; i < agents.size(); ++i) buckets[key(agents[i].x)].push_back(static_cast<int>(i));
  const real r2 = radius * radius;
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const auto [cx, cy] = key(agents[i].x);
    auto& out = g.neighbours[i];
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy) {
        const auto it = buckets.find({cx + dx, cy + dy});
        if (it == buckets.end()) continue;
        for (int j : it->second)
          if (static_cast<std::size_t>(j) != i &&
              (agents[i].x - agents[static_cast<std::size_t>(j)].x).squaredNorm() <= r2)
            out.push_back(j);
      }
    std::sort(out.begin(), out.end());
  }
  return g;
}

void step_states_spatial(std::span<LangevinAgent> agents, const ContactGraph& graph, const RateSet& rates,
                         real beta_spatial, real dt, Rng& rng) {
  if (!(dt > 0)) throw Error("step_states_spatial: dt must be positive");
  if (graph.neighbours.size() != agents.size()) throw Error("step_states_spatial: graph does not match agents");
  std::vector<int> infectious_neighbours(agents.size(), 0);
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].health != HealthState::S) continue;
    for (int j : graph.neighbours[i])
      if (is_infectious(agents[static_cast<std::size_t>(j)].health)) ++infectious_neighbours[i];
  }
  for (std::size_t i = 0; i < agents.size(); ++i) {
    auto& a = agents[i];
    OutgoingRates out;
    if (a.health == HealthState::S) {
      if (infectious_neighbours[i] == 0 || beta_spatial <= 0) continue;
      out.edges[0] = {HealthState::E, beta_spatial * infectious_neighbours[i]};
      out.count = 1;
    } else {
      out = outgoing_rates(a.health, rates);
    }
    if (const auto next = sample_transition(out, dt, rng)) a.health = *next;
  }
}

std::vector<Vec2> sample_p1_density(const TriMesh& mesh, const NodalField& density, std::size_t n, Rng& rng) {
  if (density.size() != mesh.num_nodes()) throw Error("sample_p1_density: size mismatch");
  if ((density.array() < 0).any()) throw Error("sample_p1_density: negative density");
  const auto& tris = mesh.triangles();
  std::vector<real> cumulative(static_cast<std::size_t>(mesh.num_triangles()));
  real acc = 0;
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    acc += mesh.triangle_areas()[t] * (density[tris(0, t)] + density[tris(1, t)] + density[tris(2, t)]) / 3.0;
    cumulative[static_cast<std::size_t>(t)] = acc;
  }
  if (!(acc > 0)) throw Error("sample_p1_density: density integrates to zero");
  std::vector<Vec2> out;
  out.reserve(n);
  for (std::size_t k = 0; k < n; ++k) {
    const real u = uniform01(rng) * acc;
    const auto t = static_cast<int>(std::min<std::ptrdiff_t>(
        std::upper_bound(cumulative.begin(), cumulative.end(), u) - cumulative.begin(), mesh.num_triangles() - 1));
    // vertex chosen by its nodal value, then barycentric ~ Dirichlet(2,1,1) about it
    const real w0 = density[tris(0, t)], w1 = density[tris(1, t)], w2 = density[tris(2, t)];
    const real pick = uniform01(rng) * (w0 + w1 + w2);
    const int v = pick < w0 ? 0 : (pick < w0 + w1 ? 1 : 2);
    std::array<real, 3> g{};
    for (int c = 0; c < 3; ++c) {
      g[static_cast<std::size_t>(c)] = -std::log1p(-uniform01(rng));
      if (c == v) g[static_cast<std::size_t>(c)] += -std::log1p(-uniform01(rng));
    }
    const real s = g[0] + g[1] + g[2];
    out.push_back((g[0] * mesh.node(tris(0, t)) + g[1] * mesh.node(tris(1, t)) + g[2] * mesh.node(tris(2, t))) / s);
  }
  return out;
}

NodalField bin_to_nodes(const TriMesh& mesh, std::span<const Vec2> points) {
  NodalField h = NodalField::Zero(mesh.num_nodes());
  for (const auto& p : points) h[mesh.nearest_node(p)] += 1;
  if (!points.empty()) h /= static_cast<real>(points.size());
  return h;
}

FokkerPlanckResult compare_to_pde(const FokkerPlanckCase& c) {
  if (c.n_agents == 0) throw Error("compare_to_pde: need at least one agent");
  if (!(c.horizon >= 0)) throw Error("compare_to_pde: negative horizon");
  Rng rng = make_rng(c.seed, 0);
  const auto start = sample_p1_density(c.mesh, c.initial_density, c.n_agents, rng);
  std::vector<LangevinAgent> agents(start.size());
  for (std::size_t i = 0; i < start.size(); ++i) agents[i].x = start[i];
  const Box2 domain = c.mesh.bounding_box();
  const GradientFn zero = [](const Vec2&) { return Vec2(Vec2::Zero()); };
  const GradientFn& grad = c.grad_v ? c.grad_v : zero;
  if (c.horizon > 0) {
    const auto n_sde = static_cast<int>(std::ceil(c.horizon / c.dt_particles - 1e-9));
    const real dt = c.horizon / n_sde;
    for (int k = 0; k < n_sde; ++k) step_langevin(agents, grad, domain, c.diffusion, dt, rng);
  }

  NodalVectors nodal(2, c.mesh.num_nodes());
  for (int i = 0; i < c.mesh.num_nodes(); ++i) nodal.col(i) = grad(c.mesh.node(i));
  CompartmentField field;
  field.values = Eigen::MatrixXd::Zero(c.mesh.num_nodes(), kNumStates);
  field.values.col(0) = c.initial_density;
  if (c.horizon > 0) {
    const auto n_pde = static_cast<int>(std::ceil(c.horizon / c.dt_continuum - 1e-9));
    PdeSolver solver(c.mesh, assemble(c.mesh, nodal, c.diffusion, c.form), c.horizon / n_pde);
    RateSet none;
    for (int k = 0; k < n_pde; ++k) solver.step(field, 0.0, none);
  }
  FokkerPlanckResult r;
  std::vector<Vec2> end(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) end[i] = agents[i].x;
  r.particle_fraction = bin_to_nodes(c.mesh, end);
  r.continuum_fraction = c.mesh.lumped_mass().cwiseProduct(field.values.col(0));
  r.continuum_fraction /= r.continuum_fraction.sum();
  r.l1 = (r.particle_fraction - r.continuum_fraction).cwiseAbs().sum();
  return r;
}

std::string histogram_csv(const TriMesh& mesh, const FokkerPlanckResult& r) {
  std::ostringstream os;
  os << "node_id,x,y,particles,continuum\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    os << i << ',' << format_real(mesh.node(i).x()) << ',' << format_real(mesh.node(i).y()) << ','
       << format_real(r.particle_fraction[i]) << ',' << format_real(r.continuum_fraction[i]) << '\n';
  return os.str();
}

}  // namespace hepi
