#include "hepi/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hepi {

namespace {
constexpr real kNaN = std::numeric_limits<real>::quiet_NaN();
constexpr std::array<real, kNumDayTypes> kDayWeights{5.0, 1.0, 1.0};
}  // namespace

Raster::Raster(const Vec2& o, real cs, int w, int h, real fill)
    : origin(o), cell_size(cs), width(w), height(h), values(Eigen::ArrayXd::Constant(static_cast<Eigen::Index>(w) * h, fill)) {
  validate();
}

void Raster::validate() const {
  if (!(cell_size > 0) || width <= 0 || height <= 0) throw Error("raster needs cell_size > 0 and positive extents");
  if (values.size() != static_cast<Eigen::Index>(width) * height) throw Error("raster value count mismatch");
}

std::optional<std::pair<int, int>> Raster::cell_of(const Vec2& p) const {
  const Vec2 rel = (p - origin) / cell_size;
  if (!(rel.x() >= 0 && rel.y() >= 0 && rel.x() <= width && rel.y() <= height)) return std::nullopt;
  return std::pair{std::min(static_cast<int>(rel.x()), width - 1), std::min(static_cast<int>(rel.y()), height - 1)};
}

namespace {
// Bilinear stencil between cell centres, clamped at the outer half cell.
struct Stencil {
  int x0, x1, y0, y1;
  real fx, fy;
  bool clamped_x, clamped_y;
};

Stencil stencil(const Raster& r, const Vec2& p) {
  const Vec2 rel = (p - r.origin) / r.cell_size;
  const real tol = 1e-9 * std::max(r.width, r.height);
  if (!(rel.x() >= -tol && rel.y() >= -tol && rel.x() <= r.width + tol && rel.y() <= r.height + tol)) {
    std::ostringstream os;
    os << "point (" << p.x() << ", " << p.y() << ") lies outside the raster extent";
    throw Error(os.str());
  }
  auto axis = [](real c, int n, int& a, int& b, real& f, bool& clamped) {
    const real u = c - 0.5;
    if (u <= 0) {
      a = b = 0;
      f = 0;
      clamped = true;
    } else if (u >= n - 1) {
      a = b = n - 1;
      f = 0;
      clamped = true;
    } else {
      a = static_cast<int>(std::floor(u));
      b = a + 1;
      f = u - a;
      clamped = false;
    }
  };
  Stencil s{};
  axis(rel.x(), r.width, s.x0, s.x1, s.fx, s.clamped_x);
  axis(rel.y(), r.height, s.y0, s.y1, s.fy, s.clamped_y);
  return s;
}
}  // namespace

real Raster::interpolate(const Vec2& p) const {
  const auto s = stencil(*this, p);
  const real v00 = at(s.x0, s.y0), v10 = at(s.x1, s.y0), v01 = at(s.x0, s.y1), v11 = at(s.x1, s.y1);
  return (1 - s.fx) * (1 - s.fy) * v00 + s.fx * (1 - s.fy) * v10 + (1 - s.fx) * s.fy * v01 + s.fx * s.fy * v11;
}

Vec2 Raster::interpolate_gradient(const Vec2& p) const {
  const auto s = stencil(*this, p);
  const real v00 = at(s.x0, s.y0), v10 = at(s.x1, s.y0), v01 = at(s.x0, s.y1), v11 = at(s.x1, s.y1);
  Vec2 g;
  g.x() = s.clamped_x ? 0 : ((1 - s.fy) * (v10 - v00) + s.fy * (v11 - v01)) / cell_size;
  g.y() = s.clamped_y ? 0 : ((1 - s.fx) * (v01 - v00) + s.fx * (v11 - v10)) / cell_size;
  return g;
}

Raster build_histogram(const WeekPlans& week, const Raster& grid) {
  Raster h = grid;
  h.values.setZero();
  std::vector<Vec2> outside;
  for (int d = 0; d < kNumDayTypes; ++d)
    for (const auto& e : week.events(static_cast<DayType>(d)))
      if (!h.cell_of(e.location)) outside.push_back(e.location);
  if (!outside.empty()) {
    std::ostringstream os;
    os << outside.size() << " event location(s) outside the histogram grid:";
    for (std::size_t i = 0; i < std::min<std::size_t>(outside.size(), 10); ++i)
      os << " (" << outside[i].x() << ", " << outside[i].y() << ")";
    if (outside.size() > 10) os << " ...";
    throw Error(os.str());
  }
  for (int d = 0; d < kNumDayTypes; ++d) {
    const auto type = static_cast<DayType>(d);
    for (int id = 0; id < week.num_plans(); ++id) {
      const auto& plan = week.plan(type, id);
      if (plan.empty()) continue;
      for (int hour = 0; hour < 24; ++hour) {
        const auto pos = position_at(plan, hour * 3600.0);
        const auto cell = h.cell_of(pos.position);
        if (!cell) throw Error("interpolated agent position outside the histogram grid");
        h.at(cell->first, cell->second) += kDayWeights[static_cast<std::size_t>(d)];
      }
    }
  }
  for (auto& v : h.values)
    if (v == 0) v = kNaN;
  return h;
}

Raster histogram_to_potential(const Raster& histogram, real diffusion) {
  real total = 0;
  for (real v : histogram.values)
    if (!std::isnan(v) && v > 0) total += v;
  if (!(total > 0)) throw Error("histogram has no visited cell");
  Raster out = histogram;
  for (auto& v : out.values) v = (!std::isnan(v) && v > 0) ? -(diffusion / 2) * std::log(v / total) : kNaN;
  return out;
}

Raster fill_unvisited(const Raster& v) {
  real mx = -std::numeric_limits<real>::infinity();
  for (real x : v.values)
    if (!std::isnan(x)) mx = std::max(mx, x);
  if (!std::isfinite(mx)) throw Error("raster has no data cell to fill from");
  Raster out = v;
  for (auto& x : out.values)
    if (std::isnan(x)) x = mx;
  return out;
}

NodalField raster_to_mesh(const Raster& v, const TriMesh& mesh) {
  NodalField out(mesh.num_nodes());
  for (int i = 0; i < mesh.num_nodes(); ++i) out[i] = v.interpolate(mesh.node(i));
  return out;
}

NodalVectors nodal_gradient(const TriMesh& mesh, const NodalField& field) {
  if (field.size() != mesh.num_nodes()) throw Error("nodal_gradient: field size does not match the mesh");
  NodalVectors acc = NodalVectors::Zero(2, mesh.num_nodes());
  Eigen::VectorXd weight = Eigen::VectorXd::Zero(mesh.num_nodes());
  const auto& tris = mesh.triangles();
  for (int t = 0; t < mesh.num_triangles(); ++t) {
    const auto g = mesh.hat_gradients(t);
    const Vec2 grad = g.col(0) * field[tris(0, t)] + g.col(1) * field[tris(1, t)] + g.col(2) * field[tris(2, t)];
    const real a = mesh.triangle_areas()[t];
    for (int k = 0; k < 3; ++k) {
      acc.col(tris(k, t)) += a * grad;
      weight[tris(k, t)] += a;
    }
  }
  for (int i = 0; i < mesh.num_nodes(); ++i) acc.col(i) /= weight[i];
  return acc;
}

real integrate(const TriMesh& mesh, const NodalField& field) { return mesh.lumped_mass().dot(field); }

NodalField initial_distribution(const NodalField& mesh_v, const TriMesh& mesh) {
  if (mesh_v.size() != mesh.num_nodes()) throw Error("initial_distribution: field size does not match the mesh");
  if (!mesh_v.allFinite()) throw Error("initial_distribution: landscape must be finite at every node");
  const real lo = mesh_v.minCoeff(), hi = mesh_v.maxCoeff();
  if (hi == lo) return NodalField::Constant(mesh.num_nodes(), 1.0 / mesh.total_area());
  NodalField vplus = mesh_v;
  if (!(lo > 0)) vplus.array() += -lo + 1e-12 * (hi - lo);
  NodalField dens = vplus.cwiseInverse();
  return dens / integrate(mesh, dens);
}

Potential Potential::rescaled(real diffusion) const {
  const real f = diffusion / diffusion_ref;
  Potential p = *this;
  p.raster_v.values *= f;
  p.mesh_v *= f;
  p.mesh_grad_v *= f;
  p.diffusion_ref = diffusion;
  return p;
}

Raster covering_grid(const WeekPlans& week, const TriMesh* mesh, real cell_size) {
  if (!(cell_size > 0)) throw Error("cell size must be positive");
  Box2 b;
  b.setEmpty();
  for (int d = 0; d < kNumDayTypes; ++d)
    for (const auto& e : week.events(static_cast<DayType>(d))) b.extend(e.location);
  if (mesh) b.extend(mesh->bounding_box());
  if (b.isEmpty()) throw Error("no event or mesh extent to cover");
  const Vec2 origin = b.min() - Vec2::Constant(cell_size);
  const int w = static_cast<int>(std::ceil(b.sizes().x() / cell_size)) + 2;
  const int h = static_cast<int>(std::ceil(b.sizes().y() / cell_size)) + 2;
  return Raster(origin, cell_size, w, h);
}

Potential build_potential(const WeekPlans& week, const Raster& grid, const TriMesh& mesh, real diffusion) {
  Potential p;
  p.raster_v = fill_unvisited(histogram_to_potential(build_histogram(week, grid), diffusion));
  p.mesh_v = raster_to_mesh(p.raster_v, mesh);
  p.mesh_grad_v = nodal_gradient(mesh, p.mesh_v);
  p.diffusion_ref = diffusion;
  return p;
}

Raster parse_raster_csv(std::string_view text, const std::string& source) {
  std::vector<std::pair<std::size_t, std::string_view>> lines;
  std::size_t number = 0, start = 0;
  while (start < text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    const auto line = trim(text.substr(start, end - start));
    if (!line.empty()) lines.emplace_back(number, line);
    start = end + 1;
  }
  if (lines.size() < 2 || lines[0].second != "origin_x,origin_y,cell_size,width,height")
    throw ParseError(source, 1, "expected header 'origin_x,origin_y,cell_size,width,height'");
  const auto hf = split_fields(lines[1].second);
  if (hf.size() != 5) throw ParseError(source, lines[1].first, "expected 5 header values");
  Raster r;
  r.origin = Vec2(parse_real(hf[0], source, lines[1].first), parse_real(hf[1], source, lines[1].first));
  r.cell_size = parse_real(hf[2], source, lines[1].first);
  r.width = static_cast<int>(parse_int(hf[3], source, lines[1].first));
  r.height = static_cast<int>(parse_int(hf[4], source, lines[1].first));
  if (!(r.cell_size > 0) || r.width <= 0 || r.height <= 0)
    throw ParseError(source, lines[1].first, "cell_size, width and height must be positive");
  if (lines.size() != static_cast<std::size_t>(r.height) + 2)
    throw ParseError(source, lines.back().first, "expected " + std::to_string(r.height) + " value rows");
  r.values.resize(static_cast<Eigen::Index>(r.width) * r.height);
  for (int iy = 0; iy < r.height; ++iy) {
    const auto [no, line] = lines[static_cast<std::size_t>(iy) + 2];
    const auto f = split_fields(line);
    if (f.size() != static_cast<std::size_t>(r.width)) throw ParseError(source, no, "wrong number of values in row");
    for (int ix = 0; ix < r.width; ++ix) r.at(ix, iy) = parse_real(f[static_cast<std::size_t>(ix)], source, no);
  }
  return r;
}

std::string raster_to_csv(const Raster& r) {
  std::ostringstream os;
  os << "origin_x,origin_y,cell_size,width,height\n"
     << format_real(r.origin.x()) << ',' << format_real(r.origin.y()) << ',' << format_real(r.cell_size) << ','
     << r.width << ',' << r.height << '\n';
  for (int iy = 0; iy < r.height; ++iy) {
    for (int ix = 0; ix < r.width; ++ix) os << (ix ? "," : "") << format_real(r.at(ix, iy));
    os << '\n';
  }
  return os.str();
}

}  // namespace hepi
