#include "hepi/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace hepi {

namespace {

constexpr real kBaryTol = 1e-9;

real cross2(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

// Non-empty, non-comment lines with their 1-based line numbers.
struct Line {
  std::size_t number;
  std::vector<std::string_view> tokens;
};

std::vector<Line> tokenize(std::string_view text) {
  std::vector<Line> out;
  std::size_t number = 0, start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++number;
    auto line = text.substr(start, end - start);
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    Line l{number, {}};
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      const auto b = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
      if (i > b) l.tokens.push_back(line.substr(b, i - b));
    }
    if (!l.tokens.empty()) out.push_back(std::move(l));
    start = end + 1;
  }
  return out;
}

void require_tokens(const Line& l, std::size_t n, const std::string& src, const char* what) {
  if (l.tokens.size() < n)
    throw ParseError(src, l.number, std::string("expected at least ") + std::to_string(n) + " fields in " + what);
}

}  // namespace

real DomainPolygon::signed_area() const {
  real a = 0;
  for (std::size_t i = 0; i < vertices.size(); ++i) a += cross2(vertices[i], vertices[(i + 1) % vertices.size()]);
  return 0.5 * a;
}

TriMesh::TriMesh(Eigen::Matrix2Xd nodes, Triangles triangles, std::optional<DomainPolygon> polygon)
    : nodes_(std::move(nodes)), triangles_(std::move(triangles)), polygon_(std::move(polygon)) {
  const int n = num_nodes();
  const int m = num_triangles();
  if (n == 0 || m == 0) throw Error("mesh must contain at least one triangle");
  if (!nodes_.allFinite()) throw Error("mesh node coordinates must be finite");

  bbox_.setEmpty();
  for (int i = 0; i < n; ++i) bbox_.extend(nodes_.col(i));
  const real scale2 = std::max(bbox_.sizes().squaredNorm(), std::numeric_limits<real>::min());

  areas_.resize(m);
  for (int t = 0; t < m; ++t) {
    for (int k = 0; k < 3; ++k)
      if (triangles_(k, t) < 0 || triangles_(k, t) >= n)
        throw Error("triangle " + std::to_string(t) + " references node " + std::to_string(triangles_(k, t)) +
                    " out of range");
    const Vec2 a = nodes_.col(triangles_(0, t)), b = nodes_.col(triangles_(1, t)), c = nodes_.col(triangles_(2, t));
    real twice = cross2(b - a, c - a);
    if (twice < 0) {
      std::swap(triangles_(1, t), triangles_(2, t));
      twice = -twice;
    }
    if (!(twice > 1e-14 * scale2)) throw Error("triangle " + std::to_string(t) + " is degenerate (zero area)");
    areas_[t] = 0.5 * twice;
  }

  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (int t = 0; t < m; ++t)
    for (int k = 0; k < 3; ++k) ++counts[static_cast<std::size_t>(triangles_(k, t))];
  fan_offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
  std::partial_sum(counts.begin(), counts.end(), fan_offsets_.begin() + 1);
  fan_triangles_.assign(static_cast<std::size_t>(fan_offsets_.back()), 0);
  std::vector<int> fill(fan_offsets_.begin(), fan_offsets_.end() - 1);
  for (int t = 0; t < m; ++t)
    for (int k = 0; k < 3; ++k) fan_triangles_[static_cast<std::size_t>(fill[static_cast<std::size_t>(triangles_(k, t))]++)] = t;

  std::map<std::pair<int, int>, int> edge_use;
  for (int t = 0; t < m; ++t)
    for (int k = 0; k < 3; ++k) {
      int a = triangles_(k, t), b = triangles_((k + 1) % 3, t);
      if (a > b) std::swap(a, b);
      ++edge_use[{a, b}];
    }
  is_boundary_.assign(static_cast<std::size_t>(n), false);
  for (const auto& [edge, uses] : edge_use)
    if (uses == 1) {
      is_boundary_[static_cast<std::size_t>(edge.first)] = true;
      is_boundary_[static_cast<std::size_t>(edge.second)] = true;
    }
  for (int i = 0; i < n; ++i)
    if (is_boundary_[static_cast<std::size_t>(i)]) boundary_nodes_.push_back(i);

  build_locator();
}

void TriMesh::build_locator() {
  const int m = num_triangles();
  const int side = std::max(1, static_cast<int>(std::sqrt(static_cast<real>(m))));
  Vec2 size = bbox_.sizes();
  if (size.x() <= 0) size.x() = 1;
  if (size.y() <= 0) size.y() = 1;
  grid_nx_ = side;
  grid_ny_ = side;
  grid_cell_ = Vec2(size.x() / grid_nx_, size.y() / grid_ny_);
  buckets_.assign(static_cast<std::size_t>(grid_nx_ * grid_ny_), {});
  node_buckets_.assign(static_cast<std::size_t>(grid_nx_ * grid_ny_), {});
  auto cell_of = [&](const Vec2& p) {
    const Vec2 rel = (p - bbox_.min()).cwiseQuotient(grid_cell_);
    const int ix = std::clamp(static_cast<int>(std::floor(rel.x())), 0, grid_nx_ - 1);
    const int iy = std::clamp(static_cast<int>(std::floor(rel.y())), 0, grid_ny_ - 1);
    return std::pair{ix, iy};
  };
  for (int t = 0; t < m; ++t) {
    Box2 b;
    b.setEmpty();
    for (int k = 0; k < 3; ++k) b.extend(nodes_.col(triangles_(k, t)));
    const Vec2 pad = Vec2::Constant(1e-9 * std::max(size.x(), size.y()));
    const auto [x0, y0] = cell_of(b.min() - pad);
    const auto [x1, y1] = cell_of(b.max() + pad);
    for (int iy = y0; iy <= y1; ++iy)
      for (int ix = x0; ix <= x1; ++ix) buckets_[static_cast<std::size_t>(iy * grid_nx_ + ix)].push_back(t);
  }
  for (int i = 0; i < num_nodes(); ++i) {
    const auto [ix, iy] = cell_of(nodes_.col(i));
    node_buckets_[static_cast<std::size_t>(iy * grid_nx_ + ix)].push_back(i);
  }
}

std::span<const int> TriMesh::node_fan(int node) const {
  if (node < 0 || node >= num_nodes()) throw Error("node index " + std::to_string(node) + " out of range");
  const auto b = static_cast<std::size_t>(fan_offsets_[static_cast<std::size_t>(node)]);
  const auto e = static_cast<std::size_t>(fan_offsets_[static_cast<std::size_t>(node) + 1]);
  return {fan_triangles_.data() + b, e - b};
}

Vec2 TriMesh::centroid(int tri) const {
  return (nodes_.col(triangles_(0, tri)) + nodes_.col(triangles_(1, tri)) + nodes_.col(triangles_(2, tri))) / 3.0;
}

Eigen::Vector3d TriMesh::barycentric(int tri, const Vec2& p) const {
  const Vec2 a = nodes_.col(triangles_(0, tri)), b = nodes_.col(triangles_(1, tri)), c = nodes_.col(triangles_(2, tri));
  const real twice = 2.0 * areas_[tri];
  const real l1 = cross2(c - b, p - b) / twice;
  const real l2 = cross2(a - c, p - c) / twice;
  return {l1, l2, 1.0 - l1 - l2};
}

Eigen::Matrix<real, 2, 3> TriMesh::hat_gradients(int tri) const {
  const Vec2 a = nodes_.col(triangles_(0, tri)), b = nodes_.col(triangles_(1, tri)), c = nodes_.col(triangles_(2, tri));
  const real twice = 2.0 * areas_[tri];
  Eigen::Matrix<real, 2, 3> g;
  // gradient of the hat at vertex k is the inward normal of the opposite edge
  g.col(0) = Vec2(b.y() - c.y(), c.x() - b.x()) / twice;
  g.col(1) = Vec2(c.y() - a.y(), a.x() - c.x()) / twice;
  g.col(2) = Vec2(a.y() - b.y(), b.x() - a.x()) / twice;
  return g;
}

std::optional<int> TriMesh::locate(const Vec2& p) const {
  const Vec2 pad = Vec2::Constant(1e-9 * std::max(bbox_.sizes().maxCoeff(), real(1)));
  if ((p.array() < (bbox_.min() - pad).array()).any() || (p.array() > (bbox_.max() + pad).array()).any())
    return std::nullopt;
  const Vec2 rel = (p - bbox_.min()).cwiseQuotient(grid_cell_);
  const int ix = std::clamp(static_cast<int>(std::floor(rel.x())), 0, grid_nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor(rel.y())), 0, grid_ny_ - 1);
  // buckets hold ascending triangle ids, so the first hit is the lowest index
  for (int t : buckets_[static_cast<std::size_t>(iy * grid_nx_ + ix)]) {
    const auto l = barycentric(t, p);
    if (l.minCoeff() >= -kBaryTol) return t;
  }
  return std::nullopt;
}

real TriMesh::fan_area(int node) const {
  real a = 0;
  for (int t : node_fan(node)) a += areas_[t];
  return a;
}

Eigen::VectorXd TriMesh::lumped_mass() const {
  Eigen::VectorXd m = Eigen::VectorXd::Zero(num_nodes());
  for (int t = 0; t < num_triangles(); ++t)
    for (int k = 0; k < 3; ++k) m[triangles_(k, t)] += areas_[t] / 3.0;
  return m;
}

int TriMesh::nearest_node(const Vec2& p) const {
  const Vec2 rel = (p - bbox_.min()).cwiseQuotient(grid_cell_);
  const int cx = std::clamp(static_cast<int>(std::floor(rel.x())), 0, grid_nx_ - 1);
  const int cy = std::clamp(static_cast<int>(std::floor(rel.y())), 0, grid_ny_ - 1);
  int best = -1;
  real best_d2 = std::numeric_limits<real>::infinity();
  const int max_ring = std::max(grid_nx_, grid_ny_);
  for (int ring = 0; ring <= max_ring; ++ring) {
    for (int iy = cy - ring; iy <= cy + ring; ++iy)
      for (int ix = cx - ring; ix <= cx + ring; ++ix) {
        if (std::max(std::abs(ix - cx), std::abs(iy - cy)) != ring) continue;
        if (ix < 0 || iy < 0 || ix >= grid_nx_ || iy >= grid_ny_) continue;
        for (int i : node_buckets_[static_cast<std::size_t>(iy * grid_nx_ + ix)]) {
          const real d2 = (nodes_.col(i) - p).squaredNorm();
          if (d2 < best_d2 || (d2 == best_d2 && i < best)) {
            best_d2 = d2;
            best = i;
          }
        }
      }
    if (best >= 0) {
      // every node outside the searched rings is at least `ring` cells away
      const Vec2 lo = bbox_.min() + Vec2((cx - ring) * grid_cell_.x(), (cy - ring) * grid_cell_.y());
      const Vec2 hi = bbox_.min() + Vec2((cx + ring + 1) * grid_cell_.x(), (cy + ring + 1) * grid_cell_.y());
      const real margin = std::min({p.x() - lo.x(), p.y() - lo.y(), hi.x() - p.x(), hi.y() - p.y()});
      if (margin > 0 && margin * margin > best_d2) break;
    }
  }
  return best;
}

bool operator==(const TriMesh& a, const TriMesh& b) {
  if (a.nodes_ != b.nodes_ || a.triangles_ != b.triangles_) return false;
  if (a.polygon_.has_value() != b.polygon_.has_value()) return false;
  if (a.polygon_) {
    if (a.polygon_->vertices != b.polygon_->vertices || a.polygon_->holes != b.polygon_->holes) return false;
  }
  return true;
}

std::optional<int> locate_point(const TriMesh& mesh, const Vec2& p) { return mesh.locate(p); }

real fan_area(const TriMesh& mesh, int node) { return mesh.fan_area(node); }

TriMesh parse_triangle_files(std::string_view node_text, std::string_view ele_text,
                             std::optional<std::string_view> poly_text) {
  const std::string node_src = ".node", ele_src = ".ele", poly_src = ".poly";
  const auto node_lines = tokenize(node_text);
  if (node_lines.empty()) throw ParseError(node_src, 1, "missing header");
  const auto& nh = node_lines.front();
  require_tokens(nh, 2, node_src, "header");
  const auto n_nodes = parse_int(nh.tokens[0], node_src, nh.number);
  const auto dim = parse_int(nh.tokens[1], node_src, nh.number);
  const auto n_attr = nh.tokens.size() > 2 ? parse_int(nh.tokens[2], node_src, nh.number) : 0;
  const auto n_markers = nh.tokens.size() > 3 ? parse_int(nh.tokens[3], node_src, nh.number) : 0;
  if (n_nodes <= 0 || dim != 2 || n_attr < 0 || n_markers < 0 || n_markers > 1)
    throw ParseError(node_src, nh.number, "malformed header");
  if (static_cast<long long>(node_lines.size()) - 1 < n_nodes)
    throw ParseError(node_src, node_lines.back().number, "fewer vertices than the header declares");

  const std::size_t need = 3 + static_cast<std::size_t>(n_attr + n_markers);
  Eigen::Matrix2Xd nodes(2, n_nodes);
  long long base = 0;
  for (long long i = 0; i < n_nodes; ++i) {
    const auto& l = node_lines[static_cast<std::size_t>(i) + 1];
    require_tokens(l, need, node_src, "vertex line");
    const auto idx = parse_int(l.tokens[0], node_src, l.number);
    if (i == 0) {
      if (idx != 0 && idx != 1) throw ParseError(node_src, l.number, "first vertex index must be 0 or 1");
      base = idx;
    }
    if (idx != base + i) throw ParseError(node_src, l.number, "vertex indices must be consecutive");
    nodes(0, i) = parse_real(l.tokens[1], node_src, l.number);
    nodes(1, i) = parse_real(l.tokens[2], node_src, l.number);
  }

  const auto ele_lines = tokenize(ele_text);
  if (ele_lines.empty()) throw ParseError(ele_src, 1, "missing header");
  const auto& eh = ele_lines.front();
  require_tokens(eh, 2, ele_src, "header");
  const auto n_tri = parse_int(eh.tokens[0], ele_src, eh.number);
  const auto per = parse_int(eh.tokens[1], ele_src, eh.number);
  if (n_tri <= 0 || (per != 3 && per != 6)) throw ParseError(ele_src, eh.number, "malformed header");
  if (static_cast<long long>(ele_lines.size()) - 1 < n_tri)
    throw ParseError(ele_src, ele_lines.back().number, "fewer triangles than the header declares");
  TriMesh::Triangles tris(3, n_tri);
  const real scale2 = [&] {
    Box2 b;
    b.setEmpty();
    for (long long i = 0; i < n_nodes; ++i) b.extend(Vec2(nodes.col(i)));
    return std::max(b.sizes().squaredNorm(), std::numeric_limits<real>::min());
  }();
  for (long long t = 0; t < n_tri; ++t) {
    const auto& l = ele_lines[static_cast<std::size_t>(t) + 1];
    require_tokens(l, 1 + static_cast<std::size_t>(per), ele_src, "triangle line");
    for (int k = 0; k < 3; ++k) {
      const auto v = parse_int(l.tokens[static_cast<std::size_t>(k) + 1], ele_src, l.number) - base;
      if (v < 0 || v >= n_nodes) throw ParseError(ele_src, l.number, "vertex index out of range");
      tris(k, t) = static_cast<int>(v);
    }
    const Vec2 a = nodes.col(tris(0, t)), b = nodes.col(tris(1, t)), c = nodes.col(tris(2, t));
    if (!(std::abs(cross2(b - a, c - a)) > 1e-14 * scale2))
      throw ParseError(ele_src, l.number, "zero-area triangle");
  }

  std::optional<DomainPolygon> polygon;
  if (poly_text) {
    const auto pl = tokenize(*poly_text);
    if (pl.empty()) throw ParseError(poly_src, 1, "missing header");
    std::size_t cur = 0;
    const auto& ph = pl[cur++];
    require_tokens(ph, 2, poly_src, "header");
    const auto pv = parse_int(ph.tokens[0], poly_src, ph.number);
    const auto pattr = ph.tokens.size() > 2 ? parse_int(ph.tokens[2], poly_src, ph.number) : 0;
    const auto pmark = ph.tokens.size() > 3 ? parse_int(ph.tokens[3], poly_src, ph.number) : 0;
    if (pv < 0 || parse_int(ph.tokens[1], poly_src, ph.number) != 2) throw ParseError(poly_src, ph.number, "malformed header");
    std::vector<Vec2> verts;
    long long pbase = base;
    if (pv == 0) {
      for (long long i = 0; i < n_nodes; ++i) verts.emplace_back(nodes.col(i));
    } else {
      for (long long i = 0; i < pv; ++i) {
        if (cur >= pl.size()) throw ParseError(poly_src, pl.back().number, "fewer vertices than declared");
        const auto& l = pl[cur++];
        require_tokens(l, 3 + static_cast<std::size_t>(pattr + pmark), poly_src, "vertex line");
        const auto idx = parse_int(l.tokens[0], poly_src, l.number);
        if (i == 0) pbase = idx;
        verts.emplace_back(parse_real(l.tokens[1], poly_src, l.number), parse_real(l.tokens[2], poly_src, l.number));
      }
    }
    if (cur >= pl.size()) throw ParseError(poly_src, pl.back().number, "missing segment header");
    const auto& sh = pl[cur++];
    const auto ns = parse_int(sh.tokens[0], poly_src, sh.number);
    std::vector<std::pair<int, int>> segs;
    for (long long i = 0; i < ns; ++i) {
      if (cur >= pl.size()) throw ParseError(poly_src, pl.back().number, "fewer segments than declared");
      const auto& l = pl[cur++];
      require_tokens(l, 3, poly_src, "segment line");
      const auto a = parse_int(l.tokens[1], poly_src, l.number) - pbase;
      const auto b = parse_int(l.tokens[2], poly_src, l.number) - pbase;
      if (a < 0 || b < 0 || a >= static_cast<long long>(verts.size()) || b >= static_cast<long long>(verts.size()))
        throw ParseError(poly_src, l.number, "segment endpoint out of range");
      segs.emplace_back(static_cast<int>(a), static_cast<int>(b));
    }
    DomainPolygon poly;
    if (cur < pl.size()) {
      const auto& hh = pl[cur++];
      const auto nh_holes = parse_int(hh.tokens[0], poly_src, hh.number);
      for (long long i = 0; i < nh_holes; ++i) {
        if (cur >= pl.size()) throw ParseError(poly_src, pl.back().number, "fewer holes than declared");
        const auto& l = pl[cur++];
        require_tokens(l, 3, poly_src, "hole line");
        poly.holes.emplace_back(parse_real(l.tokens[1], poly_src, l.number), parse_real(l.tokens[2], poly_src, l.number));
      }
    }
    // chain segments into rings; the ring of largest area is the outer boundary
    std::multimap<int, std::size_t> by_start;
    for (std::size_t i = 0; i < segs.size(); ++i) {
      by_start.emplace(segs[i].first, i);
      by_start.emplace(segs[i].second, i);
    }
    std::vector<bool> used(segs.size(), false);
    std::vector<Vec2> best_ring;
    real best_area = -1;
    for (std::size_t s0 = 0; s0 < segs.size(); ++s0) {
      if (used[s0]) continue;
      std::vector<int> ring{segs[s0].first};
      used[s0] = true;
      int cur_v = segs[s0].second;
      while (cur_v != ring.front()) {
        ring.push_back(cur_v);
        bool advanced = false;
        auto [lo, hi] = by_start.equal_range(cur_v);
        for (auto it = lo; it != hi; ++it) {
          if (used[it->second]) continue;
          used[it->second] = true;
          const auto& sg = segs[it->second];
          cur_v = sg.first == cur_v ? sg.second : sg.first;
          advanced = true;
          break;
        }
        if (!advanced) break;
      }
      DomainPolygon cand;
      for (int v : ring) cand.vertices.push_back(verts[static_cast<std::size_t>(v)]);
      const real area = std::abs(cand.signed_area());
      if (area > best_area) {
        best_area = area;
        best_ring = std::move(cand.vertices);
      }
    }
    poly.vertices = std::move(best_ring);
    polygon = std::move(poly);
  }
  return TriMesh(std::move(nodes), std::move(tris), std::move(polygon));
}

TriangleFiles to_triangle_files(const TriMesh& mesh) {
  TriangleFiles f;
  std::ostringstream node, ele;
  node << mesh.num_nodes() << " 2 0 1\n";
  for (int i = 0; i < mesh.num_nodes(); ++i)
    node << i << ' ' << format_real(mesh.nodes()(0, i)) << ' ' << format_real(mesh.nodes()(1, i)) << ' '
         << (mesh.is_boundary(i) ? 1 : 0) << '\n';
  ele << mesh.num_triangles() << " 3 0\n";
  for (int t = 0; t < mesh.num_triangles(); ++t)
    ele << t << ' ' << mesh.triangles()(0, t) << ' ' << mesh.triangles()(1, t) << ' ' << mesh.triangles()(2, t)
        << '\n';
  f.node = node.str();
  f.ele = ele.str();
  if (const auto& poly = mesh.polygon()) {
    std::ostringstream p;
    const auto nv = poly->vertices.size();
    p << nv << " 2 0 0\n";
    for (std::size_t i = 0; i < nv; ++i)
      p << i << ' ' << format_real(poly->vertices[i].x()) << ' ' << format_real(poly->vertices[i].y()) << '\n';
    p << nv << " 0\n";
    for (std::size_t i = 0; i < nv; ++i) p << i << ' ' << i << ' ' << (i + 1) % nv << '\n';
    p << poly->holes.size() << '\n';
    for (std::size_t i = 0; i < poly->holes.size(); ++i)
      p << i << ' ' << format_real(poly->holes[i].x()) << ' ' << format_real(poly->holes[i].y()) << '\n';
    f.poly = p.str();
  }
  return f;
}

TriMesh load_triangle_mesh(const std::filesystem::path& base) {
  auto with_ext = [&](const char* ext) {
    auto p = base;
    p += ext;
    return p;
  };
  const auto node = read_text_file(with_ext(".node"));
  const auto ele = read_text_file(with_ext(".ele"));
  const auto poly_path = with_ext(".poly");
  if (std::filesystem::exists(poly_path)) {
    const auto poly = read_text_file(poly_path);
    return parse_triangle_files(node, ele, std::string_view(poly));
  }
  return parse_triangle_files(node, ele);
}

void save_triangle_mesh(const TriMesh& mesh, const std::filesystem::path& base) {
  const auto files = to_triangle_files(mesh);
  auto with_ext = [&](const char* ext) {
    auto p = base;
    p += ext;
    return p;
  };
  write_text_file(with_ext(".node"), files.node);
  write_text_file(with_ext(".ele"), files.ele);
  if (!files.poly.empty()) write_text_file(with_ext(".poly"), files.poly);
}

namespace {

TriMesh rectangle_mesh_impl(const Vec2& lo, const Vec2& hi, int nx, int ny, real jitter, Rng* rng) {
  if (nx < 1 || ny < 1 || !(hi.x() > lo.x()) || !(hi.y() > lo.y())) throw Error("invalid rectangle mesh request");
  const Vec2 h((hi.x() - lo.x()) / nx, (hi.y() - lo.y()) / ny);
  Eigen::Matrix2Xd nodes(2, (nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i) {
      Vec2 p(lo.x() + i * h.x(), lo.y() + j * h.y());
      if (i == nx) p.x() = hi.x();
      if (j == ny) p.y() = hi.y();
      if (rng && i > 0 && j > 0 && i < nx && j < ny) {
        p.x() += (2 * uniform01(*rng) - 1) * jitter * h.x();
        p.y() += (2 * uniform01(*rng) - 1) * jitter * h.y();
      }
      nodes.col(j * (nx + 1) + i) = p;
    }
  TriMesh::Triangles tris(3, 2 * nx * ny);
  int t = 0;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) {
      const int a = j * (nx + 1) + i, b = a + 1, c = a + (nx + 1) + 1, d = a + (nx + 1);
      tris.col(t++) << a, b, c;
      tris.col(t++) << a, c, d;
    }
  DomainPolygon poly;
  poly.vertices = {lo, Vec2(hi.x(), lo.y()), hi, Vec2(lo.x(), hi.y())};
  return TriMesh(std::move(nodes), std::move(tris), std::move(poly));
}

}  // namespace

TriMesh make_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny) {
  return rectangle_mesh_impl(lo, hi, nx, ny, 0, nullptr);
}

TriMesh make_jittered_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny, real jitter, Rng& rng) {
  if (!(jitter >= 0 && jitter < 0.5)) throw Error("jitter must lie in [0, 0.5)");
  return rectangle_mesh_impl(lo, hi, nx, ny, jitter, &rng);
}

}  // namespace hepi
