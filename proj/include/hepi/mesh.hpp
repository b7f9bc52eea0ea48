#ifndef HEPI_MESH_HPP
#define HEPI_MESH_HPP

#include "hepi/common.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hepi {

/// Closed boundary ring of the continuum domain plus optional hole seeds.
struct DomainPolygon {
  std::vector<Vec2> vertices;
  std::vector<Vec2> holes;

  /// Shoelace area of the outer ring (positive for counter-clockwise order).
  real signed_area() const;
};

/// Immutable P1 triangulation in planar metres.
///
/// Triangles are stored counter-clockwise. Node fans, element areas and the
/// topological boundary (nodes on edges used by a single triangle) are
/// computed once at construction.
class TriMesh {
 public:
  using Triangles = Eigen::Matrix<int, 3, Eigen::Dynamic>;

  /// Empty mesh: contains no point.
  TriMesh() = default;
  TriMesh(Eigen::Matrix2Xd nodes, Triangles triangles, std::optional<DomainPolygon> polygon = std::nullopt);

  int num_nodes() const { return static_cast<int>(nodes_.cols()); }
  int num_triangles() const { return static_cast<int>(triangles_.cols()); }

  const Eigen::Matrix2Xd& nodes() const { return nodes_; }
  Vec2 node(int i) const { return nodes_.col(i); }
  const Triangles& triangles() const { return triangles_; }
  const Eigen::VectorXd& triangle_areas() const { return areas_; }
  real total_area() const { return areas_.sum(); }

  std::span<const int> node_fan(int node) const;
  const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
  bool is_boundary(int node) const { return is_boundary_[static_cast<std::size_t>(node)]; }
  const std::optional<DomainPolygon>& polygon() const { return polygon_; }
  const Box2& bounding_box() const { return bbox_; }

  Vec2 centroid(int tri) const;
  /// Barycentric coordinates of `p` with respect to triangle `tri`.
  Eigen::Vector3d barycentric(int tri, const Vec2& p) const;
  /// Constant gradients of the three hat functions of `tri` (columns).
  Eigen::Matrix<real, 2, 3> hat_gradients(int tri) const;

  /// Lowest-index triangle containing `p` (barycentric >= -1e-9), or nullopt.
  std::optional<int> locate(const Vec2& p) const;
  bool contains(const Vec2& p) const { return locate(p).has_value(); }

  /// Sum of the areas of all triangles incident to `node`.
  real fan_area(int node) const;
  /// Lumped (row-sum) P1 mass: fan_area / 3 per node.
  Eigen::VectorXd lumped_mass() const;
  /// Node of minimal Euclidean distance, ties to the lowest index.
  int nearest_node(const Vec2& p) const;

  friend bool operator==(const TriMesh& a, const TriMesh& b);

 private:
  void build_locator();
  std::vector<int> bucket_range(const Vec2& p) const;

  Eigen::Matrix2Xd nodes_;
  Triangles triangles_;
  Eigen::VectorXd areas_;
  std::vector<int> fan_offsets_;
  std::vector<int> fan_triangles_;
  std::vector<int> boundary_nodes_;
  std::vector<bool> is_boundary_;
  std::optional<DomainPolygon> polygon_;
  Box2 bbox_;

  // uniform bucket grid over triangle bounding boxes
  int grid_nx_ = 1, grid_ny_ = 1;
  Vec2 grid_cell_{1, 1};
  std::vector<std::vector<int>> buckets_;
  std::vector<std::vector<int>> node_buckets_;
};

/// Position of `p` relative to a mesh: the containing triangle or outside.
std::optional<int> locate_point(const TriMesh& mesh, const Vec2& p);
real fan_area(const TriMesh& mesh, int node);

/// Parses Triangle `.node`/`.ele` (and optionally `.poly`) text. Index base
/// (0 or 1) is taken from the first vertex index in the `.node` text.
TriMesh parse_triangle_files(std::string_view node_text, std::string_view ele_text,
                             std::optional<std::string_view> poly_text = std::nullopt);

struct TriangleFiles {
  std::string node;
  std::string ele;
  std::string poly;  // empty when the mesh carries no polygon
};

/// Writes 0-based Triangle text with boundary markers.
TriangleFiles to_triangle_files(const TriMesh& mesh);

/// Loads `<base>.node`, `<base>.ele` and, when present, `<base>.poly`.
TriMesh load_triangle_mesh(const std::filesystem::path& base);
void save_triangle_mesh(const TriMesh& mesh, const std::filesystem::path& base);

/// Structured triangulation of an axis-aligned rectangle with nx by ny cells,
/// every cell split along its lower-left to upper-right diagonal.
TriMesh make_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny);

/// Same as make_rectangle_mesh but with interior nodes moved uniformly at
/// random by up to `jitter` times the cell size in each direction.
TriMesh make_jittered_rectangle_mesh(const Vec2& lo, const Vec2& hi, int nx, int ny, real jitter, Rng& rng);

}  // namespace hepi

#endif  // HEPI_MESH_HPP
