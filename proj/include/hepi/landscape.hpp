#ifndef HEPI_LANDSCAPE_HPP
#define HEPI_LANDSCAPE_HPP

#include "hepi/common.hpp"
#include "hepi/mesh.hpp"
#include "hepi/mobility.hpp"

namespace hepi {

/// Equidistant grid of cell values. Cell (ix, iy) covers
/// [origin + (ix, iy) * cell_size, origin + (ix + 1, iy + 1) * cell_size);
/// values are stored row-major (iy * width + ix). NaN marks "no data".
struct Raster {
  Vec2 origin = Vec2::Zero();
  real cell_size = 1;
  int width = 0;
  int height = 0;
  Eigen::ArrayXd values;

  Raster() = default;
  Raster(const Vec2& origin, real cell_size, int width, int height, real fill = 0);

  real& at(int ix, int iy) { return values[static_cast<Eigen::Index>(iy) * width + ix]; }
  real at(int ix, int iy) const { return values[static_cast<Eigen::Index>(iy) * width + ix]; }
  Vec2 cell_center(int ix, int iy) const { return origin + cell_size * Vec2(ix + 0.5, iy + 0.5); }
  Box2 extent() const { return {origin, origin + cell_size * Vec2(width, height)}; }
  /// Cell containing `p`, or nullopt outside the extent (upper edges inclusive).
  std::optional<std::pair<int, int>> cell_of(const Vec2& p) const;

  /// Bilinear interpolation between cell centres; constant extension in the
  /// outer half cell. Throws outside the raster extent.
  real interpolate(const Vec2& p) const;
  /// Gradient of the bilinear interpolant at `p` (zero across the clamped
  /// outer half cell).
  Vec2 interpolate_gradient(const Vec2& p) const;

  void validate() const;
};

/// Counts agent-hours per cell over one representative week: each of the 24
/// hourly positions of every plan counts 5 times for weekdays and once for
/// Saturday and Sunday. Cells never visited hold NaN.
Raster build_histogram(const WeekPlans& week, const Raster& grid);

/// Normalizes the non-NaN cells to a probability mass p and returns
/// V = -(D/2) ln p; NaN (and zero-count) cells stay NaN.
Raster histogram_to_potential(const Raster& histogram, real diffusion);

/// Replaces every NaN cell by the maximum of the non-NaN cells.
Raster fill_unvisited(const Raster& v);

NodalField raster_to_mesh(const Raster& v, const TriMesh& mesh);

/// Per-node gradient: the fan-area-weighted average of the constant
/// per-triangle gradients of the P1 interpolant.
NodalVectors nodal_gradient(const TriMesh& mesh, const NodalField& field);

/// Density proportional to 1 / V+ whose P1 integral over the mesh is one.
/// V+ = V when V is already strictly positive, otherwise
/// V - min V + 1e-12 * (max V - min V). A constant landscape yields the
/// uniform density.
NodalField initial_distribution(const NodalField& mesh_v, const TriMesh& mesh);

/// P1 integral of a nodal field (exact for the piecewise-linear interpolant).
real integrate(const TriMesh& mesh, const NodalField& field);

/// Landscape on raster and mesh for a reference diffusion coefficient.
struct Potential {
  Raster raster_v;
  NodalField mesh_v;
  NodalVectors mesh_grad_v;
  real diffusion_ref = 1;
  /// The continuum solver drops the Laplacian of V.
  bool assume_zero_laplacian = true;

  /// V scales linearly with D, so values and gradients are multiplied by D'/D.
  Potential rescaled(real diffusion) const;
};

/// Full pipeline: histogram, potential, fill, transfer to the mesh, gradient.
Potential build_potential(const WeekPlans& week, const Raster& grid, const TriMesh& mesh, real diffusion);

/// Smallest raster with the given cell size covering every event location
/// of all day types and the mesh, padded by one cell.
Raster covering_grid(const WeekPlans& week, const TriMesh* mesh, real cell_size);

// Raster CSV: header `origin_x,origin_y,cell_size,width,height`, one line with
// those values, then `height` lines of `width` comma-separated values.
Raster parse_raster_csv(std::string_view text, const std::string& source = "raster");
std::string raster_to_csv(const Raster& r);

}  // namespace hepi

#endif  // HEPI_LANDSCAPE_HPP
