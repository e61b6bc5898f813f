#pragma once

// Uniform tensor grids over parabolic cylinders and the discrete calculus on
// them: cell-centered gradients, cylinder quadrature with exact clipping of
// cells against the ball, spatial means, truncations and cutoff profiles.
//
// Layout conventions
//   node index   = iy * nx + ix            (iy = 0 when dim == 1)
//   cell index   = cy * (nx - 1) + cx
//   value index  = slice * nodes_per_slice + node   (time slowest, x1 fastest)
//   cell corners = (cx,cy), (cx+1,cy), (cx,cy+1), (cx+1,cy+1)

#include <algorithm>
#include <array>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

namespace dplab {

using Point = std::array<double, 2>;

struct SpaceTimePoint {
  Point x{};
  double t = 0.0;
};

/// Cylinder B_radius(x0) x (t0 - length, t0). The time extent is `length`
/// itself (not its square).
struct Cylinder {
  Point x0{};
  double t0 = 0.0;
  double radius = 1.0;
  double length = 1.0;

  [[nodiscard]] double t_begin() const { return t0 - length; }
};

/// Cylinder B_radius(x0) x (t0 - ell^2, t0), i.e. the square-time convention.
Cylinder square_time_cylinder(Point x0, double t0, double radius, double ell);

/// Uniform grid on the box [x0 - R, x0 + R]^dim x [t0 - ell, t0].
class SpaceTimeGrid {
 public:
  SpaceTimeGrid(int dim, int nx, int nt, Point x0, double t0, double radius, double time_length);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int nx() const { return nx_; }
  [[nodiscard]] int nt() const { return nt_; }
  [[nodiscard]] const Point& x0() const { return x0_; }
  [[nodiscard]] double t0() const { return t0_; }
  [[nodiscard]] double radius() const { return radius_; }
  [[nodiscard]] double time_length() const { return time_length_; }
  [[nodiscard]] double h() const { return h_; }
  [[nodiscard]] double dt() const { return dt_; }

  [[nodiscard]] std::size_t nodes_per_slice() const { return nodes_per_slice_; }
  [[nodiscard]] std::size_t cells_per_slice() const { return cells_per_slice_; }
  [[nodiscard]] std::size_t size() const { return nodes_per_slice_ * static_cast<std::size_t>(nt_); }
  [[nodiscard]] int corners_per_cell() const { return dim_ == 1 ? 2 : 4; }

  [[nodiscard]] double coord(int axis, int i) const { return x0_[axis] - radius_ + i * h_; }
  [[nodiscard]] double time(int slice) const { return t0_ - time_length_ + slice * dt_; }
  [[nodiscard]] Point node_x(std::size_t node) const;
  [[nodiscard]] Point cell_center(std::size_t cell) const;
  [[nodiscard]] std::array<std::size_t, 4> cell_corners(std::size_t cell) const;
  [[nodiscard]] bool is_boundary_node(std::size_t node) const;

  /// The circumscribed cylinder B_R(x0) x (t0 - ell, t0).
  [[nodiscard]] Cylinder cover() const { return {x0_, t0_, radius_, time_length_}; }

  bool operator==(const SpaceTimeGrid&) const = default;

 private:
  int dim_;
  int nx_;
  int nt_;
  Point x0_;
  double t0_;
  double radius_;
  double time_length_;
  double h_;
  double dt_;
  std::size_t nodes_per_slice_;
  std::size_t cells_per_slice_;
};

/// Nodal scalar values on a grid. Immutable once built.
class Field {
 public:
  Field(SpaceTimeGrid grid, std::vector<double> values);

  static Field constant(const SpaceTimeGrid& grid, double c);
  static Field from_function(const SpaceTimeGrid& grid,
                             const std::function<double(const SpaceTimePoint&)>& fn);

  [[nodiscard]] const SpaceTimeGrid& grid() const { return grid_; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] std::span<const double> slice(int j) const;
  [[nodiscard]] double at(std::size_t node, int slice) const {
    return values_[static_cast<std::size_t>(slice) * grid_.nodes_per_slice() + node];
  }

 private:
  SpaceTimeGrid grid_;
  std::vector<double> values_;
};

enum class Sign { plus, minus };

/// (v - k)_+ or (v - k)_-, i.e. max(+-(v - k), 0).
inline double truncation(double v, double k, Sign sign) {
  const double d = sign == Sign::plus ? v - k : k - v;
  return d > 0.0 ? d : 0.0;
}

/// Pointwise truncation of a whole field.
Field truncate(const Field& f, double k, Sign sign);

/// Forward-difference gradient on cell `cell` from the nodal values of one slice.
/// In 2D each component averages the two edge differences along that axis.
Point cell_gradient(const SpaceTimeGrid& grid, std::span<const double> slice_values, std::size_t cell);

/// Mean of the corner values of a cell.
double cell_average(const SpaceTimeGrid& grid, std::span<const double> slice_values, std::size_t cell);

/// Cell-centered gradient of slice `slice`, one entry per spatial cell.
std::vector<Point> gradient(const Field& f, int slice);

/// Area of [x1,x2] x [y1,y2] intersected with the disk of radius r at the origin.
double rect_disk_area(double x1, double x2, double y1, double y2, double r);

/// Quadrature weights for a cylinder on a grid.
///
/// Spatial weights are exact measures of (cell ∩ ball); nodal weights spread
/// each cell weight evenly over its corners. Slice weights integrate the
/// piecewise-linear time interpolant exactly over the clipped interval.
class CylinderQuadrature {
 public:
  CylinderQuadrature(const SpaceTimeGrid& grid, const Cylinder& region);

  [[nodiscard]] const SpaceTimeGrid& grid() const { return grid_; }
  [[nodiscard]] const Cylinder& region() const { return region_; }
  [[nodiscard]] std::span<const double> cell_weights() const { return cell_w_; }
  [[nodiscard]] std::span<const double> node_weights() const { return node_w_; }
  [[nodiscard]] std::span<const double> slice_weights() const { return slice_w_; }
  [[nodiscard]] std::span<const std::size_t> active_cells() const { return active_cells_; }
  [[nodiscard]] std::span<const std::size_t> active_nodes() const { return active_nodes_; }
  [[nodiscard]] std::span<const int> active_slices() const { return active_slices_; }
  [[nodiscard]] double ball_measure() const { return ball_measure_; }
  [[nodiscard]] double interval_measure() const { return interval_measure_; }
  [[nodiscard]] double measure() const { return ball_measure_ * interval_measure_; }

  /// Slices whose time lies in the closed interval, in increasing order.
  [[nodiscard]] std::span<const int> slices_inside() const { return slices_inside_; }
  /// Nodes whose position lies in the closed ball.
  [[nodiscard]] std::span<const std::size_t> nodes_inside() const { return nodes_inside_; }

 private:
  SpaceTimeGrid grid_;
  Cylinder region_;
  std::vector<double> cell_w_;
  std::vector<double> node_w_;
  std::vector<double> slice_w_;
  std::vector<std::size_t> active_cells_;
  std::vector<std::size_t> active_nodes_;
  std::vector<int> active_slices_;
  std::vector<int> slices_inside_;
  std::vector<std::size_t> nodes_inside_;
  double ball_measure_ = 0.0;
  double interval_measure_ = 0.0;
};

/// Sum over the cylinder of a nodal integrand g(node, slice).
template <class G>
double integrate_nodes(const CylinderQuadrature& quad, G&& g) {
  const auto nw = quad.node_weights();
  const auto sw = quad.slice_weights();
  double total = 0.0;
  for (const int j : quad.active_slices()) {
    double s = 0.0;
    for (const std::size_t i : quad.active_nodes()) s += nw[i] * g(i, j);
    total += sw[static_cast<std::size_t>(j)] * s;
  }
  return total;
}

/// Sum over the cylinder of a cell integrand g(cell, slice).
template <class G>
double integrate_cells(const CylinderQuadrature& quad, G&& g) {
  const auto cw = quad.cell_weights();
  const auto sw = quad.slice_weights();
  double total = 0.0;
  for (const int j : quad.active_slices()) {
    double s = 0.0;
    for (const std::size_t c : quad.active_cells()) s += cw[c] * g(c, j);
    total += sw[static_cast<std::size_t>(j)] * s;
  }
  return total;
}

/// Spatial mean over the ball of a nodal integrand at one slice.
template <class G>
double spatial_mean(const CylinderQuadrature& quad, int slice, G&& g) {
  const auto nw = quad.node_weights();
  double s = 0.0;
  for (const std::size_t i : quad.active_nodes()) s += nw[i] * g(i, slice);
  return s / quad.ball_measure();
}

/// Supremum over the time interval of the spatial mean of g. The time profile
/// is piecewise linear between slices, so the supremum is attained at a slice
/// inside the interval or at an interpolated endpoint.
template <class G>
double sup_spatial_mean(const CylinderQuadrature& quad, G&& g) {
  const auto& grid = quad.grid();
  const double a = quad.region().t_begin();
  const double b = quad.region().t0;
  const double t_first = grid.time(0);
  const double dt = grid.dt();
  double best = -std::numeric_limits<double>::infinity();
  for (const int j : quad.slices_inside()) best = std::max(best, spatial_mean(quad, j, g));
  for (const double t : {a, b}) {
    const double s = (t - t_first) / dt;
    int j = static_cast<int>(s);
    if (j >= grid.nt() - 1) j = grid.nt() - 2;
    if (j < 0) j = 0;
    const double w = s - j;
    if (w <= 1e-12 || w >= 1.0 - 1e-12) continue;  // endpoint sits on a slice
    const double m = (1.0 - w) * spatial_mean(quad, j, g) + w * spatial_mean(quad, j + 1, g);
    best = std::max(best, m);
  }
  return best;
}

/// Unnormalized integral of f over the cylinder.
double integrate_cylinder(const Field& f, const Cylinder& region);

/// Integral average of f over the cylinder.
double mean_cylinder(const Field& f, const Cylinder& region);

/// sup over t in the interval of the spatial average of f over the ball.
double sup_time_spatial_mean(const Field& f, const Cylinder& region);

/// Radially piecewise-linear eta (1 on B_{r_in}, 0 outside B_{r_out}) and a
/// nondecreasing piecewise-linear zeta (0 before t0 - len_out, 1 after t0 - len_in).
struct CutoffPair {
  Point x0{};
  double t0 = 0.0;
  double r_in = 0.0;
  double r_out = 1.0;
  double len_in = 0.0;
  double len_out = 1.0;

  [[nodiscard]] double eta(const Point& x, int dim) const;
  [[nodiscard]] double zeta(double t) const;
  /// |D eta| of the continuous profile (one-sided value 0 on the plateau).
  [[nodiscard]] double grad_eta_norm(const Point& x, int dim) const;
  /// d zeta/dt; at the two kinks the mean of the one-sided derivatives.
  [[nodiscard]] double dzeta(double t) const;
};

/// Cutoffs with plateau on `inner` and support in `outer`. Both cylinders must
/// share (x0, t0); throws DegenerateGap unless inner is strictly smaller in
/// both radius and time length.
CutoffPair build_cutoffs(const Cylinder& outer, const Cylinder& inner);

}  // namespace dplab
