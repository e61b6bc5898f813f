#include "dplab/mesh.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dplab/error.hpp"

namespace dplab {

namespace {

constexpr double kGeomTol = 1e-12;

// Area of {0 <= X <= x, 0 <= Y <= y, X^2 + Y^2 <= r^2} for x, y >= 0.
double quadrant_area(double x, double y, double r) {
  x = std::min(x, r);
  y = std::min(y, r);
  if (x <= 0.0 || y <= 0.0) return 0.0;
  // primitive of sqrt(r^2 - s^2)
  const auto prim = [r](double a) {
    const double c = std::clamp(a / r, -1.0, 1.0);
    return 0.5 * (a * std::sqrt(std::max(r * r - a * a, 0.0)) + r * r * std::asin(c));
  };
  const double s_star = std::sqrt(std::max(r * r - y * y, 0.0));
  if (x <= s_star) return x * y;
  return s_star * y + prim(x) - prim(s_star);
}

double signed_quadrant_area(double x, double y, double r) {
  const double sx = x < 0.0 ? -1.0 : 1.0;
  const double sy = y < 0.0 ? -1.0 : 1.0;
  return sx * sy * quadrant_area(std::abs(x), std::abs(y), r);
}

}  // namespace

Cylinder square_time_cylinder(Point x0, double t0, double radius, double ell) {
  return {x0, t0, radius, ell * ell};
}

SpaceTimeGrid::SpaceTimeGrid(int dim, int nx, int nt, Point x0, double t0, double radius,
                             double time_length)
    : dim_(dim), nx_(nx), nt_(nt), x0_(x0), t0_(t0), radius_(radius), time_length_(time_length) {
  DPLAB_THROW_IF(dim != 1 && dim != 2, ErrorCode::InvalidArgument, "dim must be 1 or 2");
  DPLAB_THROW_IF(nx < 3, ErrorCode::InvalidArgument, "nx must be >= 3");
  DPLAB_THROW_IF(nt < 2, ErrorCode::InvalidArgument, "nt must be >= 2");
  DPLAB_THROW_IF(!(radius > 0.0) || !(time_length > 0.0), ErrorCode::InvalidArgument,
                 "radius and time_length must be positive");
  if (dim == 1) x0_[1] = 0.0;
  h_ = 2.0 * radius / (nx - 1);
  dt_ = time_length / (nt - 1);
  nodes_per_slice_ = dim == 1 ? static_cast<std::size_t>(nx)
                              : static_cast<std::size_t>(nx) * static_cast<std::size_t>(nx);
  cells_per_slice_ = dim == 1 ? static_cast<std::size_t>(nx - 1)
                              : static_cast<std::size_t>(nx - 1) * static_cast<std::size_t>(nx - 1);
}

Point SpaceTimeGrid::node_x(std::size_t node) const {
  const auto n = static_cast<std::size_t>(nx_);
  const int ix = static_cast<int>(node % n);
  const int iy = static_cast<int>(node / n);
  return {coord(0, ix), dim_ == 2 ? coord(1, iy) : 0.0};
}

Point SpaceTimeGrid::cell_center(std::size_t cell) const {
  const auto m = static_cast<std::size_t>(nx_ - 1);
  const int cx = static_cast<int>(cell % m);
  const int cy = static_cast<int>(cell / m);
  return {coord(0, cx) + 0.5 * h_, dim_ == 2 ? coord(1, cy) + 0.5 * h_ : 0.0};
}

std::array<std::size_t, 4> SpaceTimeGrid::cell_corners(std::size_t cell) const {
  const auto n = static_cast<std::size_t>(nx_);
  if (dim_ == 1) return {cell, cell + 1, 0, 0};
  const auto m = n - 1;
  const std::size_t cx = cell % m;
  const std::size_t cy = cell / m;
  const std::size_t base = cy * n + cx;
  return {base, base + 1, base + n, base + n + 1};
}

bool SpaceTimeGrid::is_boundary_node(std::size_t node) const {
  const auto n = static_cast<std::size_t>(nx_);
  const std::size_t ix = node % n;
  if (ix == 0 || ix == n - 1) return true;
  if (dim_ == 1) return false;
  const std::size_t iy = node / n;
  return iy == 0 || iy == n - 1;
}

Field::Field(SpaceTimeGrid grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  DPLAB_THROW_IF(values_.size() != grid_.size(), ErrorCode::InvalidArgument,
                 "field has " + std::to_string(values_.size()) + " values, grid needs " +
                     std::to_string(grid_.size()));
  for (const double v : values_)
    DPLAB_THROW_IF(!std::isfinite(v), ErrorCode::InvalidArgument, "field values must be finite");
}

Field Field::constant(const SpaceTimeGrid& grid, double c) {
  return Field(grid, std::vector<double>(grid.size(), c));
}

Field Field::from_function(const SpaceTimeGrid& grid,
                           const std::function<double(const SpaceTimePoint&)>& fn) {
  std::vector<double> v(grid.size());
  const std::size_t np = grid.nodes_per_slice();
  for (int j = 0; j < grid.nt(); ++j) {
    const double t = grid.time(j);
    for (std::size_t i = 0; i < np; ++i) v[static_cast<std::size_t>(j) * np + i] = fn({grid.node_x(i), t});
  }
  return Field(grid, std::move(v));
}

std::span<const double> Field::slice(int j) const {
  DPLAB_THROW_IF(j < 0 || j >= grid_.nt(), ErrorCode::InvalidArgument, "slice out of range");
  const std::size_t np = grid_.nodes_per_slice();
  return std::span<const double>(values_).subspan(static_cast<std::size_t>(j) * np, np);
}

Field truncate(const Field& f, double k, Sign sign) {
  std::vector<double> v(f.values().begin(), f.values().end());
  for (double& x : v) x = truncation(x, k, sign);
  return Field(f.grid(), std::move(v));
}

Point cell_gradient(const SpaceTimeGrid& grid, std::span<const double> u, std::size_t cell) {
  const auto c = grid.cell_corners(cell);
  const double inv_h = 1.0 / grid.h();
  if (grid.dim() == 1) return {(u[c[1]] - u[c[0]]) * inv_h, 0.0};
  const double gx = 0.5 * ((u[c[1]] - u[c[0]]) + (u[c[3]] - u[c[2]])) * inv_h;
  const double gy = 0.5 * ((u[c[2]] - u[c[0]]) + (u[c[3]] - u[c[1]])) * inv_h;
  return {gx, gy};
}

double cell_average(const SpaceTimeGrid& grid, std::span<const double> u, std::size_t cell) {
  const auto c = grid.cell_corners(cell);
  if (grid.dim() == 1) return 0.5 * (u[c[0]] + u[c[1]]);
  return 0.25 * ((u[c[0]] + u[c[1]]) + (u[c[2]] + u[c[3]]));
}

std::vector<Point> gradient(const Field& f, int slice) {
  const auto u = f.slice(slice);
  std::vector<Point> g(f.grid().cells_per_slice());
  for (std::size_t c = 0; c < g.size(); ++c) g[c] = cell_gradient(f.grid(), u, c);
  return g;
}

double rect_disk_area(double x1, double x2, double y1, double y2, double r) {
  if (x2 <= x1 || y2 <= y1 || r <= 0.0) return 0.0;
  const double a = signed_quadrant_area(x2, y2, r) - signed_quadrant_area(x1, y2, r) -
                   signed_quadrant_area(x2, y1, r) + signed_quadrant_area(x1, y1, r);
  return std::max(a, 0.0);
}

CylinderQuadrature::CylinderQuadrature(const SpaceTimeGrid& grid, const Cylinder& region)
    : grid_(grid), region_(region) {
  DPLAB_THROW_IF(!(region.radius > 0.0) || !(region.length > 0.0), ErrorCode::EmptyRegion,
                 "cylinder radius and length must be positive");
  const double tol = kGeomTol * std::max(1.0, grid.radius());
  for (int a = 0; a < grid.dim(); ++a) {
    DPLAB_THROW_IF(std::abs(region.x0[a] - grid.x0()[a]) + region.radius > grid.radius() + tol,
                   ErrorCode::CylinderOutOfRange, "ball leaves the grid cover");
  }
  const double ttol = kGeomTol * std::max(1.0, grid.time_length());
  const double ta = region.t_begin();
  const double tb = region.t0;
  DPLAB_THROW_IF(ta < grid.time(0) - ttol || tb > grid.t0() + ttol, ErrorCode::CylinderOutOfRange,
                 "time interval leaves the grid cover");

  const double h = grid.h();
  cell_w_.assign(grid.cells_per_slice(), 0.0);
  for (std::size_t c = 0; c < cell_w_.size(); ++c) {
    const Point cc = grid.cell_center(c);
    double w = 0.0;
    if (grid.dim() == 1) {
      const double lo = std::max(cc[0] - 0.5 * h, region.x0[0] - region.radius);
      const double hi = std::min(cc[0] + 0.5 * h, region.x0[0] + region.radius);
      w = std::max(hi - lo, 0.0);
    } else {
      const double dx = cc[0] - region.x0[0];
      const double dy = cc[1] - region.x0[1];
      w = rect_disk_area(dx - 0.5 * h, dx + 0.5 * h, dy - 0.5 * h, dy + 0.5 * h, region.radius);
    }
    cell_w_[c] = w;
    if (w > 0.0) active_cells_.push_back(c);
  }
  for (const double w : cell_w_) ball_measure_ += w;

  node_w_.assign(grid.nodes_per_slice(), 0.0);
  const double share = grid.dim() == 1 ? 0.5 : 0.25;
  for (const std::size_t c : active_cells_) {
    const auto corners = grid.cell_corners(c);
    for (int k = 0; k < grid.corners_per_cell(); ++k) node_w_[corners[k]] += share * cell_w_[c];
  }
  for (std::size_t i = 0; i < node_w_.size(); ++i)
    if (node_w_[i] > 0.0) active_nodes_.push_back(i);

  const double rtol = region.radius * (1.0 + kGeomTol);
  for (std::size_t i = 0; i < node_w_.size(); ++i) {
    const Point x = grid.node_x(i);
    const double dx = x[0] - region.x0[0];
    const double dy = grid.dim() == 2 ? x[1] - region.x0[1] : 0.0;
    if (std::sqrt(dx * dx + dy * dy) <= rtol) nodes_inside_.push_back(i);
  }

  slice_w_.assign(static_cast<std::size_t>(grid.nt()), 0.0);
  const double dt = grid.dt();
  for (int j = 0; j + 1 < grid.nt(); ++j) {
    const double t_lo = grid.time(j);
    const double t_hi = grid.time(j + 1);
    const double s0 = std::max(t_lo, ta);
    const double s1 = std::min(t_hi, tb);
    if (!(s1 > s0)) continue;
    const double len = s1 - s0;
    const double mid = 0.5 * (s0 + s1);
    slice_w_[static_cast<std::size_t>(j)] += len * (t_hi - mid) / dt;
    slice_w_[static_cast<std::size_t>(j) + 1] += len * (mid - t_lo) / dt;
  }
  for (int j = 0; j < grid.nt(); ++j) {
    if (slice_w_[static_cast<std::size_t>(j)] > 0.0) active_slices_.push_back(j);
    interval_measure_ += slice_w_[static_cast<std::size_t>(j)];
    const double t = grid.time(j);
    if (t >= ta - kGeomTol * dt && t <= tb + kGeomTol * dt) slices_inside_.push_back(j);
  }
  DPLAB_THROW_IF(!(ball_measure_ > 0.0) || !(interval_measure_ > 0.0), ErrorCode::EmptyRegion,
                 "cylinder has zero discrete measure");
}

double integrate_cylinder(const Field& f, const Cylinder& region) {
  const CylinderQuadrature quad(f.grid(), region);
  return integrate_nodes(quad, [&f](std::size_t i, int j) { return f.at(i, j); });
}

double mean_cylinder(const Field& f, const Cylinder& region) {
  const CylinderQuadrature quad(f.grid(), region);
  return integrate_nodes(quad, [&f](std::size_t i, int j) { return f.at(i, j); }) / quad.measure();
}

double sup_time_spatial_mean(const Field& f, const Cylinder& region) {
  const CylinderQuadrature quad(f.grid(), region);
  return sup_spatial_mean(quad, [&f](std::size_t i, int j) { return f.at(i, j); });
}

double CutoffPair::eta(const Point& x, int dim) const {
  const double dx = x[0] - x0[0];
  const double dy = dim == 2 ? x[1] - x0[1] : 0.0;
  const double r = std::sqrt(dx * dx + dy * dy);
  if (r <= r_in) return 1.0;
  if (r >= r_out) return 0.0;
  return (r_out - r) / (r_out - r_in);
}

double CutoffPair::zeta(double t) const {
  const double start = t0 - len_out;
  const double full = t0 - len_in;
  if (t <= start) return 0.0;
  if (t >= full) return 1.0;
  return (t - start) / (full - start);
}

double CutoffPair::grad_eta_norm(const Point& x, int dim) const {
  const double dx = x[0] - x0[0];
  const double dy = dim == 2 ? x[1] - x0[1] : 0.0;
  const double r = std::sqrt(dx * dx + dy * dy);
  if (r <= r_in || r >= r_out) return 0.0;
  return 1.0 / (r_out - r_in);
}

double CutoffPair::dzeta(double t) const {
  const double start = t0 - len_out;
  const double full = t0 - len_in;
  const double slope = 1.0 / (full - start);
  const double tol = kGeomTol * std::max(1.0, std::abs(t0));
  if (std::abs(t - start) <= tol || std::abs(t - full) <= tol) return 0.5 * slope;
  if (t > start && t < full) return slope;
  return 0.0;
}

CutoffPair build_cutoffs(const Cylinder& outer, const Cylinder& inner) {
  DPLAB_THROW_IF(outer.x0 != inner.x0 || outer.t0 != inner.t0, ErrorCode::InvalidArgument,
                 "cutoff cylinders must share their center");
  DPLAB_THROW_IF(!(inner.radius < outer.radius) || !(inner.length < outer.length),
                 ErrorCode::DegenerateGap, "inner cylinder must be strictly inside the outer one");
  DPLAB_THROW_IF(!(inner.radius >= 0.0) || !(inner.length >= 0.0), ErrorCode::InvalidArgument,
                 "inner cylinder must have nonnegative extent");
  return {outer.x0, outer.t0, inner.radius, outer.radius, inner.length, outer.length};
}

}  // namespace dplab
