#include "dplab/random_field.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dplab/error.hpp"

namespace dplab {

namespace {

struct AxisBasis {
  std::size_t count = 0;       // 2 * modes + 1
  std::vector<int> frequency;  // per basis index
  std::vector<double> values;  // point-major: values[point * count + index]
};

AxisBasis axis_basis(int modes, int points, double first, double step, double center, double half) {
  AxisBasis b;
  b.count = static_cast<std::size_t>(2 * modes + 1);
  b.frequency.assign(b.count, 0);
  for (int j = 1; j <= modes; ++j) {
    b.frequency[static_cast<std::size_t>(2 * j - 1)] = j;
    b.frequency[static_cast<std::size_t>(2 * j)] = j;
  }
  b.values.resize(b.count * static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    const double s = (first + i * step - center) / half;
    double* row = b.values.data() + static_cast<std::size_t>(i) * b.count;
    row[0] = 1.0;
    for (int j = 1; j <= modes; ++j) {
      row[2 * j - 1] = std::cos(j * std::numbers::pi * s);
      row[2 * j] = std::sin(j * std::numbers::pi * s);
    }
  }
  return b;
}

double uniform_pm1(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-52 - 1.0;
}

}  // namespace

void RandomFieldSpec::validate() const {
  DPLAB_THROW_IF(modes < 1, ErrorCode::InvalidArgument, "modes must be >= 1");
  DPLAB_THROW_IF(std::isnan(decay) || decay < 0.0, ErrorCode::InvalidArgument, "decay must be >= 0");
}

Field generate_field(const RandomFieldSpec& spec, const SpaceTimeGrid& grid) {
  spec.validate();
  const int dim = grid.dim();
  const int nx = grid.nx();
  const auto bx = axis_basis(spec.modes, nx, grid.coord(0, 0), grid.h(), grid.x0()[0], grid.radius());
  const auto by = dim == 2 ? axis_basis(spec.modes, nx, grid.coord(1, 0), grid.h(), grid.x0()[1], grid.radius())
                           : axis_basis(0, 1, 0.0, 0.0, 0.0, 1.0);
  const double t_mid = grid.t0() - 0.5 * grid.time_length();
  const auto bt = axis_basis(spec.modes, grid.nt(), grid.time(0), grid.dt(), t_mid, 0.5 * grid.time_length());

  const std::size_t m = bx.count;
  const std::size_t my = by.count;
  const std::size_t mt = bt.count;
  // Coefficients c[(ky * m + kx) * mt + kt], drawn in that order.
  std::vector<double> coef(m * my * mt);
  std::mt19937_64 gen(spec.seed);
  for (std::size_t ky = 0; ky < my; ++ky) {
    for (std::size_t kx = 0; kx < m; ++kx) {
      for (std::size_t kt = 0; kt < mt; ++kt) {
        const double u = uniform_pm1(gen);
        const int freq = bx.frequency[kx] + by.frequency[ky] + bt.frequency[kt];
        const double w = freq == 0 ? 1.0 : std::pow(1.0 + freq, -spec.decay);
        coef[(ky * m + kx) * mt + kt] = u * w;
      }
    }
  }

  const std::size_t ny = dim == 2 ? static_cast<std::size_t>(nx) : 1;
  std::vector<double> values(grid.size());
  std::vector<double> c2(m * my), c1(m);
  for (int j = 0; j < grid.nt(); ++j) {
    const double* tb = bt.values.data() + static_cast<std::size_t>(j) * mt;
    for (std::size_t k = 0; k < m * my; ++k) {
      double s = 0.0;
      for (std::size_t kt = 0; kt < mt; ++kt) s += coef[k * mt + kt] * tb[kt];
      c2[k] = s;
    }
    for (std::size_t iy = 0; iy < ny; ++iy) {
      const double* yb = by.values.data() + iy * my;
      for (std::size_t kx = 0; kx < m; ++kx) {
        double s = 0.0;
        for (std::size_t ky = 0; ky < my; ++ky) s += c2[ky * m + kx] * yb[ky];
        c1[kx] = s;
      }
      for (std::size_t ix = 0; ix < static_cast<std::size_t>(nx); ++ix) {
        const double* xb = bx.values.data() + ix * m;
        double s = 0.0;
        for (std::size_t kx = 0; kx < m; ++kx) s += c1[kx] * xb[kx];
        values[static_cast<std::size_t>(j) * grid.nodes_per_slice() + iy * static_cast<std::size_t>(nx) + ix] = s;
      }
    }
  }
  return Field(grid, std::move(values));
}

}  // namespace dplab
