#include "dplab/doublephase.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dplab/error.hpp"

namespace dplab {

namespace {

constexpr double kFluxFloor = 1e-150;

double bump(double s) {
  if (std::abs(s) >= 1.0) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double floor_mod2(double x) {
  const double f = std::floor(x);
  return f - 2.0 * std::floor(0.5 * f);
}

double clamp_index(double s, int n) { return std::clamp(s, 0.0, static_cast<double>(n - 1)); }

double interpolate_sampled(const Field& f, const Point& x, double t) {
  const auto& g = f.grid();
  const double st = clamp_index((t - g.time(0)) / g.dt(), g.nt());
  const int j0 = std::min(static_cast<int>(st), g.nt() - 2);
  const double wt = st - j0;
  const auto axis = [&](int a, int& i0, double& w) {
    const double s = clamp_index((x[a] - g.coord(a, 0)) / g.h(), g.nx());
    i0 = std::min(static_cast<int>(s), g.nx() - 2);
    w = s - i0;
  };
  int ix = 0;
  int iy = 0;
  double wx = 0.0;
  double wy = 0.0;
  axis(0, ix, wx);
  if (g.dim() == 2) axis(1, iy, wy);
  const auto nx = static_cast<std::size_t>(g.nx());
  const auto spatial = [&](int j) {
    const auto node = [&](int dx, int dy) {
      return f.at(static_cast<std::size_t>(iy + dy) * nx + static_cast<std::size_t>(ix + dx), j);
    };
    const double lo = (1.0 - wx) * node(0, 0) + wx * node(1, 0);
    if (g.dim() == 1) return lo;
    const double hi = (1.0 - wx) * node(0, 1) + wx * node(1, 1);
    return (1.0 - wy) * lo + wy * hi;
  };
  return (1.0 - wt) * spatial(j0) + wt * spatial(j0 + 1);
}

}  // namespace

std::string to_string(CoefficientFn::Kind kind) {
  switch (kind) {
    case CoefficientFn::Kind::constant: return "constant";
    case CoefficientFn::Kind::smooth_bump: return "smooth_bump";
    case CoefficientFn::Kind::checkerboard: return "checkerboard";
    case CoefficientFn::Kind::sampled: return "sampled";
  }
  return "unknown";
}

CoefficientFn CoefficientFn::constant(double value) {
  DPLAB_THROW_IF(!(value >= 0.0) || !std::isfinite(value), ErrorCode::InvalidArgument,
                 "coefficient must be finite and nonnegative");
  CoefficientFn c;
  c.kind_ = Kind::constant;
  c.a_sup_ = value;
  c.params_[0] = value;
  return c;
}

CoefficientFn CoefficientFn::smooth_bump(double a_sup, double center, double width) {
  DPLAB_THROW_IF(!(a_sup >= 0.0) || !std::isfinite(a_sup), ErrorCode::InvalidArgument,
                 "a_sup must be finite and nonnegative");
  DPLAB_THROW_IF(!(width > 0.0), ErrorCode::InvalidArgument, "bump width must be positive");
  CoefficientFn c;
  c.kind_ = Kind::smooth_bump;
  c.a_sup_ = a_sup;
  c.params_[0] = center;
  c.params_[1] = width;
  return c;
}

CoefficientFn CoefficientFn::checkerboard(double a_sup, double cell_size, double time_cell) {
  DPLAB_THROW_IF(!(a_sup >= 0.0) || !std::isfinite(a_sup), ErrorCode::InvalidArgument,
                 "a_sup must be finite and nonnegative");
  DPLAB_THROW_IF(!(cell_size > 0.0) || !(time_cell > 0.0), ErrorCode::InvalidArgument,
                 "checkerboard cells must be positive");
  CoefficientFn c;
  c.kind_ = Kind::checkerboard;
  c.a_sup_ = a_sup;
  c.params_[0] = cell_size;
  c.params_[1] = time_cell;
  return c;
}

CoefficientFn CoefficientFn::sampled(Field samples) {
  double sup = 0.0;
  for (const double v : samples.values()) {
    DPLAB_THROW_IF(v < 0.0, ErrorCode::InvalidArgument, "sampled coefficient must be nonnegative");
    sup = std::max(sup, v);
  }
  CoefficientFn c;
  c.kind_ = Kind::sampled;
  c.a_sup_ = sup;
  c.samples_ = std::make_shared<const Field>(std::move(samples));
  return c;
}

double CoefficientFn::operator()(const Point& x, double t) const {
  switch (kind_) {
    case Kind::constant:
      return a_sup_;
    case Kind::smooth_bump:
      return a_sup_ * bump((x[0] - params_[0]) / params_[1]);
    case Kind::checkerboard: {
      const double parity = floor_mod2(std::floor(x[0] / params_[0]) + std::floor(x[1] / params_[0]) +
                                       std::floor(t / params_[1]));
      return parity == 0.0 ? a_sup_ : 0.0;
    }
    case Kind::sampled:
      return interpolate_sampled(*samples_, x, t);
  }
  return 0.0;
}

FluxModel::FluxModel(double p_, double q_, CoefficientFn coeff_, double scale_)
    : p(p_), q(q_), coeff(std::move(coeff_)), scale(scale_) {
  DPLAB_THROW_IF(!(p >= 2.0) || !(q >= p), ErrorCode::ExponentOrder, "need 2 <= p <= q");
  DPLAB_THROW_IF(!(scale > 0.0), ErrorCode::InvalidArgument, "flux scale must be positive");
}

FluxModel::FluxModel(const ExponentSet& exps, CoefficientFn coeff_)
    : FluxModel(exps.p, exps.q, std::move(coeff_)) {}

FluxModel FluxModel::p_only(double p, double cutoff_q) {
  FluxModel f(p, cutoff_q > 0.0 ? cutoff_q : p, CoefficientFn::constant(0.0));
  f.q_phase = false;
  return f;
}

double FluxModel::h(double a_value, double kappa) const {
  if (!q_phase) return std::pow(kappa, p);
  return std::pow(kappa, p) + a_value * std::pow(kappa, q);
}

double FluxModel::flux_factor(double a_value, double s) const {
  if (s < kFluxFloor) return 0.0;
  if (!q_phase) return scale * std::pow(s, p - 2.0);
  return scale * (std::pow(s, p - 2.0) + a_value * std::pow(s, q - 2.0));
}

double h_integrand(const FluxModel& flux, const SpaceTimePoint& z, double kappa) {
  DPLAB_THROW_IF(kappa < 0.0, ErrorCode::NegativeArgument, "H is defined for kappa >= 0");
  return flux.h(flux.a(z.x, z.t), kappa);
}

std::vector<double> model_flux(const FluxModel& flux, const SpaceTimePoint& z,
                               std::span<const double> xi) {
  double s2 = 0.0;
  for (const double v : xi) s2 += v * v;
  const double factor = flux.flux_factor(flux.a(z.x, z.t), std::sqrt(s2));
  std::vector<double> out(xi.begin(), xi.end());
  for (double& v : out) v *= factor;
  return out;
}

namespace {

struct Bounds {
  double nu = std::numeric_limits<double>::infinity();
  double ell = 0.0;
  bool any = false;

  void add(double p, double q, double a, std::span<const double> xi, std::span<const double> flux) {
    double s2 = 0.0;
    double dot = 0.0;
    double f2 = 0.0;
    for (std::size_t i = 0; i < xi.size(); ++i) {
      s2 += xi[i] * xi[i];
      dot += flux[i] * xi[i];
      f2 += flux[i] * flux[i];
    }
    const double s = std::sqrt(s2);
    if (s < kFluxFloor) return;
    const double lower = std::pow(s, p) + a * std::pow(s, q);
    const double upper = std::pow(s, p - 1.0) + a * std::pow(s, q - 1.0);
    nu = std::min(nu, dot / lower);
    ell = std::max(ell, std::sqrt(f2) / upper);
    any = true;
  }
};

}  // namespace

StructureConstants check_structure(
    const FluxModel& flux, std::span<const std::pair<SpaceTimePoint, std::vector<double>>> samples) {
  DPLAB_THROW_IF(samples.empty(), ErrorCode::EmptySampleSet, "no samples");
  Bounds b;
  for (const auto& [z, xi] : samples) {
    const double a = flux.a(z.x, z.t);
    const auto f = model_flux(flux, z, xi);
    b.add(flux.p, flux.q_phase ? flux.q : flux.p, flux.q_phase ? a : 0.0, xi, f);
  }
  DPLAB_THROW_IF(!b.any, ErrorCode::EmptySampleSet, "every sample has xi == 0");
  return {b.nu, b.ell};
}

StructureConstants check_structure(double p, double q, std::span<const FluxSample> samples) {
  DPLAB_THROW_IF(samples.empty(), ErrorCode::EmptySampleSet, "no samples");
  Bounds b;
  for (const auto& s : samples) {
    DPLAB_THROW_IF(s.xi.size() != s.flux.size(), ErrorCode::InvalidArgument,
                   "xi and flux must have the same length");
    b.add(p, q, s.a_value, s.xi, s.flux);
  }
  DPLAB_THROW_IF(!b.any, ErrorCode::EmptySampleSet, "every sample has xi == 0");
  return {b.nu, b.ell};
}

}  // namespace dplab
