#pragma once

// Double phase integrand H(z, kappa) = kappa^p + a(z) kappa^q, the model flux
// A(z, xi) = |xi|^{p-2} xi + a(z) |xi|^{q-2} xi and the coefficient a(x, t).

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dplab/exponents.hpp"
#include "dplab/mesh.hpp"

namespace dplab {

/// Nonnegative bounded coefficient a(x, t).
class CoefficientFn {
 public:
  enum class Kind { constant, smooth_bump, checkerboard, sampled };

  /// a == value everywhere.
  static CoefficientFn constant(double value);
  /// a = a_sup * exp(1 - 1/(1 - s^2)) with s = (x1 - center)/width for |s| < 1, else 0.
  /// With the defaults the bump lives on 0 < x1 < 2 and vanishes on x1 <= 0.
  static CoefficientFn smooth_bump(double a_sup, double center = 1.0, double width = 1.0);
  /// Space-time checkerboard taking the values 0 and a_sup on cells of the given size.
  static CoefficientFn checkerboard(double a_sup, double cell_size = 0.25, double time_cell = 0.125);
  /// Multilinear interpolation of nodal samples (clamped to the sample grid).
  static CoefficientFn sampled(Field samples);

  [[nodiscard]] Kind kind() const { return kind_; }
  [[nodiscard]] double a_sup() const { return a_sup_; }
  [[nodiscard]] double operator()(const Point& x, double t) const;
  [[nodiscard]] double operator()(const SpaceTimePoint& z) const { return (*this)(z.x, z.t); }

  [[nodiscard]] double param(int i) const { return params_[i]; }
  [[nodiscard]] const Field* samples() const { return samples_.get(); }

 private:
  Kind kind_ = Kind::constant;
  double a_sup_ = 0.0;
  double params_[3] = {0.0, 0.0, 0.0};
  std::shared_ptr<const Field> samples_;
};

std::string to_string(CoefficientFn::Kind kind);

/// Model flux with growth exponents 2 <= p <= q, a coefficient and a scalar multiple.
///
/// `q_phase == false` selects the pure p-Laplacian path, which never touches
/// the coefficient or q.
struct FluxModel {
  double p = 2.0;
  double q = 2.5;
  CoefficientFn coeff = CoefficientFn::constant(0.0);
  double scale = 1.0;
  bool q_phase = true;

  FluxModel() = default;
  FluxModel(double p, double q, CoefficientFn coeff, double scale = 1.0);
  FluxModel(const ExponentSet& exps, CoefficientFn coeff);
  /// Pure p-Laplacian. `cutoff_q` (default p) only sets the power of the spatial
  /// cutoff in the Caccioppoli sides.
  static FluxModel p_only(double p, double cutoff_q = 0.0);

  [[nodiscard]] double a(const Point& x, double t) const { return q_phase ? coeff(x, t) : 0.0; }

  /// H given the coefficient value at z.
  [[nodiscard]] double h(double a_value, double kappa) const;
  /// |A| / |xi| given the coefficient value and s = |xi|.
  [[nodiscard]] double flux_factor(double a_value, double s) const;
};

/// kappa^p + a(z) kappa^q. Throws NegativeArgument for kappa < 0.
double h_integrand(const FluxModel& flux, const SpaceTimePoint& z, double kappa);

/// A(z, xi); exactly zero for |xi| < 1e-150.
std::vector<double> model_flux(const FluxModel& flux, const SpaceTimePoint& z,
                               std::span<const double> xi);

struct StructureConstants {
  double nu;
  double ell_bound;
};

/// One sampled evaluation of an arbitrary flux: A(z, xi) together with a(z).
struct FluxSample {
  double a_value;
  std::vector<double> xi;
  std::vector<double> flux;
};

/// Tightest (nu, L) with A.xi >= nu H(z,|xi|) and |A| <= L (|xi|^{p-1} + a |xi|^{q-1})
/// over the samples of the model flux. Samples with xi == 0 carry no information.
StructureConstants check_structure(const FluxModel& flux,
                                   std::span<const std::pair<SpaceTimePoint, std::vector<double>>> samples);

/// Same bound extraction for externally sampled flux values with exponents (p, q).
StructureConstants check_structure(double p, double q, std::span<const FluxSample> samples);

}  // namespace dplab
