#include "dplab/exponents.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "dplab/error.hpp"

namespace dplab {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorCode::ExponentOrder: return "ExponentOrder";
    case ErrorCode::GapTooWide: return "GapTooWide";
    case ErrorCode::GapTooWideForEmbedding: return "GapTooWideForEmbedding";
    case ErrorCode::NonpositiveVartheta: return "NonpositiveVartheta";
    case ErrorCode::EmptyRegion: return "EmptyRegion";
    case ErrorCode::DegenerateGap: return "DegenerateGap";
    case ErrorCode::CylinderOutOfRange: return "CylinderOutOfRange";
    case ErrorCode::NegativeArgument: return "NegativeArgument";
    case ErrorCode::EmptySampleSet: return "EmptySampleSet";
    case ErrorCode::PicardDiverged: return "PicardDiverged";
    case ErrorCode::CgStalled: return "CgStalled";
    case ErrorCode::TestNotCompactlySupported: return "TestNotCompactlySupported";
    case ErrorCode::LevelSignMismatch: return "LevelSignMismatch";
    case ErrorCode::SmallnessViolated: return "SmallnessViolated";
    case ErrorCode::InsufficientPoints: return "InsufficientPoints";
    case ErrorCode::ConfigInvalid: return "ConfigInvalid";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

void validate_params(int n, double p, double q) {
  DPLAB_THROW_IF(n < 2, ErrorCode::DimensionTooSmall, "n = " + std::to_string(n) + " < 2");
  DPLAB_THROW_IF(!(p >= 2.0) || !(q > p), ErrorCode::ExponentOrder,
                 "need 2 <= p < q, got p = " + std::to_string(p) + ", q = " + std::to_string(q));
  const double tilde_p = compute_tilde_p(n, p);
  DPLAB_THROW_IF(!(q < tilde_p), ErrorCode::GapTooWide,
                 "need q < p + p/n = " + std::to_string(tilde_p) + ", got q = " + std::to_string(q));
}

double compute_tilde_p(int n, double p) {
  DPLAB_THROW_IF(n < 2, ErrorCode::DimensionTooSmall, "n = " + std::to_string(n) + " < 2");
  DPLAB_THROW_IF(!(p >= 2.0), ErrorCode::ExponentOrder, "p must be >= 2");
  return p + p / n;
}

double compute_theta(int n, double p, double q) {
  DPLAB_THROW_IF(n < 2, ErrorCode::DimensionTooSmall, "n = " + std::to_string(n) + " < 2");
  DPLAB_THROW_IF(!(p >= 2.0) || !(q > p), ErrorCode::ExponentOrder, "need 2 <= p < q");
  // theta < 1  <=>  (n-1) q < p n
  DPLAB_THROW_IF(!((n - 1) * q < p * n), ErrorCode::GapTooWideForEmbedding,
                 "need q < p + p/(n-1) = " + std::to_string(p + p / (n - 1)));
  const double num = 2.0 * p * q * n - 4.0 * p * n;
  const double den = 2.0 * p * q * n - 4.0 * q * n + 4.0 * q;
  return num / den;
}

VarthetaLambda compute_vartheta_and_lambda(const ExponentSet& exps) {
  const double tp = compute_tilde_p(exps.n, exps.p);
  const double theta = compute_theta(exps.n, exps.p, tp);
  const double vartheta = tp * theta / exps.p + tp * (1.0 - theta) / 2.0 - 1.0;
  DPLAB_THROW_IF(!(vartheta > 0.0), ErrorCode::NonpositiveVartheta,
                 "vartheta = " + std::to_string(vartheta));
  const double log_lambda = std::numbers::ln2 * tp * (1.0 + vartheta) / vartheta;
  return {vartheta, std::exp(log_lambda), log_lambda};
}

ExponentSet ExponentSet::make(int n, double p, double q, double nu, double ell_bound,
                              double a_sup) {
  validate_params(n, p, q);
  DPLAB_THROW_IF(!(nu > 0.0) || !(ell_bound >= nu), ErrorCode::InvalidArgument,
                 "need 0 < nu <= L");
  DPLAB_THROW_IF(!(a_sup >= 0.0) || !std::isfinite(a_sup), ErrorCode::InvalidArgument,
                 "need 0 <= ||a||_inf < inf");
  ExponentSet e;
  e.n = n;
  e.p = p;
  e.q = q;
  e.nu = nu;
  e.ell_bound = ell_bound;
  e.a_sup = a_sup;
  e.tilde_p = compute_tilde_p(n, p);
  e.theta = compute_theta(n, p, e.tilde_p);
  e.theta_embedding = compute_theta(n, p, q);
  const auto vl = compute_vartheta_and_lambda(e);
  e.vartheta = vl.vartheta;
  e.vartheta_theorem = vl.vartheta + 1.0;
  e.lambda = vl.lambda;
  e.log_lambda = vl.log_lambda;
  return e;
}

double energy_exponent(const ExponentSet& exps, double vartheta) {
  return vartheta / ((exps.tilde_p - exps.q) * (1.0 + vartheta));
}

double blowup_exponent(const ExponentSet& exps) { return exps.q / (exps.q - exps.tilde_p); }

double level_magnitude(const ExponentSet& exps, double sigma, double y0, double c_star) {
  DPLAB_THROW_IF(!(sigma > 0.0 && sigma < 1.0), ErrorCode::InvalidArgument, "sigma must be in (0,1)");
  DPLAB_THROW_IF(!(y0 >= 0.0) || !std::isfinite(y0), ErrorCode::InvalidArgument, "y0 must be finite and >= 0");
  DPLAB_THROW_IF(!(c_star > 1.0), ErrorCode::InvalidArgument, "c_star must exceed 1");
  if (y0 == 0.0) return 0.0;
  const double log_k = std::log(c_star) + blowup_exponent(exps) * std::log1p(-sigma) +
                       energy_exponent(exps, exps.vartheta) * std::log(y0);
  return std::exp(log_k);
}

}  // namespace dplab
