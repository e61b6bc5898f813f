#pragma once

// Parameter regime 2 <= p < q < p + p/n and the exponents derived from it
// (threshold p~, interpolation exponent theta, iteration exponent vartheta,
// decay ratio lambda, level magnitude |k|).

namespace dplab {

/// Validated parameter set with all derived exponents.
///
/// `theta` and `vartheta` are the values used by the level-set iteration,
/// where the interpolation inequality is applied with q replaced by p~.
/// `theta_embedding` is the interpolation exponent at the actual q.
/// `vartheta_theorem` is the same quantity without the trailing -1, as it
/// appears in the exponent of the final sup-bound.
struct ExponentSet {
  int n = 2;
  double p = 2.0;
  double q = 2.5;
  double nu = 1.0;
  double ell_bound = 1.0;
  double a_sup = 0.0;

  double tilde_p = 0.0;
  double theta = 0.0;
  double theta_embedding = 0.0;
  double vartheta = 0.0;
  double vartheta_theorem = 0.0;
  double lambda = 0.0;
  double log_lambda = 0.0;

  /// Validates (n, p, q) and the structure constants, then fills the derived fields.
  static ExponentSet make(int n, double p, double q, double nu = 1.0, double ell_bound = 1.0,
                          double a_sup = 0.0);
};

/// Throws DimensionTooSmall, ExponentOrder or GapTooWide. Strict comparisons, no tolerance.
void validate_params(int n, double p, double q);

/// p + p/n.
double compute_tilde_p(int n, double p);

/// theta = (2pqn - 4pn) / (2pqn - 4qn + 4q). Requires 2 <= p < q < p + p/(n-1).
double compute_theta(int n, double p, double q);

struct VarthetaLambda {
  double vartheta;
  double lambda;
  double log_lambda;
};

/// vartheta = p~ theta/p + p~ (1-theta)/2 - 1 with theta taken at q = p~, and
/// lambda = 2^{p~ (1+vartheta)/vartheta}. Reads n and p from `exps`.
VarthetaLambda compute_vartheta_and_lambda(const ExponentSet& exps);

/// Exponent vartheta / ((p~ - q)(1 + vartheta)) applied to Y_0 in the level choice.
double energy_exponent(const ExponentSet& exps, double vartheta);

/// |k| = c_star (1-sigma)^{q/(q-p~)} y0^{vartheta/((p~-q)(1+vartheta))}, evaluated in
/// log space. Returns 0 when y0 == 0.
double level_magnitude(const ExponentSet& exps, double sigma, double y0, double c_star);

/// q/(q - p~): the blow-up rate in (1 - sigma) of the sup-bound.
double blowup_exponent(const ExponentSet& exps);

}  // namespace dplab
