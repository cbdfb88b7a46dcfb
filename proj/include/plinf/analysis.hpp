#ifndef PLINF_ANALYSIS_HPP_
#define PLINF_ANALYSIS_HPP_

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plinf/cones.hpp"
#include "plinf/field.hpp"

namespace plinf {

struct HolderEstimate {
  double alpha = 1.0;
  double value = 0.0;
  Index first = -1;
  Index second = -1;
  /// False when the pair scan was subsampled; value is then a lower estimate.
  bool exhaustive = true;
};

/// Node count above which the Hölder scan switches to a stratified subsample.
inline constexpr Index kExhaustiveHolderLimit = 20000;

/// max |u(x) - u(y)| / |x - y|^alpha over pairs of defined nodes.
HolderEstimate holder_seminorm(const ScalarField& u, double alpha);

/// max |u - v| over mask.
double sup_error(const ScalarField& u, const ScalarField& v, const NodeMask& mask);
/// max |u - v| over the common domain.
double sup_error(const ScalarField& u, const ScalarField& v);

/// A-priori Hölder exponent 1 - d/p of W^{1,p} functions.
inline double default_alpha(double p, int d) {
  return is_infinite_exponent(p) ? 1.0 : 1.0 - static_cast<double>(d) / p;
}

/// Balancing choice of eps:
/// (1/2 (d-1)/(p-1))^{1/(2 alpha + 2)}, or exponent 1/2 with positive gradient.
template <typename Scalar>
Scalar optimal_epsilon(Scalar p, int d, Scalar alpha, bool positive_gradient) {
  using std::pow;
  if (!(alpha > Scalar(0) && alpha <= Scalar(1))) throw std::domain_error("optimal_epsilon: alpha must lie in (0, 1]");
  if (is_infinite_exponent(p)) return Scalar(0);
  if (!(p > Scalar(d))) throw std::domain_error("optimal_epsilon: requires p > d");
  const Scalar base = one_minus_beta(p, d) / Scalar(2);
  return pow(base, positive_gradient ? Scalar(0.5) : Scalar(1) / (Scalar(2) * alpha + Scalar(2)));
}

/// 2^{-beta} - 1/2 <= eps^{2-alpha} / (2^{7+alpha} ||u_inf||^3 [u_p]_alpha).
template <typename Scalar>
bool restriction_check(Scalar eps, Scalar p, int d, Scalar alpha, Scalar sup_uinf, Scalar seminorm_up) {
  using std::pow;
  if (is_infinite_exponent(p)) return true;
  const Scalar lhs = half_power_gap(p, d);
  const Scalar rhs = pow(eps, Scalar(2) - alpha) /
                     (pow(Scalar(2), Scalar(7) + alpha) * sup_uinf * sup_uinf * sup_uinf * seminorm_up);
  return lhs <= rhs;
}

/// Inputs of the general rate bound.
template <typename Scalar>
struct RateBoundInputs {
  Scalar p;
  int d = 2;
  Scalar alpha = Scalar(1);
  Scalar seminorm_up = Scalar(1);  // [u_p]_alpha (or the limsup H)
  Scalar lip_uinf = Scalar(1);     // [u_inf]_1
  Scalar sup_uinf = Scalar(1);     // ||u_inf||_inf
  Scalar diam = Scalar(1);
  Scalar boundary_gap = Scalar(0);
  bool positive_gradient = false;
  Scalar gamma = Scalar(1);
};

/// 2 diam + 3 ||u_inf||^2.
template <typename Scalar>
Scalar perturbation_constant(Scalar diam, Scalar sup_uinf) {
  return Scalar(2) * diam + Scalar(3) * sup_uinf * sup_uinf;
}

/// (2 + 2^alpha)[u_p] eps^alpha + 4 [u_inf]_1 eps + C (...)^{1/3} + gap, or the
/// positive-gradient variant with a linear last-but-one term scaled by 1/gamma^2.
/// Throws std::domain_error when the restriction between p and eps fails in
/// the general case.
template <typename Scalar>
Scalar bound_general_rate(Scalar eps, const RateBoundInputs<Scalar>& in) {
  using std::cbrt;
  using std::pow;
  if (!(eps > Scalar(0) && eps < Scalar(0.5))) throw std::domain_error("bound_general_rate: eps must lie in (0, 1/2)");
  if (!(in.alpha > Scalar(0) && in.alpha <= Scalar(1))) throw std::domain_error("bound_general_rate: alpha must lie in (0, 1]");
  const Scalar holder_terms = (Scalar(2) + pow(Scalar(2), in.alpha)) * in.seminorm_up * pow(eps, in.alpha) +
                              Scalar(4) * in.lip_uinf * eps;
  const Scalar tilde_c = perturbation_constant(in.diam, in.sup_uinf);
  const Scalar defect = is_infinite_exponent(in.p)
                            ? Scalar(0)
                            : in.seminorm_up * pow(eps, in.alpha - Scalar(2)) * half_power_gap(in.p, in.d);
  if (in.positive_gradient) {
    if (!(in.gamma > Scalar(0))) throw std::domain_error("bound_general_rate: gamma must be positive");
    const Scalar c = pow(Scalar(2), Scalar(2) + in.alpha) * tilde_c;
    return holder_terms + c / (in.gamma * in.gamma) * defect + in.boundary_gap;
  }
  if (!restriction_check(eps, in.p, in.d, in.alpha, in.sup_uinf, in.seminorm_up)) {
    throw std::domain_error("p too small for this eps: restriction between p and eps violated");
  }
  const Scalar c = pow(Scalar(2), (Scalar(4) + in.alpha) / Scalar(3)) * tilde_c;
  return holder_terms + c * cbrt(defect) + in.boundary_gap;
}

/// bound_general_rate at eps = optimal_epsilon(p, d, alpha, positive_gradient),
/// with the seminorm replaced by H.
template <typename Scalar>
Scalar bound_explicit_rate(const RateBoundInputs<Scalar>& in) {
  const Scalar eps = optimal_epsilon(in.p, in.d, in.alpha, in.positive_gradient);
  if (eps == Scalar(0)) return in.boundary_gap;
  return bound_general_rate(eps, in);
}

/// Pre-limit Morrey factor 2pd/(p-d).
template <typename Scalar>
Scalar morrey_factor(Scalar p, int d) {
  if (!(p > Scalar(d))) throw std::domain_error("morrey_factor: requires p > d");
  return Scalar(2) * p * Scalar(d) / (p - Scalar(d));
}

/// Asymptotic bound 4 ||grad g||_{L^p} + [g]_{alpha_p} on H.
template <typename Scalar>
Scalar morrey_H_bound(Scalar p, int d, Scalar grad_g_norm, Scalar seminorm_g) {
  if (!(p > Scalar(d))) throw std::domain_error("morrey_H_bound: requires p > d");
  return Scalar(4) * grad_g_norm + seminorm_g;
}

struct RateRow {
  double p = 0.0;
  double eps = 0.0;
  double sup_error = 0.0;
  std::optional<double> bound_general;
  std::optional<double> bound_posgrad;
  double boundary_gap = 0.0;
};

struct RateFit {
  double exponent = 0.0;
  double intercept = 0.0;
  /// Root-mean-square residual of the log-log fit.
  double residual = 0.0;
  double p_min = 0.0;
  double p_max = 0.0;
  std::size_t rows_used = 0;
  std::vector<std::string> warnings;
};

/// Least-squares slope of log(sup_error) against log(p). Rows with a
/// nonpositive error are skipped with a warning; fewer than three usable
/// rows or repeated p values throw std::invalid_argument.
RateFit fit_rate(const std::vector<RateRow>& rows);

/// min over Omega_2eps of S_-^eps u, the discrete stand-in for ess inf |grad u|.
double measure_gamma(const ScalarField& u, double eps);

}  // namespace plinf

#endif  // PLINF_ANALYSIS_HPP_
