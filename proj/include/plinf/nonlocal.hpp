#ifndef PLINF_NONLOCAL_HPP_
#define PLINF_NONLOCAL_HPP_

#include <optional>
#include <stdexcept>
#include <string>

#include "plinf/cones.hpp"
#include "plinf/field.hpp"

namespace plinf {

// Finite-difference infinity-Laplacian toolbox. Every operator below reads
// the closed discrete ball of radius eps around a node and is defined on
// the nodes x of Omega_eps whose whole ball lies in the domain of the input
// field; elsewhere the output is undefined.

ScalarField upper_envelope(const ScalarField& u, double eps);
ScalarField lower_envelope(const ScalarField& u, double eps);
/// (u^eps - u)/eps
ScalarField slope_plus(const ScalarField& u, double eps);
/// (u - u_eps)/eps
ScalarField slope_minus(const ScalarField& u, double eps);
/// (sup_B (u(y) - u(x)) + inf_B (u(y) - u(x))) / eps^2
ScalarField nonlocal_inf_laplacian(const ScalarField& u, double eps);

/// Worst violation over x in D of the two-sided comparison of u - a d(x, x0)
/// with its extreme values on the node boundary of D. Nonpositive means
/// u compares with the cone on D. Throws std::invalid_argument("apex must
/// be outside D") when the lattice node nearest to the apex belongs to D.
double check_comparison_with_cones(const ScalarField& u, const Cone& cone, const NodeMask& D);

struct MaxPrincipleCheck {
  bool hypothesis_ok = false;
  /// sup over Omega_eps of (u - v) minus sup over the ring of (u - v).
  double conclusion_gap = 0.0;
  /// Largest amount by which -Lap u <= C <= -Lap v fails on Omega_2eps.
  double hypothesis_violation = 0.0;
  Index nodes_checked = 0;
};

/// Discrete comparison principle for the nonlocal operator: when
/// -Lap u <= C <= -Lap v on Omega_2eps the supremum of u - v over Omega_eps
/// is attained on the ring Omega_eps \ Omega_2eps.
MaxPrincipleCheck check_nonlocal_max_principle(const ScalarField& u, const ScalarField& v, double C,
                                               double eps);

/// w = (1 + 2 delta L) v - delta v^2 with L the sup norm of v over its
/// domain, i.e. lambda(v - L) + const with lambda(t) = t - delta t^2. On
/// the range of v - L <= 0 the map lambda is concave with slope >= 1, which
/// gives -Lap w = lambda'(v - L)(-Lap v) + delta (S_+^2 + S_-^2) exactly.
/// Throws std::invalid_argument("delta exceeds 1/(4·sup-norm)") when delta
/// is out of range.
ScalarField perturb_strict(const ScalarField& v, double delta);

struct StrictPerturbationCheck {
  /// min over Omega_2eps of (-Lap w) - (-Lap v + delta (S_- v)^2), scaled
  /// by the magnitude of the terms involved.
  double relative_margin = 0.0;
  /// 3 ||v||^2 delta - ||v - w||, relative to 3 ||v||^2 delta.
  double distance_margin = 0.0;
  Index nodes_checked = 0;
};

StrictPerturbationCheck check_strict_perturbation(const ScalarField& v, const ScalarField& w,
                                                  double delta, double eps);

struct PositiveSlopeMargins {
  double superharmonic = 0.0;  // min of -Lap v over Omega_2eps
  double slope = 0.0;          // min of S_- v - delta over Omega_2eps
  double lower = 0.0;          // min of v - u over Omega_2eps
  double upper = 0.0;          // min of u + 2 delta dist - v over Omega_2eps
  double tolerance = 0.0;      // slope tolerance tau
  double eps = 0.0;
  Index perturbed_nodes = 0;   // size of the low-slope set

  bool ok() const;
  std::string describe() const;
};

struct PositiveSlopePerturbation {
  ScalarField v;
  PositiveSlopeMargins margins;
};

class ContractError : public std::runtime_error {
 public:
  ContractError(const std::string& what, PositiveSlopeMargins m)
      : std::runtime_error(what), margins(m) {}
  PositiveSlopeMargins margins;
};

/// Lifts a supersolution u (defined on Omega_eps) to v >= u with lower
/// slope at least delta on Omega_2eps. Nodes whose upper slope is below
/// delta are replaced by a discrete eikonal landscape of slope delta,
/// built by a multi-source Dijkstra sweep over the eps-ball graph with
/// Euclidean edge lengths, and the result is clipped to
/// u + 2 delta dist(., ring). All three contracts are checked afterwards with slope tolerance tau = delta c1 h / eps; a
/// failure throws ContractError carrying the margins.
PositiveSlopePerturbation perturb_positive_slope(const ScalarField& u, double delta, double eps,
                                                 double c1 = 4.0);

/// 2^{1+alpha} [u]_alpha eps^{alpha-2} (2^{-beta} - 1/2).
template <typename Scalar>
Scalar consistency_bound(Scalar alpha, Scalar seminorm, Scalar eps, Scalar p, int d) {
  using std::pow;
  if (!(alpha > Scalar(0) && alpha <= Scalar(1))) throw std::domain_error("consistency_bound: alpha must lie in (0, 1]");
  if (!(eps > Scalar(0) && eps < Scalar(0.5))) throw std::domain_error("consistency_bound: eps must lie in (0, 1/2)");
  if (!(seminorm >= Scalar(0))) throw std::domain_error("consistency_bound: seminorm must be nonnegative");
  if (is_infinite_exponent(p)) return Scalar(0);
  if (!(p > Scalar(d))) throw std::domain_error("consistency_bound: requires p > d");
  return pow(Scalar(2), Scalar(1) + alpha) * seminorm * pow(eps, alpha - Scalar(2)) * half_power_gap(p, d);
}

struct ConsistencyReport {
  double eps = 0.0;
  double alpha = 0.0;
  double seminorm = 0.0;
  /// max over Omega_2eps of -Lap(u^eps)
  double upper_max = 0.0;
  /// min over Omega_2eps of -Lap(u_eps)
  double lower_min = 0.0;
  double bound = 0.0;
  /// min(bound - upper_max, lower_min + bound)
  double margin = 0.0;
  Index nodes_checked = 0;
};

/// Evaluates both envelope inequalities for a sampled p-harmonic field.
/// Without an explicit seminorm the exhaustive Hölder scan is used.
ConsistencyReport check_approx_consistency(const ScalarField& up, double alpha, double eps, double p,
                                           std::optional<double> seminorm = std::nullopt);

}  // namespace plinf

#endif  // PLINF_NONLOCAL_HPP_
