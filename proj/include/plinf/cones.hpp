#ifndef PLINF_CONES_HPP_
#define PLINF_CONES_HPP_

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace plinf {

template <typename Scalar>
inline bool is_infinite_exponent(Scalar p) {
  return std::isinf(p) && p > 0;
}

/// Hölder exponent (p - d)/(p - 1) of the p-Laplace fundamental solution;
/// 1 for p = +inf.
template <typename Scalar>
Scalar beta(Scalar p, int d) {
  if (is_infinite_exponent(p)) return Scalar(1);
  if (d < 1 || !(p > Scalar(d))) throw std::domain_error("beta: requires p > d >= 1");
  return (p - Scalar(d)) / (p - Scalar(1));
}

/// 1 - beta = (d - 1)/(p - 1), computed without cancellation.
template <typename Scalar>
Scalar one_minus_beta(Scalar p, int d) {
  if (is_infinite_exponent(p)) return Scalar(0);
  if (d < 1 || !(p > Scalar(d))) throw std::domain_error("beta: requires p > d >= 1");
  return Scalar(d - 1) / (p - Scalar(1));
}

/// r^beta with r^beta = 0 at r = 0.
template <typename Scalar>
Scalar holder_power(Scalar r, Scalar exponent) {
  using std::exp;
  using std::log;
  if (r == Scalar(0)) return Scalar(0);
  if (exponent == Scalar(1)) return r;
  return exp(exponent * log(r));
}

/// x -> slope |x - apex|^exponent + offset.
template <typename Scalar>
struct ConeSpec {
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector apex;
  Scalar slope = Scalar(0);
  Scalar offset = Scalar(0);
  Scalar exponent = Scalar(1);

  ConeSpec() = default;
  ConeSpec(Vector apex_, Scalar slope_, Scalar offset_, Scalar exponent_)
      : apex(std::move(apex_)), slope(slope_), offset(offset_), exponent(exponent_) {
    if (!(exponent > Scalar(0) && exponent <= Scalar(1))) {
      throw std::domain_error("cone exponent must lie in (0, 1]");
    }
    if (!(slope >= Scalar(0))) throw std::domain_error("cone slope must be nonnegative");
  }

  /// Hölder distance |x - apex|^exponent.
  template <typename Derived>
  Scalar distance(const Eigen::MatrixBase<Derived>& x) const {
    return holder_power<Scalar>((x - apex).norm(), exponent);
  }
};

using Cone = ConeSpec<double>;

template <typename Scalar, typename Derived>
Scalar cone_eval(const ConeSpec<Scalar>& c, const Eigen::MatrixBase<Derived>& x) {
  return c.slope * c.distance(x) + c.offset;
}

/// The punctured unit ball problem in dimension d with exponent p: data 1
/// on the unit sphere and 0 at the centre, solved by |x|^beta.
template <typename Scalar>
struct RadialProblem {
  int dim = 2;
  Scalar p = std::numeric_limits<Scalar>::infinity();

  RadialProblem(int dim_, Scalar p_) : dim(dim_), p(p_) {
    if (dim < 2) throw std::domain_error("radial problem needs d >= 2");
    if (!is_infinite_exponent(p) && !(p > Scalar(dim))) {
      throw std::domain_error("radial problem needs p > d");
    }
  }
};

template <typename Scalar, typename Derived>
Scalar radial_p_harmonic(const RadialProblem<Scalar>& rp, const Eigen::MatrixBase<Derived>& x) {
  return holder_power<Scalar>(Scalar(x.norm()), beta<Scalar>(rp.p, rp.dim));
}

/// max_{t in [0,1]} (t^beta - t) = beta^{beta/(1-beta)} - beta^{1/(1-beta)}.
template <typename Scalar>
Scalar radial_exact_error(Scalar p, int d) {
  using std::exp;
  using std::log1p;
  if (d < 2 || is_infinite_exponent(p) || !(p > Scalar(d))) {
    throw std::domain_error("radial_exact_error: requires finite p > d >= 2");
  }
  const Scalar gap = one_minus_beta(p, d);
  const Scalar log_beta = log1p(-gap);
  const Scalar b = Scalar(1) - gap;
  return exp(b / gap * log_beta) - exp(log_beta / gap);
}

/// 2^{-beta} - 1/2 as a difference quotient: (2^{1-beta} - 1)/2.
template <typename Scalar>
Scalar half_power_gap(Scalar beta_value) {
  using std::expm1;
  return expm1((Scalar(1) - beta_value) * std::numbers::ln2_v<Scalar>) / Scalar(2);
}

/// Same quantity from the exponent p directly, avoiding cancellation in 1 - beta.
template <typename Scalar>
Scalar half_power_gap(Scalar p, int d) {
  using std::expm1;
  return expm1(one_minus_beta(p, d) * std::numbers::ln2_v<Scalar>) / Scalar(2);
}

/// |u_p - u_inf| at the point (1/2, 0, ..., 0) of the radial problem.
/// Throws std::logic_error if the value falls below (ln 2 / 2)(d-1)/(p-1).
template <typename Scalar>
Scalar radial_lower_bound(Scalar p, int d) {
  if (is_infinite_exponent(p)) return Scalar(0);
  const Scalar value = half_power_gap(p, d);
  const Scalar floor = std::numbers::ln2_v<Scalar> / Scalar(2) * one_minus_beta(p, d);
  if (value < floor) throw std::logic_error("radial_lower_bound: lower estimate violated");
  return value;
}

template <typename Scalar>
struct Squeeze {
  Scalar lower;
  Scalar middle;
  Scalar upper;
};

/// (ln2/2)(1 - beta) <= 2^{-beta} - 1/2 <= (1 - beta)/2 for beta in (0, 1).
template <typename Scalar>
Squeeze<Scalar> squeeze_bounds(Scalar beta_value) {
  if (!(beta_value > Scalar(0) && beta_value < Scalar(1))) {
    throw std::domain_error("squeeze_bounds: beta must lie in (0, 1)");
  }
  const Scalar gap = Scalar(1) - beta_value;
  return {std::numbers::ln2_v<Scalar> / Scalar(2) * gap, half_power_gap(beta_value), gap / Scalar(2)};
}

/// Aronsson's infinity-harmonic function |x1|^{4/3} - |x2|^{4/3}. The odd
/// extension t|t|^{1/3} is not infinity-harmonic where x1 x2 < 0.
template <typename Scalar, typename Derived>
Scalar aronsson(const Eigen::MatrixBase<Derived>& x) {
  using std::abs;
  using std::cbrt;
  if (x.size() != 2) throw std::domain_error("aronsson is defined in two dimensions");
  auto even = [](Scalar t) { return abs(t) * cbrt(abs(t)); };
  return even(Scalar(x[0])) - even(Scalar(x[1]));
}

}  // namespace plinf

#endif  // PLINF_CONES_HPP_
