#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "plinf/analysis.hpp"

using namespace plinf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

auto everywhere = [](const Point&) { return true; };

std::vector<RateRow> power_rows(double c, double k, std::initializer_list<double> ps) {
  std::vector<RateRow> rows;
  for (double p : ps) {
    RateRow r;
    r.p = p;
    r.sup_error = c * std::pow(p, k);
    rows.push_back(r);
  }
  return rows;
}

RateBoundInputs<double> unit_inputs(double p) {
  RateBoundInputs<double> in;
  in.p = p;
  in.d = 2;
  in.alpha = 1.0;
  in.seminorm_up = 1.0;
  in.lip_uinf = 1.0;
  in.sup_uinf = 1.0;
  in.diam = std::sqrt(2.0);
  return in;
}

}  // namespace

TEST_CASE("Hölder seminorm") {
  auto g = build_grid(Box::cube(1, 0.0, 1.0), 1.0 / 64, everywhere);
  CHECK(holder_seminorm(ScalarField(g, 3.0), 0.5).value == 0.0);
  const ScalarField x = ScalarField::sample(g, [](const Point& p) { return p[0]; });
  CHECK(holder_seminorm(x, 1.0).value == doctest::Approx(1.0).epsilon(1e-12));
  const ScalarField root = ScalarField::sample(g, [](const Point& p) { return std::sqrt(p[0]); });
  const HolderEstimate e = holder_seminorm(root, 0.5);
  CHECK(e.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(e.exhaustive);
  CHECK((g->coord(e.first)[0] == 0.0 || g->coord(e.second)[0] == 0.0));
}

TEST_CASE("Hölder scan agrees with a direct pair loop") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto g = build_grid(Box::cube(2, -1.0, 1.0), 1.0 / 8, everywhere);
  Eigen::VectorXd v(g->node_count());
  for (Index i = 0; i < v.size(); ++i) v[i] = u(rng);
  const ScalarField f(g, v);
  for (double a : {0.3, 0.5, 1.0}) {
    double best = 0.0;
    for (Index i = 0; i < g->node_count(); ++i)
      for (Index j = i + 1; j < g->node_count(); ++j)
        best = std::max(best, std::abs(v[i] - v[j]) / std::pow((g->coord(i) - g->coord(j)).norm(), a));
    CHECK(holder_seminorm(f, a).value == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("Hölder scan subsamples large fields") {
  auto g = build_grid(Box::cube(2, 0.0, 1.0), 1.0 / 160, everywhere);
  const ScalarField x = ScalarField::sample(g, [](const Point& p) { return p[0] + p[1]; });
  const HolderEstimate e = holder_seminorm(x, 1.0);
  CHECK(!e.exhaustive);
  CHECK(e.value <= std::sqrt(2.0) + 1e-12);
  CHECK(e.value >= 1.0);
}

TEST_CASE("sup error") {
  auto g = build_grid(Box::cube(2, -1.0, 1.0), 1.0 / 16, everywhere);
  const ScalarField a = ScalarField::sample(g, [](const Point& x) { return x[0]; });
  CHECK(sup_error(a, a) == 0.0);
  const ScalarField b = a + 0.5;
  CHECK(sup_error(a, b) == doctest::Approx(0.5));
  const NodeMask ring = parallel_ring(g, 0.25);
  const ScalarField c = ScalarField::sample(g, [](const Point& x) { return x.norm(); });
  double ref = 0.0;
  for (Index id : ring.nodes()) ref = std::max(ref, std::abs(c[id] - a[id]));
  CHECK(sup_error(c, a, ring) == ref);

  // radial p = 3 against p = inf along a fine ray
  auto ray = build_grid(Box::cube(1, 0.0, 1.0), 1e-5, everywhere);
  const ScalarField up = ScalarField::sample(ray, [](const Point& x) { return std::sqrt(x[0]); });
  const ScalarField ui = ScalarField::sample(ray, [](const Point& x) { return x[0]; });
  CHECK(std::abs(sup_error(up, ui) - 0.25) < 1e-4);
}

TEST_CASE("optimal epsilon") {
  CHECK(optimal_epsilon(3.0, 2, 1.0, false) == doctest::Approx(std::pow(0.25, 0.25)).epsilon(1e-14));
  CHECK(optimal_epsilon(3.0, 2, 1.0, true) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(optimal_epsilon(kInf, 2, 1.0, false) == 0.0);
}

TEST_CASE("restriction between p and eps") {
  CHECK(restriction_check(0.4, kInf, 2, 1.0, 1.0, 1.0));
  CHECK(!restriction_check(0.4, 3.0, 2, 1.0, 1.0, 1.0));
  bool seen_true = false;
  for (double p = 3.0; p < 1e7; p *= 1.5) {
    const bool ok = restriction_check(0.1, p, 2, 0.7, 1.0, 1.0);
    if (seen_true) CHECK(ok);
    seen_true = seen_true || ok;
  }
  CHECK(seen_true);
}

TEST_CASE("general rate bound") {
  // p = inf and eps -> 0 leaves the boundary gap
  RateBoundInputs<double> in = unit_inputs(kInf);
  in.boundary_gap = 0.125;
  CHECK(bound_general_rate(1e-12, in) == doctest::Approx(0.125));

  // extended-precision re-evaluation at eps = 0.1, p = 1e4
  in = unit_inputs(1e4);
  const double got = bound_general_rate(0.1, in);
  const long double e = 0.1L;
  const long double gap = std::expm1(std::log(2.0L) / (1e4L - 1.0L)) / 2.0L;
  const long double ct = 2.0L * std::sqrt(2.0L) + 3.0L;
  const long double ref = 4.0L * e + 4.0L * e + std::pow(2.0L, 5.0L / 3.0L) * ct * std::cbrt(gap / e);
  CHECK(got == doctest::Approx(static_cast<double>(ref)).epsilon(1e-13));

  // positive gradient: linear defect term over gamma^2
  in.positive_gradient = true;
  in.gamma = 0.5;
  const long double ref_pos = 8.0L * e + 8.0L * ct / 0.25L * gap / e;
  CHECK(bound_general_rate(0.1, in) == doctest::Approx(static_cast<double>(ref_pos)).epsilon(1e-13));

  CHECK_THROWS_WITH_AS(bound_general_rate(0.4, unit_inputs(3.0)),
                       "p too small for this eps: restriction between p and eps violated", std::domain_error);
}

TEST_CASE("explicit rate is the general bound at the optimal eps") {
  for (double p : {1e3, 1e4, 1e6}) {
    for (bool pos : {false, true}) {
      RateBoundInputs<double> in = unit_inputs(p);
      in.positive_gradient = pos;
      const double eps = optimal_epsilon(p, 2, 1.0, pos);
      CHECK(bound_explicit_rate(in) == doctest::Approx(bound_general_rate(eps, in)).epsilon(1e-12));
    }
  }
}

TEST_CASE("explicit rate exponents for alpha = 1") {
  auto slope = [](bool pos) {
    std::vector<RateRow> rows;
    for (double p : {1e6, 1e7, 1e8, 1e9}) {
      RateBoundInputs<double> in = unit_inputs(p);
      in.positive_gradient = pos;
      RateRow r;
      r.p = p;
      r.sup_error = bound_explicit_rate(in);
      rows.push_back(r);
    }
    return fit_rate(rows).exponent;
  };
  CHECK(slope(false) == doctest::Approx(-0.25).epsilon(1e-2));
  CHECK(slope(true) == doctest::Approx(-0.5).epsilon(1e-2));
}

TEST_CASE("Morrey helpers") {
  CHECK(morrey_H_bound(5.0, 2, 0.0, 0.0) == 0.0);
  CHECK(morrey_factor(4.0, 2) == doctest::Approx(8.0));
  CHECK(morrey_H_bound(5.0, 2, 1.0, 0.5) == 4.5);
}

TEST_CASE("rate fit") {
  const RateFit a = fit_rate(power_rows(3.0, -1.0, {10, 20, 40, 80}));
  CHECK(a.exponent == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(std::exp(a.intercept) == doctest::Approx(3.0));
  CHECK(a.residual < 1e-12);
  CHECK(a.p_min == 10);
  CHECK(a.p_max == 80);
  CHECK(fit_rate(power_rows(1.0, -0.25, {5, 50, 500})).exponent == doctest::Approx(-0.25).epsilon(1e-10));

  std::vector<RateRow> radial;
  for (double p : {10.0, 20.0, 40.0, 80.0, 160.0}) {
    RateRow r;
    r.p = p;
    r.sup_error = radial_exact_error(p, 2);
    radial.push_back(r);
  }
  const double k = fit_rate(radial).exponent;
  CHECK(k >= -1.1);
  CHECK(k <= -0.9);

  auto rows = power_rows(1.0, -1.0, {10, 20, 40, 80});
  rows[1].sup_error = 0.0;
  const RateFit skipped = fit_rate(rows);
  CHECK(skipped.rows_used == 3);
  CHECK(skipped.warnings.size() == 1);
  CHECK_THROWS_AS(fit_rate(power_rows(1.0, -1.0, {10, 20})), std::invalid_argument);
  CHECK_THROWS_AS(fit_rate(power_rows(1.0, -1.0, {10, 20, 20})), std::invalid_argument);
}

TEST_CASE("gamma") {
  auto g = build_grid(Box::cube(2, 0.0, 1.0), 1.0 / 32, everywhere);
  const double eps = 4.0 / 32;
  CHECK(measure_gamma(ScalarField::sample(g, [](const Point& x) { return x[0]; }), eps) == doctest::Approx(1.0));
  CHECK(measure_gamma(ScalarField(g, 2.0), eps) == 0.0);
  const Cone c(Eigen::Vector2d(-1.0, -1.0), 1.0, 0.0, 1.0);
  CHECK(measure_gamma(ScalarField::sample(g, [&](const Point& x) { return cone_eval(c, x); }), eps) >= 1.0 - 0.5 / 4.0);
}
