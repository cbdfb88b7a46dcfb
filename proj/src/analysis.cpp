#include "plinf/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include "plinf/csv.hpp"
#include "plinf/nonlocal.hpp"

namespace plinf {

HolderEstimate holder_seminorm(const ScalarField& u, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw std::domain_error("holder_seminorm: alpha must lie in (0, 1]");
  std::vector<Index> nodes = u.domain().nodes();
  if (nodes.size() < 2) throw std::invalid_argument("holder_seminorm: need at least two defined nodes");

  HolderEstimate est;
  est.alpha = alpha;
  const auto n_all = static_cast<Index>(nodes.size());
  if (n_all > kExhaustiveHolderLimit) {
    // Every stride-th node in id order; the phase rotates so that
    // consecutive blocks do not always pick the same lattice column.
    const Index stride = (n_all + kExhaustiveHolderLimit - 1) / kExhaustiveHolderLimit;
    std::vector<Index> picked;
    picked.reserve(static_cast<std::size_t>(kExhaustiveHolderLimit));
    for (Index block = 0; block * stride < n_all; ++block) {
      const Index k = block * stride + (block % stride);
      picked.push_back(nodes[static_cast<std::size_t>(std::min(k, n_all - 1))]);
    }
    picked.erase(std::unique(picked.begin(), picked.end()), picked.end());
    nodes.swap(picked);
    est.exhaustive = false;
  }

  // Node pairs sit at distance h sqrt(k) for integer k, so the Hölder
  // denominators come from a table indexed by k.
  const GridDomain& grid = *u.grid();
  const Index d = grid.dim();
  Eigen::MatrixXi mi(d, static_cast<Index>(nodes.size()));
  for (std::size_t a = 0; a < nodes.size(); ++a) mi.col(static_cast<Index>(a)) = grid.multi_index(nodes[a]);
  Index kmax = 0;
  for (Index k = 0; k < d; ++k) {
    const Index span = mi.row(k).maxCoeff() - mi.row(k).minCoeff();
    kmax += span * span;
  }
  std::vector<double> inv_dist(static_cast<std::size_t>(kmax) + 1, 0.0);
  const double h = grid.spacing();
  for (Index k = 1; k <= kmax; ++k) {
    const double r = h * std::sqrt(static_cast<double>(k));
    inv_dist[static_cast<std::size_t>(k)] = 1.0 / (alpha == 1.0 ? r : std::pow(r, alpha));
  }
  std::vector<double> vals(nodes.size());
  for (std::size_t a = 0; a < nodes.size(); ++a) vals[a] = u[nodes[a]];

  for (std::size_t a = 0; a < nodes.size(); ++a) {
    const double ui = vals[a];
    const auto ci = mi.col(static_cast<Index>(a));
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      const double num = std::abs(ui - vals[b]);
      if (num == 0.0) continue;
      Index k2 = 0;
      for (Index k = 0; k < d; ++k) {
        const Index t = ci[k] - mi(k, static_cast<Index>(b));
        k2 += t * t;
      }
      const double q = num * inv_dist[static_cast<std::size_t>(k2)];
      if (q > est.value) {
        est.value = q;
        est.first = nodes[a];
        est.second = nodes[b];
      }
    }
  }
  return est;
}

double sup_error(const ScalarField& u, const ScalarField& v, const NodeMask& mask) {
  if (u.grid() != v.grid() || mask.grid != u.grid()) throw std::invalid_argument("sup_error: fields live on different grids");
  if (mask.empty()) throw std::invalid_argument("sup_error: empty mask");
  if (!is_subset(mask, u.domain()) || !is_subset(mask, v.domain())) {
    throw std::invalid_argument("sup_error: fields are not defined on the whole mask");
  }
  double e = 0.0;
  for (Index id : mask.nodes()) e = std::max(e, std::abs(u[id] - v[id]));
  return e;
}

double sup_error(const ScalarField& u, const ScalarField& v) {
  if (u.grid() != v.grid()) throw std::invalid_argument("sup_error: fields live on different grids");
  return sup_error(u, v, u.domain() && v.domain());
}

RateFit fit_rate(const std::vector<RateRow>& rows) {
  RateFit fit;
  std::vector<const RateRow*> used;
  for (const RateRow& r : rows) {
    if (!(r.sup_error > 0.0) || !std::isfinite(r.sup_error)) {
      fit.warnings.push_back("row p=" + format_number(r.p) + " skipped: nonpositive error " +
                             format_number(r.sup_error));
      continue;
    }
    if (!(r.p > 0.0) || !std::isfinite(r.p)) {
      fit.warnings.push_back("row p=" + format_number(r.p) + " skipped: p not finite and positive");
      continue;
    }
    used.push_back(&r);
  }
  if (used.size() < 3) throw std::invalid_argument("fit_rate: fewer than three usable rows");
  std::set<double> distinct;
  for (const RateRow* r : used) distinct.insert(r->p);
  if (distinct.size() != used.size()) throw std::invalid_argument("fit_rate: repeated p values");

  const auto n = static_cast<Index>(used.size());
  Eigen::MatrixXd A(n, 2);
  Eigen::VectorXd b(n);
  for (Index i = 0; i < n; ++i) {
    A(i, 0) = std::log(used[static_cast<std::size_t>(i)]->p);
    A(i, 1) = 1.0;
    b[i] = std::log(used[static_cast<std::size_t>(i)]->sup_error);
  }
  const Eigen::Vector2d coef = A.colPivHouseholderQr().solve(b);
  fit.exponent = coef[0];
  fit.intercept = coef[1];
  fit.residual = std::sqrt((A * coef - b).squaredNorm() / static_cast<double>(n));
  fit.p_min = *distinct.begin();
  fit.p_max = *distinct.rbegin();
  fit.rows_used = used.size();
  return fit;
}

double measure_gamma(const ScalarField& u, double eps) {
  const NodeMask core = inner_parallel(u.grid(), 2.0 * eps);
  if (core.empty()) throw std::domain_error("measure_gamma: Omega_2eps is empty");
  const ScalarField s = slope_minus(u, eps);
  if (!is_subset(core, s.domain())) throw std::invalid_argument("measure_gamma: field not defined on Omega_eps");
  double g = std::numeric_limits<double>::infinity();
  for (Index id : core.nodes()) g = std::min(g, s[id]);
  return g;
}

}  // namespace plinf
