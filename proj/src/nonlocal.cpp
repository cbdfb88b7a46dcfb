#include "plinf/nonlocal.hpp"

#include <cmath>
#include <functional>
#include <queue>
#include <sstream>
#include <utility>
#include <vector>

#include "plinf/analysis.hpp"

namespace plinf {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Max and min of u over the eps-ball of every node of Omega_eps whose
// ball lies inside the domain of u. Balls around Omega_eps nodes contain
// only interior nodes, so flat offsets never leave the lattice.
struct BallScan {
  NodeMask out;
  Eigen::VectorXd hi;
  Eigen::VectorXd lo;
};

BallScan scan_balls(const ScalarField& u, double eps) {
  const GridPtr& grid = u.grid();
  const BallStencil stencil(grid->dim(), grid->spacing(), eps);
  const std::vector<Index> flat = stencil.flat_offsets(*grid);
  const NodeMask inner = inner_parallel(grid, eps);

  BallScan scan{NodeMask(grid, false), Eigen::VectorXd::Zero(grid->node_count()),
                Eigen::VectorXd::Zero(grid->node_count())};
  for (Index id : inner.nodes()) {
    double hi = -kInf;
    double lo = kInf;
    bool complete = true;
    for (Index delta : flat) {
      const Index j = id + delta;
      if (!u.defined(j)) {
        complete = false;
        break;
      }
      hi = std::max(hi, u[j]);
      lo = std::min(lo, u[j]);
    }
    if (!complete) continue;
    scan.out.on[id] = true;
    scan.hi[id] = hi;
    scan.lo[id] = lo;
  }
  return scan;
}

template <typename F>
ScalarField map_scan(const ScalarField& u, double eps, F&& f) {
  if (!(eps > 0.0)) throw std::invalid_argument("eps must be positive");
  BallScan scan = scan_balls(u, eps);
  if (scan.out.empty()) throw std::domain_error("no node of Omega_eps has its ball inside the field domain");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(u.grid()->node_count());
  for (Index id : scan.out.nodes()) out[id] = f(scan.hi[id], scan.lo[id], u[id]);
  return ScalarField(u.grid(), std::move(out), scan.out);
}

void require_defined_on(const ScalarField& u, const NodeMask& mask, const char* what) {
  if (!is_subset(mask, u.domain())) {
    throw std::invalid_argument(std::string(what) + ": field is not defined on the required node set");
  }
}

}  // namespace

ScalarField upper_envelope(const ScalarField& u, double eps) {
  return map_scan(u, eps, [](double hi, double, double) { return hi; });
}

ScalarField lower_envelope(const ScalarField& u, double eps) {
  return map_scan(u, eps, [](double, double lo, double) { return lo; });
}

ScalarField slope_plus(const ScalarField& u, double eps) {
  return map_scan(u, eps, [eps](double hi, double, double c) { return (hi - c) / eps; });
}

ScalarField slope_minus(const ScalarField& u, double eps) {
  return map_scan(u, eps, [eps](double, double lo, double c) { return (c - lo) / eps; });
}

ScalarField nonlocal_inf_laplacian(const ScalarField& u, double eps) {
  const double inv = 1.0 / (eps * eps);
  return map_scan(u, eps, [inv](double hi, double lo, double c) { return ((hi - c) + (lo - c)) * inv; });
}

double check_comparison_with_cones(const ScalarField& u, const Cone& cone, const NodeMask& D) {
  const GridPtr& grid = u.grid();
  if (D.empty()) throw std::invalid_argument("comparison with cones: empty node set");
  const Index apex_node = grid->nearest_node(cone.apex);
  if (apex_node >= 0 && D[apex_node]) throw std::invalid_argument("apex must be outside D");

  auto phi = [&](Index id) { return u[id] - cone.slope * cone.distance(grid->coord(id)); };

  // Node boundary: nodes outside D sharing a cell corner with D.
  NodeMask rim(grid, false);
  const Index d = grid->dim();
  const std::vector<Eigen::VectorXi> cube = cube_neighbors(d);
  for (Index id : D.nodes()) {
    const Eigen::VectorXi mi = grid->multi_index(id);
    for (const auto& o : cube) {
      const Index j = grid->node_at(mi + o);
      if (j >= 0 && !D[j]) rim.on[j] = true;
    }
  }
  if (rim.empty()) throw std::invalid_argument("comparison with cones: D has no node boundary");
  require_defined_on(u, rim, "comparison with cones");
  require_defined_on(u, D, "comparison with cones");

  double lo = kInf;
  double hi = -kInf;
  for (Index id : rim.nodes()) {
    const double value = phi(id);
    lo = std::min(lo, value);
    hi = std::max(hi, value);
  }
  double worst = -kInf;
  for (Index id : D.nodes()) {
    const double value = phi(id);
    worst = std::max({worst, lo - value, value - hi});
  }
  return worst;
}

MaxPrincipleCheck check_nonlocal_max_principle(const ScalarField& u, const ScalarField& v, double C,
                                               double eps) {
  const GridPtr& grid = u.grid();
  const NodeMask inner = inner_parallel(grid, eps);
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  require_defined_on(u, inner, "nonlocal max principle");
  require_defined_on(v, inner, "nonlocal max principle");
  if (core.empty()) throw std::domain_error("nonlocal max principle: Omega_2eps is empty");

  const ScalarField lu = nonlocal_inf_laplacian(u, eps);
  const ScalarField lv = nonlocal_inf_laplacian(v, eps);

  MaxPrincipleCheck check;
  double violation = -kInf;
  for (Index id : core.nodes()) {
    violation = std::max({violation, -lu[id] - C, C + lv[id]});
  }
  check.hypothesis_violation = violation;
  check.hypothesis_ok = violation <= 0.0;

  double sup_all = -kInf;
  double sup_ring = -kInf;
  for (Index id : inner.nodes()) {
    const double diff = u[id] - v[id];
    sup_all = std::max(sup_all, diff);
    if (!core[id]) sup_ring = std::max(sup_ring, diff);
  }
  check.conclusion_gap = sup_all - sup_ring;
  check.nodes_checked = inner.count();
  return check;
}

ScalarField perturb_strict(const ScalarField& v, double delta) {
  const double L = v.sup_norm();
  if (L == 0.0) return v;
  if (!(delta >= 0.0) || delta > 1.0 / (4.0 * L)) {
    throw std::invalid_argument("delta exceeds 1/(4·sup-norm)");
  }
  Eigen::VectorXd w = Eigen::VectorXd::Zero(v.grid()->node_count());
  for (Index id : v.domain().nodes()) w[id] = (1.0 + 2.0 * delta * L) * v[id] - delta * v[id] * v[id];
  return ScalarField(v.grid(), std::move(w), v.domain());
}

StrictPerturbationCheck check_strict_perturbation(const ScalarField& v, const ScalarField& w,
                                                  double delta, double eps) {
  const GridPtr& grid = v.grid();
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  const ScalarField lv = nonlocal_inf_laplacian(v, eps);
  const ScalarField lw = nonlocal_inf_laplacian(w, eps);
  const ScalarField sv = slope_minus(v, eps);
  require_defined_on(lv, core, "strict perturbation");
  require_defined_on(lw, core, "strict perturbation");

  const double L = v.sup_norm();
  const double natural = L / (eps * eps);
  StrictPerturbationCheck check;
  check.relative_margin = kInf;
  for (Index id : core.nodes()) {
    const double lhs = -lw[id];
    const double rhs = -lv[id] + delta * sv[id] * sv[id];
    const double scale = std::max({std::abs(lhs), std::abs(rhs), natural, 1e-300});
    check.relative_margin = std::min(check.relative_margin, (lhs - rhs) / scale);
  }
  const double bound = 3.0 * L * L * delta;
  const double dist = (v - w).sup_norm();
  check.distance_margin = bound > 0.0 ? (bound - dist) / bound : -dist;
  check.nodes_checked = core.count();
  return check;
}

bool PositiveSlopeMargins::ok() const {
  return superharmonic >= -tolerance / eps && slope >= -tolerance && lower >= -tolerance * eps &&
         upper >= -tolerance * eps;
}

std::string PositiveSlopeMargins::describe() const {
  std::ostringstream s;
  s << "superharmonic=" << superharmonic << " slope=" << slope << " lower=" << lower
    << " upper=" << upper << " tau=" << tolerance << " perturbed_nodes=" << perturbed_nodes;
  return s.str();
}

PositiveSlopePerturbation perturb_positive_slope(const ScalarField& u, double delta, double eps,
                                                 double c1) {
  if (!(delta > 0.0)) throw std::invalid_argument("perturb_positive_slope: delta must be positive");
  const GridPtr& grid = u.grid();
  const NodeMask inner = inner_parallel(grid, eps);
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  require_defined_on(u, inner, "perturb_positive_slope");
  const ScalarField reach = ring_distance(grid, eps);
  const ScalarField splus = slope_plus(u, eps);

  NodeMask low(grid, false);
  for (Index id : core.nodes()) low.on[id] = splus[id] < delta;

  // Multi-source Dijkstra: every node outside the low-slope set starts at
  // u, and an edge of the eps-ball graph costs delta times its length.
  // Charging a flat delta * eps per hop would make the landscape a
  // staircase, which is convex at every step edge.
  const BallStencil stencil(grid->dim(), grid->spacing(), eps);
  const std::vector<Index> flat = stencil.flat_offsets(*grid);
  std::vector<double> hop(flat.size());
  for (std::size_t k = 0; k < flat.size(); ++k) {
    hop[k] = delta * grid->spacing() * stencil.offset(static_cast<Index>(k)).cast<double>().norm();
  }
  Eigen::VectorXd landscape = Eigen::VectorXd::Constant(grid->node_count(), kInf);
  using Entry = std::pair<double, Index>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (Index id : inner.nodes()) {
    if (low[id]) continue;
    landscape[id] = u[id];
    queue.emplace(u[id], id);
  }
  while (!queue.empty()) {
    const auto [value, id] = queue.top();
    queue.pop();
    if (value > landscape[id]) continue;
    for (std::size_t k = 0; k < flat.size(); ++k) {
      const Index j = id + flat[k];
      if (!inner[j]) continue;
      const double candidate = value + hop[k];
      if (candidate < landscape[j]) {
        landscape[j] = candidate;
        queue.emplace(candidate, j);
      }
    }
  }

  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid->node_count());
  for (Index id : inner.nodes()) {
    out[id] = u[id];
    if (core[id]) out[id] = std::min(std::max(u[id], landscape[id]), u[id] + 2.0 * delta * reach[id]);
  }
  PositiveSlopePerturbation result{ScalarField(grid, std::move(out), inner), {}};

  PositiveSlopeMargins& m = result.margins;
  m.tolerance = delta * c1 * grid->spacing() / eps;
  m.eps = eps;
  m.perturbed_nodes = low.count();
  const ScalarField lap = nonlocal_inf_laplacian(result.v, eps);
  const ScalarField sminus = slope_minus(result.v, eps);
  m.superharmonic = m.slope = m.lower = m.upper = kInf;
  for (Index id : core.nodes()) {
    m.superharmonic = std::min(m.superharmonic, -lap[id]);
    m.slope = std::min(m.slope, sminus[id] - delta);
    m.lower = std::min(m.lower, result.v[id] - u[id]);
    m.upper = std::min(m.upper, u[id] + 2.0 * delta * reach[id] - result.v[id]);
  }
  if (!m.ok()) throw ContractError("perturb_positive_slope: contracts not met: " + m.describe(), m);
  return result;
}

ConsistencyReport check_approx_consistency(const ScalarField& up, double alpha, double eps, double p,
                                           std::optional<double> seminorm) {
  const GridPtr& grid = up.grid();
  const int d = static_cast<int>(grid->dim());
  ConsistencyReport report;
  report.eps = eps;
  report.alpha = alpha;
  report.seminorm = seminorm ? *seminorm : holder_seminorm(up, alpha).value;
  report.bound = consistency_bound(alpha, report.seminorm, eps, p, d);

  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  if (core.empty()) throw std::domain_error("approximate consistency: Omega_2eps is empty");
  const ScalarField upper = nonlocal_inf_laplacian(upper_envelope(up, eps), eps);
  const ScalarField lower = nonlocal_inf_laplacian(lower_envelope(up, eps), eps);
  require_defined_on(upper, core, "approximate consistency");
  require_defined_on(lower, core, "approximate consistency");

  report.upper_max = -kInf;
  report.lower_min = kInf;
  for (Index id : core.nodes()) {
    report.upper_max = std::max(report.upper_max, -upper[id]);
    report.lower_min = std::min(report.lower_min, -lower[id]);
  }
  report.margin = std::min(report.bound - report.upper_max, report.lower_min + report.bound);
  report.nodes_checked = core.count();
  return report;
}

}  // namespace plinf
