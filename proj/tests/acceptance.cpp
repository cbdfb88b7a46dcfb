// Acceptance checks. Each criterion prints one line:
//   <number> PASS|FAIL <name>: <measured values>
// and the process exits nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <iterator>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "plinf/analysis.hpp"
#include "plinf/config.hpp"
#include "plinf/csv.hpp"
#include "plinf/energy.hpp"
#include "plinf/nonlocal.hpp"
#include "plinf/runs.hpp"
#include "plinf/solvers.hpp"

using namespace plinf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool passed = false;
  std::string detail;
};

int failures = 0;

void run_criterion(int number, const std::string& name, const std::function<Outcome()>& body) {
  const auto start = Clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (!o.passed) ++failures;
  std::ostringstream line;
  line << number << " " << (o.passed ? "PASS" : "FAIL") << " " << name << ": " << o.detail << " ["
       << std::setprecision(3) << secs << " s]";
  std::cout << line.str() << std::endl;
}

double seconds_since(Clock::time_point t) { return std::chrono::duration<double>(Clock::now() - t).count(); }

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

auto everywhere = [](const Point&) { return true; };

// Brute-force ball scan over every node pair; no stencil tables involved.
struct BruteBall {
  double sup = -std::numeric_limits<double>::infinity();
  double inf = std::numeric_limits<double>::infinity();
};

BruteBall brute_ball(const ScalarField& u, Index id, double eps) {
  const GridDomain& g = *u.grid();
  BruteBall b;
  const Point x = g.coord(id);
  const double reach = eps + 1e-9 * g.spacing();
  for (Index j = 0; j < g.node_count(); ++j) {
    if ((Point(g.coord(j)) - x).norm() > reach) continue;
    b.sup = std::max(b.sup, u[j]);
    b.inf = std::min(b.inf, u[j]);
  }
  return b;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("plinf_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] != '#') rows.push_back(split(line, ','));
  }
  return rows;
}

// runs.csv carries wall-clock seconds; every other byte must match.
std::string without_column(const fs::path& p, const std::string& column) {
  const auto rows = rows_of(p);
  if (rows.empty()) return {};
  const auto it = std::find(rows[0].begin(), rows[0].end(), column);
  const std::ptrdiff_t skip = it == rows[0].end() ? -1 : it - rows[0].begin();
  std::string out;
  for (const auto& r : rows) {
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (static_cast<std::ptrdiff_t>(k) == skip) continue;
      out += r[k] + ",";
    }
    out += "\n";
  }
  return out;
}

RunConfig config_from(const std::string& text, const fs::path& out) {
  std::istringstream in(text);
  RunConfig c = parse_config(in);
  c.out_dir = out.string();
  return c;
}

double least_squares_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

Outcome radial_exact_error_scan() {
  const auto start = Clock::now();
  const std::vector<std::pair<int, double>> cases{{2, 3.0}, {2, 10.0}, {3, 10.0}, {5, 50.0}};
  const int n = 1000000;
  double worst = 0.0;
  for (const auto& [d, p] : cases) {
    const double b = (p - d) / (p - 1);
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
      const double t = static_cast<double>(i) / n;
      best = std::max(best, std::pow(t, b) - t);
    }
    worst = std::max(worst, std::abs(best - radial_exact_error(p, d)));
  }
  const double secs = seconds_since(start);
  return {worst <= 1e-8 && secs < 1.0, "max |closed form - scan| = " + num(worst) + ", scan time " + num(secs) + " s"};
}

Outcome asymptotic_constant() {
  const double p = 1e4 + 1;
  const double v = std::numbers::e * p * radial_exact_error(p, 2);
  return {std::abs(v - 1.0) <= 1e-2, "e p err = " + num(v)};
}

Outcome analytic_rate_fit() {
  const auto start = Clock::now();
  const std::vector<double> ps{10, 20, 40, 80, 160};
  const std::vector<RateRow> rows = analytic_radial_rows(ps, 2, RatesSpec{});
  const RateFit fit = fit_rate(rows);
  std::vector<double> lx, ly;
  for (double p : ps) {
    lx.push_back(std::log(p));
    ly.push_back(std::log(radial_exact_error(p, 2)));
  }
  const double oracle = least_squares_slope(lx, ly);
  const double secs = seconds_since(start);
  const bool ok = fit.exponent >= -1.1 && fit.exponent <= -0.9 && std::abs(fit.exponent - oracle) <= 1e-12 &&
                  secs < 1.0;
  return {ok, "fitted exponent " + num(fit.exponent) + ", direct least squares " + num(oracle)};
}

// Positive-gradient bound at the balancing eps, evaluated from scratch.
long double explicit_bound_reference(long double p) {
  const long double gap = 1.0L / (p - 1.0L);  // 1 - beta for d = 2
  const long double alpha = 1.0L - gap;
  const long double eps = std::sqrt(gap / 2.0L);
  const long double holder = (2.0L + std::pow(2.0L, alpha)) * std::pow(eps, alpha) + 4.0L * eps;
  const long double tilde_c = 2.0L * 2.0L + 3.0L;
  const long double defect = std::pow(eps, alpha - 2.0L) * (std::pow(2.0L, -alpha) - 0.5L);
  return holder + std::pow(2.0L, 2.0L + alpha) * tilde_c * defect;
}

Outcome theoretical_dominance() {
  double worst_ratio = 0.0;
  double worst_rel_diff = 0.0;
  bool ok = true;
  for (int k = 0; k < 50; ++k) {
    const double p = std::pow(10.0, 2.0 + 3.0 * k / 49.0);
    RateBoundInputs<double> in;
    in.p = p;
    in.d = 2;
    in.alpha = beta(p, 2);
    in.seminorm_up = 1.0;
    in.lip_uinf = 1.0;
    in.sup_uinf = 1.0;
    in.diam = 2.0;
    in.boundary_gap = 0.0;
    in.positive_gradient = true;
    in.gamma = 1.0;
    const double bound = bound_explicit_rate(in);
    const double ref = static_cast<double>(explicit_bound_reference(static_cast<long double>(p)));
    const double err = radial_exact_error(p, 2);
    ok = ok && err <= bound && err <= ref;
    worst_ratio = std::max(worst_ratio, err / bound);
    worst_rel_diff = std::max(worst_rel_diff, std::abs(bound - ref) / ref);
  }
  ok = ok && worst_rel_diff <= 1e-10;
  return {ok, "max err/bound = " + num(worst_ratio) + ", bound vs reference rel diff " + num(worst_rel_diff)};
}

Outcome strict_perturbation_contract() {
  const auto start = Clock::now();
  const auto g = build_grid(Box::cube(2, 0.0, 1.0), 1.0 / 32, everywhere);
  const double eps = 4.0 / 32;
  const std::vector<Index> core = inner_parallel(g, 2 * eps).nodes();
  std::mt19937_64 rng(20240501);
  std::uniform_int_distribution<int> sweeps(1, 30);
  double worst_pointwise = std::numeric_limits<double>::infinity();
  double worst_distance = std::numeric_limits<double>::infinity();
  for (int t = 0; t < 100; ++t) {
    const ScalarField v = random_supersolution(g, eps, rng, sweeps(rng));
    const double L = v.sup_norm();
    const double delta = 1.0 / (8.0 * L);
    const ScalarField w = perturb_strict(v, delta);
    for (Index id : core) {
      const BruteBall bv = brute_ball(v, id, eps);
      const BruteBall bw = brute_ball(w, id, eps);
      const double neg_lap_v = -(bv.sup + bv.inf - 2 * v[id]) / (eps * eps);
      const double neg_lap_w = -(bw.sup + bw.inf - 2 * w[id]) / (eps * eps);
      const double s_minus = (v[id] - bv.inf) / eps;
      const double rhs = neg_lap_v + delta * s_minus * s_minus;
      const double scale = (std::abs(v[id]) + std::abs(w[id]) + std::abs(bv.sup) + std::abs(bw.sup)) / (eps * eps) +
                           delta * s_minus * s_minus;
      worst_pointwise = std::min(worst_pointwise, (neg_lap_w - rhs) / scale);
    }
    double dist = 0.0;
    for (Index id : v.domain().nodes()) dist = std::max(dist, std::abs(v[id] - w[id]));
    const double allowed = 3.0 * L * L * delta;
    worst_distance = std::min(worst_distance, (allowed - dist) / allowed);
  }
  const double secs = seconds_since(start);
  const bool ok = worst_pointwise >= -1e-10 && worst_distance >= -1e-10 && secs < 30.0;
  return {ok, "worst relative pointwise margin " + num(worst_pointwise) + ", worst relative distance margin " +
                  num(worst_distance) + ", time " + num(secs) + " s"};
}

Outcome max_principle_contract() {
  const auto g = build_grid(Box::cube(2, 0.0, 1.0), 1.0 / 32, everywhere);
  const double eps = 4.0 / 32;
  const NodeMask omega_eps = inner_parallel(g, eps);
  const NodeMask omega_2eps = inner_parallel(g, 2 * eps);
  const NodeMask ring = omega_eps - omega_2eps;
  std::mt19937_64 rng(99);
  int accepted = 0;
  long draws = 0;
  double worst = -std::numeric_limits<double>::infinity();
  double worst_oracle_diff = 0.0;
  while (accepted < 100 && draws < 100000) {
    ++draws;
    const auto t = random_comparison_triple(g, eps, rng);
    if (!t) continue;
    const MaxPrincipleCheck c = check_nonlocal_max_principle(t->u, t->v, t->C, eps);
    if (!c.hypothesis_ok) continue;
    ++accepted;
    double sup_all = -std::numeric_limits<double>::infinity();
    double sup_ring = -std::numeric_limits<double>::infinity();
    for (Index id : omega_eps.nodes()) sup_all = std::max(sup_all, t->u[id] - t->v[id]);
    for (Index id : ring.nodes()) sup_ring = std::max(sup_ring, t->u[id] - t->v[id]);
    const double gap = sup_all - sup_ring;
    worst_oracle_diff = std::max(worst_oracle_diff, std::abs(gap - c.conclusion_gap));
    const double scale = 1.0 + t->u.sup_norm() + t->v.sup_norm();
    worst = std::max(worst, gap / scale);
  }
  const bool ok = accepted == 100 && worst <= 1e-10 && worst_oracle_diff == 0.0;
  return {ok, std::to_string(accepted) + " triples from " + std::to_string(draws) + " draws, worst gap/scale " +
                  num(worst) + ", library vs direct gap diff " + num(worst_oracle_diff)};
}

Outcome approximate_consistency() {
  const double h = 1.0 / 128;
  const double eps = 8 * h;
  const double p = 3.0;
  const auto g = build_grid(Box::cube(2, -1.0, 1.0), h,
                            [](const Point& x) { return x.norm() > 0.25 && x.norm() < 1.0; }, 2 * eps);
  const double b = (p - 2) / (p - 1);
  const ScalarField up = ScalarField::sample(g, [&](const Point& x) { return std::pow(x.norm(), b); });
  const ScalarField upper = upper_envelope(up, eps);
  const ScalarField lower = lower_envelope(up, eps);
  const ScalarField lap_upper = nonlocal_inf_laplacian(upper, eps);
  const ScalarField lap_lower = nonlocal_inf_laplacian(lower, eps);
  double upper_max = -std::numeric_limits<double>::infinity();
  double lower_min = std::numeric_limits<double>::infinity();
  const std::vector<Index> core = inner_parallel(g, 2 * eps).nodes();
  for (Index id : core) {
    upper_max = std::max(upper_max, -lap_upper[id]);
    lower_min = std::min(lower_min, -lap_lower[id]);
  }
  const double bound = consistency_bound(0.5, 1.0, eps, p, 2);
  const double reference = std::pow(2.0, 1.5) * std::pow(eps, -1.5) * (std::pow(2.0, -b) - 0.5);
  const double slack = 8 * h / (eps * eps);
  const bool ok = !core.empty() && upper_max <= bound * 1.1 + slack && lower_min >= -(bound * 1.1 + slack) &&
                  std::abs(bound - reference) <= 1e-12 * reference;
  return {ok, "max -Lap u^eps = " + num(upper_max) + ", min -Lap u_eps = " + num(lower_min) +
                  ", allowed +-" + num(bound * 1.1 + slack) + " over " + std::to_string(core.size()) + " nodes"};
}

Outcome max_ball_realized() {
  const double h = 1.0 / 64;
  const double eps = 4 * h;
  const auto g = build_grid(Box::cube(2, -1.0, 1.0), h, everywhere, eps);
  const BoundaryData data = BoundaryData::sample(g, [](const Point& x) { return aronsson<double>(x); });
  SolverOptions opt;
  opt.tol = 1e-8;
  const SolveResult r = solve_inf_harmonic(g, data, eps, opt);
  const ScalarField lap_upper = nonlocal_inf_laplacian(upper_envelope(r.u, eps), eps);
  const ScalarField lap_lower = nonlocal_inf_laplacian(lower_envelope(r.u, eps), eps);
  double upper_max = -std::numeric_limits<double>::infinity();
  double lower_min = std::numeric_limits<double>::infinity();
  const std::vector<Index> core = inner_parallel(g, 2 * eps).nodes();
  for (Index id : core) {
    upper_max = std::max(upper_max, -lap_upper[id]);
    lower_min = std::min(lower_min, -lap_lower[id]);
  }
  const double allowed = 1e-6 + 4 * h / (eps * eps);
  const bool ok = r.report.converged && !core.empty() && upper_max <= allowed && lower_min >= -allowed;
  return {ok, "converged=" + std::string(r.report.converged ? "yes" : "no") + ", max -Lap u^eps = " +
                  num(upper_max) + ", min -Lap u_eps = " + num(lower_min) + ", allowed +-" + num(allowed)};
}

double aronsson_error(double h) {
  const double eps = 4 * h;
  const auto g = build_grid(Box::cube(2, -1.0, 1.0), h, everywhere, eps);
  auto exact = [](const Point& x) { return aronsson<double>(x); };
  const SolveResult r = solve_inf_harmonic(g, BoundaryData::sample(g, exact), eps);
  if (!r.report.converged) throw std::runtime_error("infinity solver did not converge");
  double err = 0.0;
  for (Index id : g->interior_nodes()) err = std::max(err, std::abs(r.u[id] - exact(Point(g->coord(id)))));
  return err;
}

double punctured_ball_error(double h) {
  const double eps = 4 * h;
  const double p = 10.0;
  const auto g = build_grid(Box::cube(2, -1.0, 1.0), h,
                            [](const Point& x) { return x.norm() > 0.0 && x.norm() < 1.0; }, eps);
  const double b = (p - 2) / (p - 1);
  auto exact = [b](const Point& x) { return std::pow(x.norm(), b); };
  const SolveResult r = solve_p_harmonious(g, BoundaryData::sample(g, exact), eps, p);
  if (!r.report.converged) throw std::runtime_error("p-harmonious solver did not converge");
  double err = 0.0;
  for (Index id : g->interior_nodes()) err = std::max(err, std::abs(r.u[id] - exact(Point(g->coord(id)))));
  return err;
}

Outcome solver_oracles() {
  const double a32 = aronsson_error(1.0 / 32);
  const double a64 = aronsson_error(1.0 / 64);
  const double r32 = punctured_ball_error(1.0 / 32);
  const double r64 = punctured_ball_error(1.0 / 64);
  return {a32 > a64 && r32 > r64, "aronsson " + num(a32) + " -> " + num(a64) + ", punctured ball p=10 " + num(r32) +
                                      " -> " + num(r64)};
}

Outcome numeric_rate_trend() {
  const auto start = Clock::now();
  RunConfig cfg = load_config(std::string(PLINF_CONFIG_DIR) + "/aronsson_rates.cfg");
  cfg.out_dir = scratch("rates").string();
  cfg.threads = 1;
  std::ostringstream log;
  const int code = run_rates(cfg, log);
  const double secs = seconds_since(start);
  const auto rows = rows_of(fs::path(cfg.out_dir) / "rates.csv");
  std::vector<RateRow> table;
  bool nonincreasing = true;
  std::string errors;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    RateRow row;
    row.p = std::stod(rows[i][0]);
    row.sup_error = std::stod(rows[i][2]);
    if (!table.empty() && row.sup_error > table.back().sup_error) nonincreasing = false;
    table.push_back(row);
    errors += (errors.empty() ? "" : ", ") + num(row.sup_error);
  }
  const RateFit fit = fit_rate(table);
  const bool ok = code == kExitOk && table.size() == 5 && nonincreasing && fit.exponent <= -0.2 && secs < 600.0;
  return {ok, "errors " + errors + ", fitted exponent " + num(fit.exponent) + ", time " + num(secs) + " s"};
}

Outcome gradient_oracle() {
  const auto g = build_grid(Box::cube(2, 0.0, 1.0), 0.25, everywhere);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::VectorXd vals(g->node_count());
    for (Index i = 0; i < vals.size(); ++i) vals[i] = unit(rng);
    const Eigen::VectorXd grad = p_energy_gradient(ScalarField(g, vals), 4.0);
    const double step = 1e-6;
    for (Index i = 0; i < vals.size(); ++i) {
      Eigen::VectorXd up = vals;
      Eigen::VectorXd dn = vals;
      up[i] += step;
      dn[i] -= step;
      const double fd = (p_energy(ScalarField(g, up), 4.0) - p_energy(ScalarField(g, dn), 4.0)) / (2 * step);
      worst = std::max(worst, std::abs(grad[i] - fd) / std::max(1.0, std::abs(fd)));
    }
  }
  return {worst <= 1e-6 && g->node_count() == 25, "worst relative difference " + num(worst)};
}

Outcome squeeze() {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int held = 0;
  for (int k = 0; k < 1000; ++k) {
    double b = k < 500 ? (k + 1) / 501.0 : unit(rng);
    if (!(b > 0.0 && b < 1.0)) b = 0.5;
    const Squeeze<double> s = squeeze_bounds(b);
    const double lower = std::numbers::ln2 / 2 * (1 - b);
    const double middle = std::pow(2.0, -b) - 0.5;
    const double upper = (1 - b) / 2;
    if (s.lower <= s.middle && s.middle <= s.upper && lower <= middle && middle <= upper) ++held;
  }
  return {held == 1000, std::to_string(held) + " of 1000 beta values"};
}

Outcome determinism() {
  const std::string text =
      "grid.h = 1/32\nboundary.kind = aronsson\nsolver.epsilon = 4/32\nsolver.p = 4, 8, 16\n"
      "rates.mode = numeric\nrates.alpha = 0.5\n";
  const fs::path a = scratch("det_a");
  const fs::path b = scratch("det_b");
  const fs::path c = scratch("det_c");
  RunConfig ca = config_from(text, a);
  RunConfig cb = config_from(text, b);
  RunConfig cc = config_from(text, c);
  cc.threads = 4;
  std::ostringstream log;
  if (run_rates(ca, log) != kExitOk || run_rates(cb, log) != kExitOk || run_rates(cc, log) != kExitOk) {
    return {false, "a run did not finish cleanly"};
  }
  int compared = 0;
  int differing = 0;
  for (const auto& entry : fs::directory_iterator(a)) {
    const fs::path name = entry.path().filename();
    if (name.extension() != ".csv") continue;
    ++compared;
    for (const fs::path& other : {b, c}) {
      const bool same = name == "runs.csv" ? without_column(a / name, "seconds") == without_column(other / name, "seconds")
                                            : slurp(a / name) == slurp(other / name);
      if (!same) ++differing;
    }
  }
  return {compared >= 5 && differing == 0,
          std::to_string(compared) + " CSV files compared across two repeats and 4 threads, " +
              std::to_string(differing) + " differ"};
}

}  // namespace

int main() {
  run_criterion(1, "radial exact error vs brute-force scan", radial_exact_error_scan);
  run_criterion(2, "asymptotic 1/p constant", asymptotic_constant);
  run_criterion(3, "analytic radial rate fit", analytic_rate_fit);
  run_criterion(4, "explicit bound dominates the radial error", theoretical_dominance);
  run_criterion(5, "strict perturbation contract", strict_perturbation_contract);
  run_criterion(6, "nonlocal maximum principle", max_principle_contract);
  run_criterion(7, "approximate consistency with slack", approximate_consistency);
  run_criterion(8, "envelopes of the infinity solution", max_ball_realized);
  run_criterion(9, "solver oracles improve under refinement", solver_oracles);
  run_criterion(10, "numeric rate trend", numeric_rate_trend);
  run_criterion(11, "energy gradient vs finite differences", gradient_oracle);
  run_criterion(12, "squeeze inequality", squeeze);
  run_criterion(13, "determinism of rate runs", determinism);
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
