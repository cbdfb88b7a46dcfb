#include "plinf/runs.hpp"

#include <Eigen/Core>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>

#include "plinf/cones.hpp"
#include "plinf/csv.hpp"
#include "plinf/energy.hpp"
#include "plinf/nonlocal.hpp"
#include "plinf/solvers.hpp"
#include "plinf/svg.hpp"

namespace plinf {

namespace {

constexpr const char* kVersion = "1.0.0";

std::ofstream open_output(const RunConfig& cfg, const std::string& name) {
  std::filesystem::create_directories(cfg.out_dir);
  const std::filesystem::path path = std::filesystem::path(cfg.out_dir) / name;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string opt_number(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

std::string p_label(double p) { return is_infinite_exponent(p) ? "inf" : format_number(p); }

class Manifest {
 public:
  Manifest(const RunConfig& cfg, std::string command)
      : cfg_(cfg), command_(std::move(command)), start_(std::chrono::steady_clock::now()) {}

  void output(const std::string& name) { outputs_.push_back(name); }

  void write(int exit_code) {
    std::ofstream out = open_output(cfg_, "manifest.txt");
    char hash[17];
    std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg_)));
    out << "command=" << command_ << "\n";
    out << "config_hash=" << hash << "\n";
    out << "plinf_version=" << kVersion << "\n";
    out << "eigen_version=" << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
    out << "threads=" << cfg_.threads << "\n";
    out << "seed=" << cfg_.seed << "\n";
    std::string list;
    for (const auto& o : outputs_) list += (list.empty() ? "" : ",") + o;
    out << "outputs=" << list << "\n";
    out << "exit_code=" << exit_code << "\n";
    out << "wall_seconds="
        << format_number(std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count()) << "\n";
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> outputs_;
};

class RunLog {
 public:
  void add(const SolveReport& r, double p, double eps, double h) {
    rows_.push_back(std::to_string(rows_.size() + 1) + "," + r.solver + "," + p_label(p) + "," + format_number(eps) +
                    "," + format_number(h) + "," + std::to_string(r.iterations) + "," + format_number(r.residual) +
                    "," + (r.converged ? "true" : "false") + "," + format_number(r.seconds));
    all_converged_ = all_converged_ && r.converged;
  }
  bool all_converged() const { return all_converged_; }
  void write(const RunConfig& cfg, Manifest& m) const {
    std::ofstream out = open_output(cfg, "runs.csv");
    out << "run_id,solver,p,epsilon,h,iterations,residual,converged,seconds\n";
    for (const auto& r : rows_) out << r << "\n";
    m.output("runs.csv");
  }

 private:
  std::vector<std::string> rows_;
  bool all_converged_ = true;
};

double alpha_for(const RunConfig& cfg, double p) {
  return cfg.rates.alpha ? *cfg.rates.alpha : default_alpha(p, cfg.domain.dim);
}

double eps_for(const RunConfig& cfg, double p) {
  if (cfg.solver.eps) return *cfg.solver.eps;
  if (is_infinite_exponent(p)) throw ConfigError("solver.epsilon", "auto needs a finite p; give epsilon explicitly");
  const double eps = optimal_epsilon(p, cfg.domain.dim, alpha_for(cfg, p), false);
  if (eps < cfg.h) throw ConfigError("solver.epsilon", "auto epsilon " + format_number(eps) + " is below grid.h");
  return eps;
}

GridPtr grid_for(const RunConfig& cfg, double collar) {
  try {
    return build_grid(domain_box(cfg), cfg.h, domain_predicate(cfg), collar);
  } catch (const std::domain_error& e) {
    throw ConfigError("domain.kind", e.what());
  }
}

SolverOptions solver_options(const RunConfig& cfg) {
  SolverOptions o;
  o.tol = cfg.solver.tol;
  o.max_iter = cfg.solver.max_iter;
  o.threads = cfg.threads;
  o.sweep = cfg.solver.sweep == "gauss_seidel" ? Sweep::gauss_seidel : Sweep::jacobi;
  return o;
}

SolveResult solve_one(const RunConfig& cfg, const GridPtr& grid, const BoundaryData& g, double p, double eps) {
  if (cfg.solver.kind == "energy" && !is_infinite_exponent(p)) {
    EnergyOptions o;
    o.tol = cfg.solver.tol;
    o.max_iter = cfg.solver.max_iter;
    return solve_p_energy(grid, g, p, o);
  }
  return solve_p_harmonious(grid, g, eps, p, solver_options(cfg));
}

NodeMask closure_mask(const GridPtr& grid) {
  NodeMask m(grid, false);
  for (Index id : grid->interior_nodes()) m.on[id] = true;
  for (Index id : grid->boundary_nodes()) m.on[id] = true;
  return m;
}

void write_field(const RunConfig& cfg, Manifest& m, const std::string& name, const ScalarField& u) {
  std::ofstream out = open_output(cfg, name);
  write_field_csv(out, u);
  m.output(name);
}

void plot_rates(const RunConfig& cfg, Manifest& m, const std::vector<RateRow>& rows, const std::string& title) {
  PlotSeries err{"sup error", {}, {}}, gen{"bound (general)", {}, {}}, pos{"bound (positive gradient)", {}, {}};
  for (const RateRow& r : rows) {
    err.x.push_back(r.p);
    err.y.push_back(r.sup_error);
    if (r.bound_general) {
      gen.x.push_back(r.p);
      gen.y.push_back(*r.bound_general);
    }
    if (r.bound_posgrad) {
      pos.x.push_back(r.p);
      pos.y.push_back(*r.bound_posgrad);
    }
  }
  std::ofstream out = open_output(cfg, "rates.svg");
  write_loglog_svg(out, title, "p", {err, gen, pos});
  m.output("rates.svg");
}

}  // namespace

std::vector<RateRow> analytic_radial_rows(const std::vector<double>& ps, int d, const RatesSpec& spec) {
  std::vector<RateRow> rows;
  for (double p : ps) {
    if (is_infinite_exponent(p)) continue;
    RateRow row;
    row.p = p;
    row.sup_error = radial_exact_error(p, d);
    RateBoundInputs<double> in;
    in.p = p;
    in.d = d;
    in.alpha = spec.alpha ? *spec.alpha : beta(p, d);
    in.seminorm_up = spec.holder ? *spec.holder : 1.0;
    in.lip_uinf = spec.lip_uinf ? *spec.lip_uinf : 1.0;
    in.sup_uinf = spec.sup_uinf ? *spec.sup_uinf : 1.0;
    in.diam = spec.diam ? *spec.diam : 2.0;
    in.gamma = spec.gamma ? *spec.gamma : 1.0;
    row.eps = optimal_epsilon(p, d, in.alpha, false);
    if (spec.bounds) {
      try {
        row.bound_general = bound_explicit_rate(in);
      } catch (const std::domain_error&) {
      }
      in.positive_gradient = true;
      try {
        row.bound_posgrad = bound_explicit_rate(in);
      } catch (const std::domain_error&) {
      }
    }
    rows.push_back(row);
  }
  return rows;
}

void write_rate_table(std::ostream& out, const std::vector<RateRow>& rows) {
  out << "p,epsilon,sup_error,bound_general,bound_posgrad,boundary_gap\n";
  for (const RateRow& r : rows) {
    out << format_number(r.p) << ',' << format_number(r.eps) << ',' << format_number(r.sup_error) << ','
        << opt_number(r.bound_general) << ',' << opt_number(r.bound_posgrad) << ',' << format_number(r.boundary_gap)
        << '\n';
  }
  try {
    const RateFit fit = fit_rate(rows);
    out << "#fit: exponent=" << format_number(fit.exponent) << '\n';
    out << "#fit: intercept=" << format_number(fit.intercept) << '\n';
    out << "#fit: residual=" << format_number(fit.residual) << '\n';
    out << "#fit: p_range=" << format_number(fit.p_min) << ',' << format_number(fit.p_max) << '\n';
    out << "#fit: rows_used=" << fit.rows_used << '\n';
    for (const auto& w : fit.warnings) out << "#fit: warning=" << w << '\n';
  } catch (const std::invalid_argument& e) {
    out << "#fit: unavailable=" << e.what() << '\n';
  }
}

int run_solve(const RunConfig& cfg, std::ostream& log) {
  Manifest manifest(cfg, "solve");
  std::map<double, double> eps;
  double collar = 0.0;
  for (double p : cfg.solver.ps) {
    eps[p] = cfg.solver.kind == "energy" ? (cfg.solver.eps ? *cfg.solver.eps : cfg.h) : eps_for(cfg, p);
    collar = std::max(collar, eps[p]);
  }
  const GridPtr grid = grid_for(cfg, collar);
  {
    std::ofstream out = open_output(cfg, "grid.csv");
    write_grid_csv(out, *grid);
    manifest.output("grid.csv");
  }
  RunLog runs;
  for (double p : cfg.solver.ps) {
    const BoundaryData g = make_boundary(cfg, grid, p);
    const SolveResult r = solve_one(cfg, grid, g, p, eps[p]);
    runs.add(r.report, p, eps[p], cfg.h);
    write_field(cfg, manifest, "u_p" + p_label(p) + ".csv", r.u);
    log << "p=" << p_label(p) << " eps=" << format_number(eps[p]) << " iterations=" << r.report.iterations
        << " residual=" << format_number(r.report.residual) << (r.report.converged ? "" : " NOT CONVERGED") << "\n";
  }
  runs.write(cfg, manifest);
  const int code = runs.all_converged() ? kExitOk : kExitNonConvergence;
  manifest.write(code);
  return code;
}

int run_rates(const RunConfig& cfg, std::ostream& log) {
  Manifest manifest(cfg, "rates");
  std::vector<RateRow> rows;
  RunLog runs;
  const int d = cfg.domain.dim;
  if (cfg.rates.mode == "analytic") {
    if (cfg.boundary.kind != "radial") throw ConfigError("rates.mode", "analytic mode needs boundary.kind=radial");
    rows = analytic_radial_rows(cfg.solver.ps, d, cfg.rates);
  } else {
    std::map<double, double> eps;
    double collar = 0.0;
    for (double p : cfg.solver.ps) {
      if (is_infinite_exponent(p)) continue;
      eps[p] = eps_for(cfg, p);
      collar = std::max(collar, eps[p]);
    }
    if (eps.empty()) throw ConfigError("solver.p", "numeric rates need at least one finite p");
    const GridPtr grid = grid_for(cfg, collar);
    const NodeMask closure = closure_mask(grid);
    const BoundaryData g_inf = make_boundary(cfg, grid, std::numeric_limits<double>::infinity());

    std::map<double, ScalarField> limits;  // u_inf per epsilon
    for (double p : cfg.solver.ps) {
      if (is_infinite_exponent(p)) continue;
      const double e = eps[p];
      if (!limits.count(e)) {
        const SolveResult r = solve_inf_harmonic(grid, g_inf, e, solver_options(cfg));
        runs.add(r.report, std::numeric_limits<double>::infinity(), e, cfg.h);
        write_field(cfg, manifest, "u_pinf_eps" + format_number(e) + ".csv", r.u);
        limits.emplace(e, r.u);
      }
      const ScalarField& u_inf = limits.at(e);
      const BoundaryData g = make_boundary(cfg, grid, p);
      const SolveResult r = solve_one(cfg, grid, g, p, e);
      runs.add(r.report, p, e, cfg.h);
      write_field(cfg, manifest, "u_p" + p_label(p) + ".csv", r.u);

      RateRow row;
      row.p = p;
      row.eps = e;
      row.sup_error = sup_error(r.u, u_inf, closure);
      for (Index id : grid->boundary_nodes()) row.boundary_gap = std::max(row.boundary_gap, std::abs(g[id] - g_inf[id]));
      if (cfg.rates.bounds) {
        RateBoundInputs<double> in;
        in.p = p;
        in.d = d;
        in.alpha = alpha_for(cfg, p);
        const ScalarField up = r.u.restricted(closure);
        const ScalarField ui = u_inf.restricted(closure);
        in.seminorm_up = cfg.rates.holder ? *cfg.rates.holder : holder_seminorm(up, in.alpha).value;
        in.lip_uinf = cfg.rates.lip_uinf ? *cfg.rates.lip_uinf : holder_seminorm(ui, 1.0).value;
        in.sup_uinf = cfg.rates.sup_uinf ? *cfg.rates.sup_uinf : ui.sup_norm();
        in.diam = cfg.rates.diam ? *cfg.rates.diam : grid->diameter();
        in.boundary_gap = row.boundary_gap;
        try {
          row.bound_general = bound_general_rate(e, in);
        } catch (const std::domain_error&) {
        }
        in.gamma = cfg.rates.gamma ? *cfg.rates.gamma : measure_gamma(u_inf, e);
        in.positive_gradient = true;
        if (in.gamma > 0.0) {
          try {
            row.bound_posgrad = bound_general_rate(e, in);
          } catch (const std::domain_error&) {
          }
        }
      }
      rows.push_back(row);
      log << "p=" << p_label(p) << " sup_error=" << format_number(row.sup_error)
          << (r.report.converged ? "" : " NOT CONVERGED") << "\n";
    }
    runs.write(cfg, manifest);
  }
  {
    std::ofstream out = open_output(cfg, "rates.csv");
    write_rate_table(out, rows);
    manifest.output("rates.csv");
  }
  try {
    const RateFit fit = fit_rate(rows);
    log << "fitted exponent " << format_number(fit.exponent) << " over p in [" << format_number(fit.p_min) << ", "
        << format_number(fit.p_max) << "]\n";
  } catch (const std::invalid_argument& e) {
    log << "no fit: " << e.what() << "\n";
  }
  if (cfg.plot) plot_rates(cfg, manifest, rows, "sup error and bounds against p");
  const int code = runs.all_converged() ? kExitOk : kExitNonConvergence;
  manifest.write(code);
  return code;
}

int example_radial(const RunConfig& base, std::ostream& log) {
  RunConfig cfg = base;
  cfg.rates.mode = "analytic";
  cfg.boundary.kind = "radial";
  cfg.domain.kind = "punctured_ball";
  if (!cfg.entries.count("solver.p")) cfg.solver.ps = {10.0, 20.0, 40.0, 80.0, 160.0};
  for (double p : cfg.solver.ps) {
    if (!is_infinite_exponent(p) && !(p > cfg.domain.dim)) throw ConfigError("solver.p", "radial example needs p > dim");
  }
  const int code = run_rates(cfg, log);
  const std::vector<RateRow> rows = analytic_radial_rows(cfg.solver.ps, cfg.domain.dim, cfg.rates);
  write_rate_table(log, rows);
  return code;
}

// --- property suites -------------------------------------------------------

ScalarField random_supersolution(const GridPtr& grid, double eps, std::mt19937_64& rng, int sweeps) {
  const Index d = grid->dim();
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  std::uniform_int_distribution<int> pieces(2, 6);
  const int K = pieces(rng);
  Eigen::MatrixXd A(d, K);
  Eigen::VectorXd b(K);
  for (int k = 0; k < K; ++k) {
    for (Index j = 0; j < d; ++j) A(j, k) = coef(rng);
    b[k] = 0.5 * coef(rng);
  }
  const NodeMask inner = inner_parallel(grid, eps);
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->node_count());
  double lo = std::numeric_limits<double>::infinity();
  for (Index id : inner.nodes()) {
    v[id] = (A.transpose() * grid->coord(id) + b).minCoeff();
    lo = std::min(lo, v[id]);
  }
  const double lift = 0.1 + 0.9 * std::uniform_real_distribution<double>(0.0, 1.0)(rng);
  for (Index id : inner.nodes()) v[id] += lift - lo;

  const BallStencil stencil(d, grid->spacing(), eps);
  const std::vector<Index> flat = stencil.flat_offsets(*grid);
  const std::vector<Index> core_nodes = core.nodes();
  Eigen::VectorXd next = v;
  for (int s = 0; s < sweeps; ++s) {
    for (Index id : core_nodes) {
      double hi = -std::numeric_limits<double>::infinity();
      double lo2 = std::numeric_limits<double>::infinity();
      for (Index delta : flat) {
        hi = std::max(hi, v[id + delta]);
        lo2 = std::min(lo2, v[id + delta]);
      }
      next[id] = 0.5 * (hi + lo2);
    }
    v = next;
  }
  return ScalarField(grid, std::move(v), inner);
}

std::optional<ComparisonTriple> random_comparison_triple(const GridPtr& grid, double eps, std::mt19937_64& rng) {
  const Index d = grid->dim();
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> pos(0.0, 1.0);
  std::uniform_int_distribution<int> pieces(1, 5);
  auto affine_family = [&](int K, bool upper) {
    Eigen::MatrixXd A(d, K);
    Eigen::VectorXd b(K);
    for (int k = 0; k < K; ++k) {
      for (Index j = 0; j < d; ++j) A(j, k) = unit(rng);
      b[k] = unit(rng);
    }
    Point c(d);
    for (Index j = 0; j < d; ++j) c[j] = unit(rng);
    const double curv = pos(rng);
    return [A, b, c, curv, upper](const Point& x) {
      const Eigen::VectorXd vals = A.transpose() * x + b;
      const double q = curv * (x - c).squaredNorm();
      return upper ? vals.maxCoeff() + q : vals.minCoeff() - q;
    };
  };
  const auto fu = affine_family(pieces(rng), true);
  const auto fv = affine_family(pieces(rng), false);
  const double shift = unit(rng);
  ComparisonTriple t{ScalarField::sample(grid, fu), ScalarField::sample(grid, [&](const Point& x) { return fv(x) + shift; }),
                     0.0};
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  const ScalarField lu = nonlocal_inf_laplacian(t.u, eps);
  const ScalarField lv = nonlocal_inf_laplacian(t.v, eps);
  double c_lo = -std::numeric_limits<double>::infinity();
  double c_hi = std::numeric_limits<double>::infinity();
  for (Index id : core.nodes()) {
    c_lo = std::max(c_lo, -lu[id]);
    c_hi = std::min(c_hi, -lv[id]);
  }
  if (!(c_lo <= c_hi)) return std::nullopt;
  t.C = c_lo;
  return t;
}

std::vector<PropertyLine> verify_suite(const RunConfig& cfg) {
  const int n = cfg.verify.size;
  const double h = 1.0 / (n - 1);
  const double eps = cfg.verify.eps_cells * h;
  const int d = cfg.domain.dim;
  const GridPtr grid = build_grid(Box::cube(d, 0.0, 1.0), h, [](const Point&) { return true; });
  if (inner_parallel(grid, 2.0 * eps).empty()) throw ConfigError("verify.eps_cells", "Omega_2eps is empty on the verify grid");
  std::mt19937_64 rng(cfg.seed);
  std::vector<PropertyLine> lines;

  {
    PropertyLine line{"nonlocal_max_principle", 0, std::numeric_limits<double>::infinity(), false};
    int accepted = 0;
    for (int t = 0; t < cfg.verify.trials; ++t) {
      const auto triple = random_comparison_triple(grid, eps, rng);
      if (!triple) continue;
      const MaxPrincipleCheck c = check_nonlocal_max_principle(triple->u, triple->v, triple->C, eps);
      if (!c.hypothesis_ok) continue;
      ++accepted;
      const double scale = 1.0 + triple->u.sup_norm() + triple->v.sup_norm();
      line.worst_margin = std::min(line.worst_margin, 1e-10 * scale - c.conclusion_gap);
      line.nodes_checked += c.nodes_checked;
    }
    line.passed = accepted > 0 && line.worst_margin >= 0.0;
    if (accepted == 0) line.worst_margin = std::numeric_limits<double>::quiet_NaN();
    lines.push_back(line);
  }
  {
    PropertyLine line{"strict_perturbation", 0, std::numeric_limits<double>::infinity(), false};
    std::uniform_int_distribution<int> sweeps(0, 30);
    for (int t = 0; t < cfg.verify.trials; ++t) {
      const ScalarField v = random_supersolution(grid, eps, rng, sweeps(rng));
      const double delta = 1.0 / (8.0 * v.sup_norm());
      const ScalarField w = perturb_strict(v, delta);
      const StrictPerturbationCheck c = check_strict_perturbation(v, w, delta, eps);
      line.worst_margin = std::min({line.worst_margin, c.relative_margin, c.distance_margin});
      line.nodes_checked += c.nodes_checked;
    }
    line.passed = line.worst_margin >= -1e-10;
    lines.push_back(line);
  }
  {
    PropertyLine line{"positive_slope_perturbation", 0, std::numeric_limits<double>::infinity(), false};
    std::uniform_int_distribution<int> sweeps(0, 30);
    std::uniform_real_distribution<double> dist(0.02, 0.5);
    bool ok = true;
    for (int t = 0; t < cfg.verify.trials; ++t) {
      const ScalarField u = random_supersolution(grid, eps, rng, sweeps(rng));
      const double delta = dist(rng);
      PositiveSlopeMargins m;
      try {
        m = perturb_positive_slope(u, delta, eps).margins;
      } catch (const ContractError& err) {
        m = err.margins;
        ok = false;
      }
      const double tau = m.tolerance;
      line.worst_margin = std::min({line.worst_margin, (m.superharmonic + tau / eps) / (tau / eps),
                                    (m.slope + tau) / tau, (m.lower + tau * eps) / (tau * eps),
                                    (m.upper + tau * eps) / (tau * eps)});
      line.nodes_checked += inner_parallel(grid, 2.0 * eps).count();
    }
    line.passed = ok && line.worst_margin >= 0.0;
    lines.push_back(line);
  }
  {
    PropertyLine line{"envelope_sandwich", 0, std::numeric_limits<double>::infinity(), false};
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int t = 0; t < cfg.verify.trials; ++t) {
      Eigen::VectorXd vals(grid->node_count());
      for (Index i = 0; i < vals.size(); ++i) vals[i] = unit(rng);
      const ScalarField u(grid, vals);
      const ScalarField up = upper_envelope(u, eps);
      const ScalarField lo = lower_envelope(u, eps);
      for (Index id : up.domain().nodes()) {
        line.worst_margin = std::min({line.worst_margin, up[id] - u[id], u[id] - lo[id]});
        ++line.nodes_checked;
      }
    }
    line.passed = line.worst_margin >= 0.0;
    lines.push_back(line);
  }
  {
    PropertyLine line{"laplacian_duality", 0, 0.0, false};
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int t = 0; t < cfg.verify.trials; ++t) {
      Eigen::VectorXd vals(grid->node_count());
      for (Index i = 0; i < vals.size(); ++i) vals[i] = unit(rng);
      const ScalarField u(grid, vals);
      const ScalarField a = nonlocal_inf_laplacian(u, eps);
      const ScalarField b = nonlocal_inf_laplacian(-u, eps);
      for (Index id : a.domain().nodes()) {
        line.worst_margin = std::min(line.worst_margin, -std::abs(a[id] + b[id]) * eps * eps);
        ++line.nodes_checked;
      }
    }
    line.passed = line.worst_margin >= -1e-14;
    lines.push_back(line);
  }
  if (d == 2) {
    // Aronsson data rescaled to the unit square.
    PropertyLine line{"max_ball", 0, 0.0, false};
    const GridPtr g2 = build_grid(Box::cube(2, 0.0, 1.0), h, [](const Point&) { return true; }, eps);
    const BoundaryData g = BoundaryData::sample(g2, [](const Point& x) {
      return aronsson<double>(Eigen::Vector2d(2.0 * x[0] - 1.0, 2.0 * x[1] - 1.0));
    }, "aronsson");
    SolverOptions o;
    o.tol = 1e-10;
    o.threads = cfg.threads;
    const SolveResult r = solve_inf_harmonic(g2, g, eps, o);
    const NodeMask core = inner_parallel(g2, 2.0 * eps);
    const ScalarField up = nonlocal_inf_laplacian(upper_envelope(r.u, eps), eps);
    const ScalarField lo = nonlocal_inf_laplacian(lower_envelope(r.u, eps), eps);
    const double slack = 2.0 * r.report.residual / (eps * eps) + 4.0 * h / (eps * eps);
    double worst = std::numeric_limits<double>::infinity();
    for (Index id : core.nodes()) worst = std::min({worst, slack + up[id], slack - lo[id]});
    line.worst_margin = worst;
    line.nodes_checked = core.count();
    line.passed = r.report.converged && worst >= 0.0;
    lines.push_back(line);
  }
  return lines;
}

void write_verify_report(std::ostream& out, const std::vector<PropertyLine>& lines) {
  out << "property,nodes_checked,worst_margin,status\n";
  for (const auto& l : lines) {
    out << l.name << ',' << l.nodes_checked << ',' << format_number(l.worst_margin) << ','
        << (l.passed ? "pass" : "fail") << '\n';
  }
}

int run_verify(const RunConfig& cfg, std::ostream& log) {
  Manifest manifest(cfg, "verify");
  const std::vector<PropertyLine> lines = verify_suite(cfg);
  {
    std::ofstream out = open_output(cfg, "verify.csv");
    write_verify_report(out, lines);
    manifest.output("verify.csv");
  }
  write_verify_report(log, lines);
  bool ok = true;
  for (const auto& l : lines) ok = ok && l.passed;
  const int code = ok ? kExitOk : kExitVerification;
  manifest.write(code);
  return code;
}

int run_consistency(const RunConfig& cfg, std::ostream& log) {
  Manifest manifest(cfg, "consistency");
  const ConsistencySpec& cs = cfg.consistency;
  const int d = cfg.domain.dim;
  const double eps = cfg.solver.eps ? *cfg.solver.eps : optimal_epsilon(cs.p, d, cs.alpha, false);
  if (eps < cfg.h) throw ConfigError("solver.epsilon", "epsilon below grid.h");
  const GridPtr grid = grid_for(cfg, eps);
  ScalarField up;
  RunLog runs;
  if (cfg.boundary.kind == "radial") {
    const RadialProblem<double> rp(d, cs.p);
    up = ScalarField::sample(grid, [&rp](const Point& x) { return radial_p_harmonic(rp, x); });
  } else {
    const BoundaryData g = make_boundary(cfg, grid, cs.p);
    const SolveResult r = solve_one(cfg, grid, g, cs.p, eps);
    runs.add(r.report, cs.p, eps, cfg.h);
    up = r.u;
    runs.write(cfg, manifest);
  }
  const ConsistencyReport rep = check_approx_consistency(up, cs.alpha, eps, cs.p, cs.seminorm);
  const double slack = cs.slack_factor * cfg.h / (eps * eps);
  const double limit = cs.bound_factor * rep.bound + slack;
  const bool ok = rep.upper_max <= limit && rep.lower_min >= -limit;
  {
    std::ofstream out = open_output(cfg, "consistency.csv");
    out << "epsilon,alpha,seminorm,upper_max,lower_min,bound,slack,margin,nodes_checked,status\n";
    out << format_number(rep.eps) << ',' << format_number(rep.alpha) << ',' << format_number(rep.seminorm) << ','
        << format_number(rep.upper_max) << ',' << format_number(rep.lower_min) << ',' << format_number(rep.bound) << ','
        << format_number(slack) << ',' << format_number(std::min(limit - rep.upper_max, rep.lower_min + limit)) << ','
        << rep.nodes_checked << ',' << (ok ? "pass" : "fail") << '\n';
    manifest.output("consistency.csv");
  }
  log << "max -Lap(u^eps) = " << format_number(rep.upper_max) << ", min -Lap(u_eps) = " << format_number(rep.lower_min)
      << ", bound = " << format_number(rep.bound) << ", slack = " << format_number(slack) << (ok ? "" : "  FAIL")
      << "\n";
  const int code = ok ? kExitOk : kExitVerification;
  manifest.write(code);
  return code;
}

int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log) {
  try {
    if (name == "solve") return run_solve(cfg, log);
    if (name == "rates") return run_rates(cfg, log);
    if (name == "verify") return run_verify(cfg, log);
    if (name == "consistency") return run_consistency(cfg, log);
    if (name == "example-radial") return example_radial(cfg, log);
    log << "error: unknown subcommand '" << name << "'\n";
    return kExitConfig;
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const SolverError& e) {
    log << "solver error: " << e.what() << "\n";
    return kExitNonConvergence;
  } catch (const std::invalid_argument& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::domain_error& e) {
    log << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace plinf
