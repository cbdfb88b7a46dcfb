#include "plinf/solvers.hpp"

#include <Eigen/IterativeLinearSolvers>

#include <chrono>
#include <cmath>
#include <limits>
#include <thread>
#include <vector>

#include "plinf/cones.hpp"

namespace plinf {

BoundaryData BoundaryData::sample(GridPtr grid, const std::function<double(const Point&)>& g,
                                  std::string source) {
  BoundaryData data{grid, Eigen::VectorXd::Constant(grid->node_count(), std::numeric_limits<double>::quiet_NaN()),
                    std::move(source)};
  for (Index id = 0; id < grid->node_count(); ++id) {
    if (grid->is_interior(id)) continue;
    const double value = g(Point(grid->coord(id)));
    if (!std::isfinite(value)) {
      throw std::domain_error("boundary data not finite at node " + std::to_string(id));
    }
    data.values[id] = value;
  }
  return data;
}

double midrange_weight(double p, int d) {
  if (is_infinite_exponent(p)) return 1.0;
  if (!(p >= 2.0)) throw std::domain_error("p-harmonious scheme requires p >= 2");
  return (p - 2.0) / (p + static_cast<double>(d));
}

void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& f) {
  if (threads <= 1 || n < 2 * threads) {
    f(0, n);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads - 1));
  const Index chunk = (n + threads - 1) / threads;
  for (int t = 1; t < threads; ++t) {
    const Index b = std::min(n, t * chunk);
    const Index e = std::min(n, b + chunk);
    pool.emplace_back([&f, b, e] { f(b, e); });
  }
  f(0, std::min(n, chunk));
  for (auto& th : pool) th.join();
}

namespace {

// The p-harmonious map at one node; stencil order fixes the summation order.
struct BallMap {
  std::vector<Index> flat;
  double a = 1.0;
  double inv_k = 1.0;

  double operator()(const double* u, Index id) const {
    double hi = -std::numeric_limits<double>::infinity();
    double lo = std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (Index delta : flat) {
      const double v = u[id + delta];
      hi = std::max(hi, v);
      lo = std::min(lo, v);
      sum += v;
    }
    const double mid = 0.5 * (hi + lo);
    if (a == 1.0) return mid;
    return a * mid + (1.0 - a) * sum * inv_k;
  }
};

BallMap make_map(const GridDomain& grid, double eps, double p) {
  const BallStencil stencil(grid.dim(), grid.spacing(), eps);
  BallMap m;
  m.flat = stencil.flat_offsets(grid);
  m.a = midrange_weight(p, static_cast<int>(grid.dim()));
  m.inv_k = 1.0 / static_cast<double>(m.flat.size());
  return m;
}

void require_collar(const GridDomain& grid, const BoundaryData& g, double eps) {
  if (g.grid.get() != &grid) throw std::invalid_argument("boundary data belong to a different grid");
  const BallStencil stencil(grid.dim(), grid.spacing(), eps);
  const BallNeighbors nb = ball_neighbors(grid, stencil, grid.interior_nodes());
  if (nb.truncated) throw std::invalid_argument("grid collar is narrower than eps; rebuild the grid with collar >= eps");
  for (Index j : nb.ids) {
    if (!grid.is_interior(j) && !std::isfinite(g[j])) {
      throw std::invalid_argument("boundary data missing at node " + std::to_string(j));
    }
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::VectorXd start_iterate(const GridPtr& grid, const BoundaryData& g, double eps, bool harmonic) {
  if (harmonic) {
    Eigen::VectorXd u = harmonic_ball_mean(grid, g, eps).values();
    for (Index id = 0; id < u.size(); ++id) {
      if (!grid->is_interior(id)) u[id] = std::isfinite(g[id]) ? g[id] : 0.0;
    }
    return u;
  }
  Eigen::VectorXd u = g.values;
  for (Index id = 0; id < u.size(); ++id) {
    if (grid->is_interior(id) || !std::isfinite(u[id])) u[id] = 0.0;
  }
  return u;
}

SolveResult iterate(const GridPtr& grid, const BoundaryData& g, double eps, double p, const SolverOptions& opt,
                    const char* name) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  require_collar(*grid, g, eps);
  const BallMap map = make_map(*grid, eps, p);
  const std::vector<Index>& interior = grid->interior_nodes();
  const auto n = static_cast<Index>(interior.size());

  Eigen::VectorXd cur = start_iterate(grid, g, eps, opt.harmonic_start);
  Eigen::VectorXd next = cur;

  SolveReport report;
  report.solver = name;
  double prev_update = std::numeric_limits<double>::infinity();
  double window_ref = std::numeric_limits<double>::infinity();
  const int threads = opt.sweep == Sweep::jacobi ? std::max(1, opt.threads) : 1;
  const int chunks = std::max(1, threads);
  std::vector<double> chunk_max(static_cast<std::size_t>(chunks));

  for (long k = 0; k < opt.max_iter; ++k) {
    double update = 0.0;
    if (opt.sweep == Sweep::jacobi) {
      std::fill(chunk_max.begin(), chunk_max.end(), 0.0);
      const Index chunk = (n + chunks - 1) / chunks;
      parallel_for(n, threads, [&](Index b, Index e) {
        const auto slot = static_cast<std::size_t>(b / std::max<Index>(chunk, 1));
        double local = 0.0;
        const double* src = cur.data();
        for (Index t = b; t < e; ++t) {
          const Index id = interior[static_cast<std::size_t>(t)];
          const double v = map(src, id);
          local = std::max(local, std::abs(v - src[id]));
          next[id] = v;
        }
        chunk_max[std::min(slot, chunk_max.size() - 1)] = local;
      });
      for (double c : chunk_max) update = std::max(update, c);
      // update is the residual of cur; cur is returned once the step that
      // produced it was already small.
      if (prev_update <= opt.tol && update <= 10.0 * opt.tol) {
        report.iterations = k;
        report.residual = update;
        report.converged = true;
        break;
      }
      cur.swap(next);
    } else {
      for (Index id : interior) {
        const double v = map(cur.data(), id);
        update = std::max(update, std::abs(v - cur[id]));
        cur[id] = v;
      }
      if (update <= opt.tol) {
        double res = 0.0;
        for (Index id : interior) res = std::max(res, std::abs(map(cur.data(), id) - cur[id]));
        if (res <= 10.0 * opt.tol) {
          report.iterations = k + 1;
          report.residual = res;
          report.converged = true;
          break;
        }
      }
    }
    prev_update = update;
    report.iterations = k + 1;
    report.residual = update;
    if (opt.plateau_window > 0 && (k + 1) % opt.plateau_window == 0) {
      if (std::isfinite(window_ref) && window_ref - update < opt.plateau_decrease * window_ref) break;
      window_ref = update;
    }
  }
  if (!report.converged) {
    // Report the true residual of the returned iterate.
    double res = 0.0;
    for (Index id : interior) res = std::max(res, std::abs(map(cur.data(), id) - cur[id]));
    report.residual = res;
  }
  report.seconds = seconds_since(t0);
  return SolveResult{ScalarField(grid, std::move(cur)), report};
}

}  // namespace

ScalarField harmonic_ball_mean(const GridPtr& grid, const BoundaryData& g, double eps) {
  require_collar(*grid, g, eps);
  const BallStencil stencil(grid->dim(), grid->spacing(), eps);
  const std::vector<Index> flat = stencil.flat_offsets(*grid);
  const std::vector<Index>& interior = grid->interior_nodes();
  std::vector<Index> unknown(static_cast<std::size_t>(grid->node_count()), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) unknown[static_cast<std::size_t>(interior[k])] = static_cast<Index>(k);

  const auto n = static_cast<Index>(interior.size());
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(interior.size() * flat.size());
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  const double K = static_cast<double>(flat.size());
  for (Index r = 0; r < n; ++r) {
    const Index id = interior[static_cast<std::size_t>(r)];
    for (Index delta : flat) {
      const Index j = id + delta;
      const Index c = unknown[static_cast<std::size_t>(j)];
      if (j == id) {
        triplets.emplace_back(r, r, K - 1.0);
      } else if (c >= 0) {
        triplets.emplace_back(r, c, -1.0);
      } else {
        rhs[r] += g[j];
      }
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(triplets.begin(), triplets.end());
  // Symmetric stencil, strictly dominant rows next to the boundary: SPD.
  // Direct factorizations fill in badly for wide stencils; CG does not.
  Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg(A);
  cg.setTolerance(1e-13);
  cg.setMaxIterations(10 * n + 100);
  const Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) throw SolverError("harmonic start: conjugate gradients did not converge");

  Eigen::VectorXd u = g.values;
  for (Index r = 0; r < n; ++r) u[interior[static_cast<std::size_t>(r)]] = x[r];
  NodeMask dom(grid, false);
  for (Index id = 0; id < u.size(); ++id) dom.on[id] = std::isfinite(u[id]);
  return ScalarField(grid, std::move(u), dom);
}

SolveResult solve_inf_harmonic(const GridPtr& grid, const BoundaryData& g, double eps, const SolverOptions& opt) {
  return iterate(grid, g, eps, std::numeric_limits<double>::infinity(), opt, "inf_harmonic");
}

SolveResult solve_p_harmonious(const GridPtr& grid, const BoundaryData& g, double eps, double p,
                               const SolverOptions& opt) {
  if (is_infinite_exponent(p)) return solve_inf_harmonic(grid, g, eps, opt);
  return iterate(grid, g, eps, p, opt, "p_harmonious");
}

ScalarField residual_field(const ScalarField& u, double eps, double p) {
  const GridPtr& grid = u.grid();
  const BallMap map = make_map(*grid, eps, p);
  const BallStencil stencil(grid->dim(), grid->spacing(), eps);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(grid->node_count());
  NodeMask dom(grid, false);
  for (Index id : grid->interior_nodes()) {
    const Eigen::VectorXi mi = grid->multi_index(id);
    bool complete = true;
    for (Index k = 0; k < stencil.size() && complete; ++k) {
      const Index j = grid->node_at(mi + stencil.offset(k));
      complete = j >= 0 && u.defined(j);
    }
    if (!complete) continue;
    dom.on[id] = true;
    out[id] = map(u.values().data(), id) - u[id];
  }
  return ScalarField(grid, std::move(out), dom);
}

}  // namespace plinf
