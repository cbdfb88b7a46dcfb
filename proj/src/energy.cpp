#include "plinf/energy.hpp"

#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace plinf {

namespace {

// Cells of the lattice that carry energy, as lower-corner ids, plus the
// flat deltas of the axis neighbours of a corner.
struct CellSet {
  std::vector<Index> lower;
  std::vector<Index> axis;
  double h = 1.0;
  double volume = 1.0;
};

CellSet energy_cells(const GridDomain& grid) {
  const Index d = grid.dim();
  CellSet cells;
  cells.h = grid.spacing();
  cells.volume = std::pow(cells.h, static_cast<double>(d));
  for (Index k = 0; k < d; ++k) cells.axis.push_back(grid.strides()[k]);

  std::vector<Eigen::VectorXi> corners;
  for (Index c = 0; c < (Index{1} << d); ++c) {
    Eigen::VectorXi o(d);
    for (Index k = 0; k < d; ++k) o[k] = static_cast<int>((c >> (d - 1 - k)) & 1);
    corners.push_back(o);
  }
  for (Index id = 0; id < grid.node_count(); ++id) {
    const Eigen::VectorXi mi = grid.multi_index(id);
    bool inside = true;
    bool touches = false;
    for (const auto& o : corners) {
      const Index j = grid.node_at(mi + o);
      if (j < 0) {
        inside = false;
        break;
      }
      touches = touches || grid.is_interior(j);
    }
    if (inside && touches) cells.lower.push_back(id);
  }
  return cells;
}

void require_exponent(double p, Index d) {
  if (!std::isfinite(p)) throw std::domain_error("energy solver needs a finite p; use p_harmonious");
  if (!(p > static_cast<double>(d))) throw std::domain_error("energy solver requires p > d");
  if (p > kMaxEnergyExponent) throw std::domain_error("p exceeds the energy solver limit; use p_harmonious");
}

// Largest cell gradient norm.
double max_gradient(const CellSet& cells, const double* u) {
  double m = 0.0;
  for (Index c : cells.lower) {
    double s = 0.0;
    for (Index a : cells.axis) {
      const double g = (u[c + a] - u[c]) / cells.h;
      s += g * g;
    }
    m = std::max(m, s);
  }
  return std::sqrt(m);
}

// J = E^{1/p} and its gradient (dJ/du), computed with the largest cell
// gradient factored out.
double root_energy(const CellSet& cells, const double* u, double p, Eigen::VectorXd* grad) {
  const double M = max_gradient(cells, u);
  if (grad) grad->setZero();
  if (M == 0.0) return 0.0;
  double S = 0.0;
  for (Index c : cells.lower) {
    double s = 0.0;
    for (Index a : cells.axis) {
      const double g = (u[c + a] - u[c]) / cells.h;
      s += g * g;
    }
    S += std::pow(std::sqrt(s) / M, p);
  }
  const double J = M * std::pow(S * cells.volume, 1.0 / p);
  if (!grad) return J;
  const Index d = static_cast<Index>(cells.axis.size());
  Eigen::VectorXd gc(d);
  for (Index c : cells.lower) {
    double s = 0.0;
    for (Index k = 0; k < d; ++k) {
      gc[k] = (u[c + cells.axis[static_cast<std::size_t>(k)]] - u[c]) / cells.h;
      s += gc[k] * gc[k];
    }
    const double r = std::sqrt(s) / J;
    if (r == 0.0) continue;
    const double w = std::pow(r, p - 2.0) * cells.volume / (J * cells.h);
    for (Index k = 0; k < d; ++k) {
      const double f = w * gc[k];
      (*grad)[c + cells.axis[static_cast<std::size_t>(k)]] += f;
      (*grad)[c] -= f;
    }
  }
  return J;
}

Eigen::VectorXd five_point_harmonic(const GridDomain& grid, const BoundaryData& g) {
  const std::vector<Index>& interior = grid.interior_nodes();
  std::vector<Index> unknown(static_cast<std::size_t>(grid.node_count()), -1);
  for (std::size_t k = 0; k < interior.size(); ++k) unknown[static_cast<std::size_t>(interior[k])] = static_cast<Index>(k);
  const auto n = static_cast<Index>(interior.size());
  std::vector<Eigen::Triplet<double>> t;
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (Index r = 0; r < n; ++r) {
    const Index id = interior[static_cast<std::size_t>(r)];
    t.emplace_back(r, r, 2.0 * static_cast<double>(grid.dim()));
    for (Index k = 0; k < grid.dim(); ++k) {
      for (Index j : {id + grid.strides()[k], id - grid.strides()[k]}) {
        const Index c = unknown[static_cast<std::size_t>(j)];
        if (c >= 0) {
          t.emplace_back(r, c, -1.0);
        } else {
          rhs[r] += g[j];
        }
      }
    }
  }
  Eigen::SparseMatrix<double> A(n, n);
  A.setFromTriplets(t.begin(), t.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
  if (ldlt.info() != Eigen::Success) throw SolverError("energy start: factorization failed");
  Eigen::VectorXd x = ldlt.solve(rhs);
  Eigen::VectorXd u = g.values;
  for (Index id = 0; id < u.size(); ++id) {
    if (!std::isfinite(u[id])) u[id] = 0.0;
  }
  for (Index r = 0; r < n; ++r) u[interior[static_cast<std::size_t>(r)]] = x[r];
  return u;
}

}  // namespace

double p_energy(const ScalarField& u, double p) {
  const GridDomain& grid = *u.grid();
  require_exponent(p, grid.dim());
  const CellSet cells = energy_cells(grid);
  for (Index c : cells.lower) {
    if (!u.defined(c)) throw std::invalid_argument("p_energy: field undefined on an energy cell");
    for (Index a : cells.axis) {
      if (!u.defined(c + a)) throw std::invalid_argument("p_energy: field undefined on an energy cell");
    }
  }
  const double J = root_energy(cells, u.values().data(), p, nullptr);
  return std::exp(p * std::log(J));
}

Eigen::VectorXd p_energy_gradient(const ScalarField& u, double p) {
  const GridDomain& grid = *u.grid();
  require_exponent(p, grid.dim());
  const CellSet cells = energy_cells(grid);
  Eigen::VectorXd grad = Eigen::VectorXd::Zero(grid.node_count());
  for (Index c : cells.lower) {
    double s = 0.0;
    Eigen::VectorXd gc(grid.dim());
    for (Index k = 0; k < grid.dim(); ++k) {
      gc[k] = (u[c + cells.axis[static_cast<std::size_t>(k)]] - u[c]) / cells.h;
      s += gc[k] * gc[k];
    }
    if (s == 0.0) continue;
    const double w = p * std::pow(s, 0.5 * (p - 2.0)) * cells.volume / cells.h;
    for (Index k = 0; k < grid.dim(); ++k) {
      grad[c + cells.axis[static_cast<std::size_t>(k)]] += w * gc[k];
      grad[c] -= w * gc[k];
    }
  }
  return grad;
}

SolveResult solve_p_energy(const GridPtr& grid, const BoundaryData& g, double p, const EnergyOptions& opt) {
  const auto t0 = std::chrono::steady_clock::now();
  require_exponent(p, grid->dim());
  if (!(opt.tol > 0.0)) throw std::invalid_argument("tolerance must be positive");
  if (g.grid != grid) throw std::invalid_argument("boundary data belong to a different grid");
  for (Index id : grid->boundary_nodes()) {
    if (!std::isfinite(g[id])) throw std::invalid_argument("boundary data missing at node " + std::to_string(id));
  }
  const CellSet cells = energy_cells(*grid);
  const std::vector<Index>& interior = grid->interior_nodes();
  const auto n = static_cast<Index>(interior.size());
  const double scale = std::pow(grid->spacing(), static_cast<double>(grid->dim()) - 1.0);

  Eigen::VectorXd u = five_point_harmonic(*grid, g);
  Eigen::VectorXd full_grad(u.size());
  auto evaluate = [&](const Eigen::VectorXd& field, Eigen::VectorXd& gx) {
    const double J = root_energy(cells, field.data(), p, &full_grad);
    gx.resize(n);
    for (Index r = 0; r < n; ++r) gx[r] = full_grad[interior[static_cast<std::size_t>(r)]];
    return J;
  };

  Eigen::VectorXd gx;
  double J = evaluate(u, gx);
  std::deque<std::pair<Eigen::VectorXd, Eigen::VectorXd>> memory;
  SolveReport report;
  report.solver = "p_energy";
  Eigen::VectorXd trial = u;
  Eigen::VectorXd g_new;
  bool fresh = true;

  for (long k = 0; k < opt.max_iter; ++k) {
    report.iterations = k;
    report.residual = gx.lpNorm<Eigen::Infinity>() / scale;
    if (report.residual <= opt.tol) {
      report.converged = true;
      break;
    }

    // Two-loop recursion.
    Eigen::VectorXd q = gx;
    std::vector<double> alpha(memory.size());
    for (std::size_t i = memory.size(); i-- > 0;) {
      const auto& [s, y] = memory[i];
      alpha[i] = s.dot(q) / y.dot(s);
      q -= alpha[i] * y;
    }
    if (!memory.empty()) {
      const auto& [s, y] = memory.back();
      q *= s.dot(y) / y.dot(y);
    } else {
      // First step moves the largest entry by about one grid spacing.
      q *= grid->spacing() / std::max(gx.lpNorm<Eigen::Infinity>(), 1e-300);
    }
    for (std::size_t i = 0; i < memory.size(); ++i) {
      const auto& [s, y] = memory[i];
      const double b = y.dot(q) / y.dot(s);
      q += s * (alpha[i] - b);
    }
    Eigen::VectorXd dir = -q;
    double slope = gx.dot(dir);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -gx * (grid->spacing() / std::max(gx.lpNorm<Eigen::Infinity>(), 1e-300));
      slope = gx.dot(dir);
    }

    double step = 1.0;
    bool accepted = false;
    double J_new = J;
    for (int tries = 0; tries < 60; ++tries) {
      trial = u;
      for (Index r = 0; r < n; ++r) trial[interior[static_cast<std::size_t>(r)]] += step * dir[r];
      J_new = evaluate(trial, g_new);
      if (J_new <= J + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      // Near the minimum the decrease drops below the rounding of J;
      // accept on the directional derivative instead (approximate Wolfe).
      const double dphi = g_new.dot(dir);
      if (J_new <= J + 1e-12 * std::abs(J) && dphi >= 0.9 * slope && dphi <= -0.8 * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!fresh) {
        memory.clear();
        fresh = true;
        continue;
      }
      std::ostringstream msg;
      msg << "energy line search failed at iteration " << k << " (J=" << J << ", scaled gradient="
          << report.residual << ", directional slope=" << slope << ")";
      throw SolverError(msg.str());
    }
    fresh = false;
    Eigen::VectorXd s(n);
    for (Index r = 0; r < n; ++r) s[r] = step * dir[r];
    Eigen::VectorXd y = g_new - gx;
    if (s.dot(y) > 1e-300) {
      memory.emplace_back(std::move(s), std::move(y));
      if (static_cast<int>(memory.size()) > opt.memory) memory.pop_front();
    }
    u.swap(trial);
    gx.swap(g_new);
    J = J_new;
    report.iterations = k + 1;
    report.residual = gx.lpNorm<Eigen::Infinity>() / scale;
  }
  if (report.residual <= opt.tol) report.converged = true;
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return SolveResult{ScalarField(grid, std::move(u)), report};
}

}  // namespace plinf
