#ifndef PLINF_SOLVERS_HPP_
#define PLINF_SOLVERS_HPP_

#include <functional>
#include <stdexcept>
#include <string>

#include "plinf/field.hpp"

namespace plinf {

/// Dirichlet data on every non-interior node: the boundary nodes and,
/// for ball-based schemes, the collar outside the box.
struct BoundaryData {
  GridPtr grid;
  /// Node values; NaN on interior nodes.
  Eigen::VectorXd values;
  /// Built-in name, expression text or file path the values came from.
  std::string source;

  static BoundaryData sample(GridPtr grid, const std::function<double(const Point&)>& g,
                             std::string source = "function");
  double operator[](Index id) const { return values[id]; }
};

struct SolveReport {
  std::string solver;
  long iterations = 0;
  double residual = 0.0;
  bool converged = false;
  double seconds = 0.0;
};

enum class Sweep { jacobi, gauss_seidel };

struct SolverOptions {
  double tol = 1e-8;
  long max_iter = 1000000;
  Sweep sweep = Sweep::jacobi;
  /// Worker threads for Jacobi sweeps; Gauss-Seidel always runs on one.
  int threads = 1;
  /// Start from the discrete harmonic solution instead of zero.
  bool harmonic_start = true;
  long plateau_window = 10000;
  /// Minimum relative decrease of the update across one window.
  double plateau_decrease = 1e-2;
};

struct SolveResult {
  ScalarField u;
  SolveReport report;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weight of the midrange part of the p-harmonious map, (p-2)/(p+d); 1 for p = inf.
double midrange_weight(double p, int d);

/// Fixed point of u(x) = 1/2 (max_B u + min_B u) on interior nodes, with
/// u = g elsewhere. The grid collar must be at least eps wide.
SolveResult solve_inf_harmonic(const GridPtr& grid, const BoundaryData& g, double eps,
                               const SolverOptions& opt = {});

/// Fixed point of u = (a/2)(max_B u + min_B u) + (1 - a) mean_B u with
/// a = midrange_weight(p, d). p = inf dispatches to solve_inf_harmonic.
SolveResult solve_p_harmonious(const GridPtr& grid, const BoundaryData& g, double eps, double p,
                               const SolverOptions& opt = {});

/// map(u) - u on interior nodes whose ball lies in the domain of u.
ScalarField residual_field(const ScalarField& u, double eps, double p);

/// Solution of the ball-mean (p = 2) system, used as the starting iterate.
ScalarField harmonic_ball_mean(const GridPtr& grid, const BoundaryData& g, double eps);

/// Splits [0, n) into `threads` contiguous chunks and runs f(begin, end)
/// on each.
void parallel_for(Index n, int threads, const std::function<void(Index, Index)>& f);

}  // namespace plinf

#endif  // PLINF_SOLVERS_HPP_
