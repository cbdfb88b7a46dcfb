#ifndef PLINF_ENERGY_HPP_
#define PLINF_ENERGY_HPP_

#include "plinf/solvers.hpp"

namespace plinf {

/// Largest exponent accepted by the energy minimizer.
inline constexpr double kMaxEnergyExponent = 64.0;

/// Discrete p-energy sum_cells |grad_h u|^p h^d, where the cell gradient
/// is the forward difference from the lower corner and a cell counts when
/// any of its corners is interior. The largest cell gradient is factored
/// out before raising to the power p.
double p_energy(const ScalarField& u, double p);

/// Gradient of p_energy with respect to every node value (zero for nodes
/// outside all counted cells).
Eigen::VectorXd p_energy_gradient(const ScalarField& u, double p);

struct EnergyOptions {
  double tol = 1e-8;
  long max_iter = 20000;
  int memory = 10;
};

/// Minimizes p_energy over fields equal to g on boundary nodes. The
/// iteration runs L-BFGS on J = E^{1/p}, whose gradient stays bounded for
/// large p, and stops when max_i |dJ/du_i| / h^{d-1} <= tol.
///
/// Throws std::domain_error("use p_harmonious") for p > kMaxEnergyExponent
/// and SolverError when the line search cannot make progress.
SolveResult solve_p_energy(const GridPtr& grid, const BoundaryData& g, double p, const EnergyOptions& opt = {});

}  // namespace plinf

#endif  // PLINF_ENERGY_HPP_
