#ifndef PLINF_FIELD_HPP_
#define PLINF_FIELD_HPP_

#include <iosfwd>
#include <limits>

#include "plinf/grid.hpp"

namespace plinf {

/// Real values on the nodes of a grid together with the set of nodes on
/// which the values are defined. Operators that only make sense on an
/// inner parallel set leave every other node undefined.
class ScalarField {
 public:
  ScalarField() = default;
  /// Defined everywhere with constant value.
  ScalarField(GridPtr grid, double value);
  /// Defined on `domain`, with `values` read only there.
  ScalarField(GridPtr grid, Eigen::VectorXd values, NodeMask domain);
  /// Defined on every node.
  ScalarField(GridPtr grid, Eigen::VectorXd values);

  template <typename F>
  static ScalarField sample(GridPtr grid, F&& f) {
    Eigen::VectorXd v(grid->node_count());
    for (Index i = 0; i < v.size(); ++i) v[i] = f(Point(grid->coord(i)));
    return ScalarField(std::move(grid), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const NodeMask& domain() const { return domain_; }
  bool defined(Index i) const { return domain_.on[i]; }

  double operator[](Index i) const { return values_[i]; }
  double& operator[](Index i) { return values_[i]; }
  /// Raw storage; entries off the domain are NaN.
  const Eigen::VectorXd& values() const { return values_; }

  /// Restricts the domain; `mask` must be a subset of the current domain.
  ScalarField restricted(const NodeMask& mask) const;

  /// sup |u| over the domain.
  double sup_norm() const;
  double max() const;
  double min() const;

  ScalarField operator-() const;
  /// Pointwise difference on the intersection of both domains.
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator+(const ScalarField& a, double c);

 private:
  GridPtr grid_;
  Eigen::VectorXd values_;
  NodeMask domain_;
};

/// Per node of Omega_eps, Euclidean distance to the nearest node of the
/// ring Omega_eps \ Omega_2eps. Throws std::domain_error if Omega_2eps is
/// empty.
ScalarField ring_distance(const GridPtr& grid, double eps);

/// Field CSV: `node_id,value` for every node; undefined values are empty.
void write_field_csv(std::ostream& out, const ScalarField& u);
/// Reads `node_id,value` rows back onto `grid`; missing or empty values
/// leave the node undefined.
ScalarField read_field_csv(std::istream& in, GridPtr grid);

}  // namespace plinf

#endif  // PLINF_FIELD_HPP_
