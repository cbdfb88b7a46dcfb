#ifndef PLINF_GRID_HPP_
#define PLINF_GRID_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <memory>
#include <vector>

namespace plinf {

using Index = Eigen::Index;
using Point = Eigen::VectorXd;
using PointPredicate = std::function<bool(const Point&)>;

enum class NodeKind : unsigned char { interior, boundary, exterior };

/// Axis-aligned box [lower, upper] in R^d.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Index dim() const { return lower.size(); }
  static Box cube(Index d, double lo, double hi);
};

/// A uniform lattice over a box, optionally padded by a collar of exterior
/// nodes, with every node classified as interior, boundary or exterior.
///
/// Interior nodes lie strictly inside the box and satisfy the domain
/// predicate. Boundary nodes are non-interior nodes that share a lattice
/// cell corner (Chebyshev distance one) with an interior node. Everything
/// else, including the collar, is exterior and only ever carries data.
///
/// Node ids enumerate the padded lattice in row-major order (the last
/// coordinate varies fastest). Instances are immutable after construction.
class GridDomain {
 public:
  Index dim() const { return dim_; }
  double spacing() const { return h_; }
  const Box& box() const { return box_; }
  Index node_count() const { return coords_.cols(); }
  /// Number of collar layers added on each side of the box.
  Index collar_layers() const { return pad_; }
  /// Width of the collar in length units.
  double collar_width() const { return static_cast<double>(pad_) * h_; }

  const Eigen::VectorXi& extents() const { return extents_; }
  const Eigen::Matrix<Index, Eigen::Dynamic, 1>& strides() const { return strides_; }

  /// Coordinates of node `id` (column of a d x N matrix).
  auto coord(Index id) const { return coords_.col(id); }
  const Eigen::MatrixXd& coords() const { return coords_; }

  NodeKind kind(Index id) const { return kinds_[static_cast<std::size_t>(id)]; }
  bool is_interior(Index id) const { return kind(id) == NodeKind::interior; }

  const std::vector<Index>& interior_nodes() const { return interior_; }
  const std::vector<Index>& boundary_nodes() const { return boundary_; }

  /// Euclidean distance from an interior node to the nearest boundary node;
  /// zero for non-interior nodes.
  double boundary_distance(Index id) const { return bdist_[id]; }

  Eigen::VectorXi multi_index(Index id) const;
  /// Returns -1 when the multi-index falls outside the padded lattice.
  Index node_at(const Eigen::Ref<const Eigen::VectorXi>& mi) const;
  /// Lattice node closest to an arbitrary point, or -1 if outside the lattice.
  Index nearest_node(const Point& x) const;

  /// Largest distance between two nodes of the closed domain (interior plus
  /// boundary). Extreme points of the node set are boundary nodes, so only
  /// those are scanned.
  double diameter() const;

  friend std::shared_ptr<const GridDomain> build_grid(const Box&, double, const PointPredicate&,
                                                      double);

 private:
  GridDomain() = default;

  Index dim_ = 0;
  double h_ = 0.0;
  Box box_;
  Index pad_ = 0;
  Eigen::VectorXi extents_;
  Eigen::Matrix<Index, Eigen::Dynamic, 1> strides_;
  Eigen::MatrixXd coords_;
  std::vector<NodeKind> kinds_;
  std::vector<Index> interior_;
  std::vector<Index> boundary_;
  Eigen::VectorXd bdist_;
};

using GridPtr = std::shared_ptr<const GridDomain>;

/// Builds the lattice {lower + k h} over `box`, padded by enough layers to
/// cover `collar` length units outside the box.
///
/// Throws std::invalid_argument for h <= 0 or a degenerate box and
/// std::domain_error("degenerate domain") when no node is interior.
GridPtr build_grid(const Box& box, double h, const PointPredicate& inside, double collar = 0.0);

/// Boolean per node of a grid.
struct NodeMask {
  GridPtr grid;
  Eigen::Array<bool, Eigen::Dynamic, 1> on;

  NodeMask() = default;
  NodeMask(GridPtr g, bool value);

  Index count() const { return on.count(); }
  bool empty() const { return count() == 0; }
  bool operator[](Index i) const { return on[i]; }
  std::vector<Index> nodes() const;
};

NodeMask operator&&(const NodeMask& a, const NodeMask& b);
/// Set difference a \ b.
NodeMask operator-(const NodeMask& a, const NodeMask& b);
bool is_subset(const NodeMask& a, const NodeMask& b);

/// Interior nodes whose distance to every boundary node exceeds eps.
NodeMask inner_parallel(const GridPtr& grid, double eps);

/// The strip Omega_eps \ Omega_2eps.
NodeMask parallel_ring(const GridPtr& grid, double eps);

/// Integer offsets o with |o| h <= eps, in row-major order of the
/// enclosing cube [-R, R]^d.
class BallStencil {
 public:
  BallStencil(Index dim, double h, double eps);

  Index dim() const { return offsets_.rows(); }
  double spacing() const { return h_; }
  double radius() const { return eps_; }
  Index size() const { return offsets_.cols(); }
  /// d x K matrix, one offset per column.
  const Eigen::MatrixXi& offsets() const { return offsets_; }
  auto offset(Index k) const { return offsets_.col(k); }
  /// Position of the zero offset.
  Index center() const { return center_; }
  /// Largest |o| h over the stencil.
  double reach() const { return reach_; }

  /// Flat id deltas on a grid; valid for nodes whose whole ball lies on
  /// the lattice.
  std::vector<Index> flat_offsets(const GridDomain& grid) const;

 private:
  double h_;
  double eps_;
  double reach_ = 0.0;
  Index center_ = 0;
  Eigen::MatrixXi offsets_;
};

/// Throws std::invalid_argument("stencil too small") when eps < h.
BallStencil ball_stencil(Index dim, double h, double eps);

/// Neighbour lists of every node in `nodes` for the ball stencil, stored
/// CSR-style. Offsets leaving the padded lattice are dropped.
struct BallNeighbors {
  std::vector<Index> nodes;
  std::vector<Index> start;  // size nodes.size() + 1
  std::vector<Index> ids;
  bool truncated = false;

  std::size_t size() const { return nodes.size(); }
  std::size_t degree(std::size_t k) const {
    return static_cast<std::size_t>(start[k + 1] - start[k]);
  }
};

BallNeighbors ball_neighbors(const GridDomain& grid, const BallStencil& stencil,
                             const std::vector<Index>& nodes);

/// The 3^d - 1 nonzero offsets of {-1, 0, 1}^d, row-major.
std::vector<Eigen::VectorXi> cube_neighbors(Index dim);

/// Grid CSV: `node_id,x1,...,xd,kind` for interior and boundary nodes.
void write_grid_csv(std::ostream& out, const GridDomain& grid);

}  // namespace plinf

#endif  // PLINF_GRID_HPP_
