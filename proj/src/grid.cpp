#include "plinf/grid.hpp"

#include <cmath>
#include <iostream>
#include <stdexcept>

#include "plinf/csv.hpp"

namespace plinf {

Box Box::cube(Index d, double lo, double hi) {
  return Box{Eigen::VectorXd::Constant(d, lo), Eigen::VectorXd::Constant(d, hi)};
}

namespace {

// Visits every multi-index of the cube [-r, r]^d in row-major order.
template <typename F>
void for_each_cube_offset(Index d, int r, F&& f) {
  Eigen::VectorXi o = Eigen::VectorXi::Constant(d, -r);
  while (true) {
    f(o);
    Index k = d - 1;
    while (k >= 0 && o[k] == r) {
      o[k] = -r;
      --k;
    }
    if (k < 0) return;
    ++o[k];
  }
}

}  // namespace

Eigen::VectorXi GridDomain::multi_index(Index id) const {
  Eigen::VectorXi mi(dim_);
  for (Index k = 0; k < dim_; ++k) {
    mi[k] = static_cast<int>(id / strides_[k]);
    id %= strides_[k];
  }
  return mi;
}

Index GridDomain::node_at(const Eigen::Ref<const Eigen::VectorXi>& mi) const {
  Index id = 0;
  for (Index k = 0; k < dim_; ++k) {
    if (mi[k] < 0 || mi[k] >= extents_[k]) return -1;
    id += mi[k] * strides_[k];
  }
  return id;
}

Index GridDomain::nearest_node(const Point& x) const {
  Eigen::VectorXi mi(dim_);
  for (Index k = 0; k < dim_; ++k) {
    mi[k] = static_cast<int>(std::lround((x[k] - box_.lower[k]) / h_)) + static_cast<int>(pad_);
  }
  return node_at(mi);
}

double GridDomain::diameter() const {
  double best = 0.0;
  for (std::size_t a = 0; a < boundary_.size(); ++a) {
    for (std::size_t b = a + 1; b < boundary_.size(); ++b) {
      best = std::max(best, (coords_.col(boundary_[a]) - coords_.col(boundary_[b])).squaredNorm());
    }
  }
  return std::sqrt(best);
}

GridPtr build_grid(const Box& box, double h, const PointPredicate& inside, double collar) {
  if (!(h > 0.0)) throw std::invalid_argument("grid spacing must be positive");
  const Index d = box.dim();
  if (d < 1 || box.upper.size() != d) throw std::invalid_argument("box dimension mismatch");
  if (!((box.upper - box.lower).array() > 0.0).all()) {
    throw std::invalid_argument("degenerate bounding box");
  }
  if (collar < 0.0) throw std::invalid_argument("collar must be nonnegative");

  auto grid = std::shared_ptr<GridDomain>(new GridDomain());
  GridDomain& g = *grid;
  g.dim_ = d;
  g.h_ = h;
  g.box_ = box;
  g.pad_ = static_cast<Index>(std::ceil(collar / h - 1e-9));

  // Box lattice indices 0..cells[k]; node 0 and node cells[k] are never interior.
  Eigen::VectorXi cells(d);
  for (Index k = 0; k < d; ++k) {
    cells[k] = static_cast<int>(std::floor((box.upper[k] - box.lower[k]) / h + 1e-9));
    if (cells[k] < 2) throw std::domain_error("degenerate domain");
  }
  g.extents_ = (cells.array() + 1 + 2 * static_cast<int>(g.pad_)).matrix();
  g.strides_.resize(d);
  Index n = 1;
  for (Index k = d - 1; k >= 0; --k) {
    g.strides_[k] = n;
    n *= g.extents_[k];
  }

  g.coords_.resize(d, n);
  g.kinds_.assign(static_cast<std::size_t>(n), NodeKind::exterior);
  for (Index id = 0; id < n; ++id) {
    const Eigen::VectorXi mi = g.multi_index(id);
    bool in_box = true;
    for (Index k = 0; k < d; ++k) {
      const int bi = mi[k] - static_cast<int>(g.pad_);
      g.coords_(k, id) = box.lower[k] + static_cast<double>(bi) * h;
      in_box = in_box && bi >= 1 && bi <= cells[k] - 1;
    }
    if (in_box && inside(Point(g.coords_.col(id)))) {
      g.kinds_[static_cast<std::size_t>(id)] = NodeKind::interior;
      g.interior_.push_back(id);
    }
  }
  if (g.interior_.empty()) throw std::domain_error("degenerate domain");

  const std::vector<Eigen::VectorXi> cube = cube_neighbors(d);
  for (Index id : g.interior_) {
    const Eigen::VectorXi mi = g.multi_index(id);
    for (const auto& o : cube) {
      const Index nb = g.node_at(mi + o);
      if (nb >= 0 && g.kinds_[static_cast<std::size_t>(nb)] == NodeKind::exterior) {
        g.kinds_[static_cast<std::size_t>(nb)] = NodeKind::boundary;
      }
    }
  }
  for (Index id = 0; id < n; ++id) {
    if (g.kinds_[static_cast<std::size_t>(id)] == NodeKind::boundary) g.boundary_.push_back(id);
  }

  Eigen::MatrixXd bcoords(d, static_cast<Index>(g.boundary_.size()));
  for (std::size_t j = 0; j < g.boundary_.size(); ++j) {
    bcoords.col(static_cast<Index>(j)) = g.coords_.col(g.boundary_[j]);
  }
  g.bdist_ = Eigen::VectorXd::Zero(n);
  for (Index id : g.interior_) {
    g.bdist_[id] = std::sqrt((bcoords.colwise() - g.coords_.col(id)).colwise().squaredNorm().minCoeff());
  }
  return grid;
}

NodeMask::NodeMask(GridPtr g, bool value)
    : grid(std::move(g)), on(Eigen::Array<bool, Eigen::Dynamic, 1>::Constant(grid->node_count(), value)) {}

std::vector<Index> NodeMask::nodes() const {
  std::vector<Index> ids;
  ids.reserve(static_cast<std::size_t>(count()));
  for (Index i = 0; i < on.size(); ++i) {
    if (on[i]) ids.push_back(i);
  }
  return ids;
}

NodeMask operator&&(const NodeMask& a, const NodeMask& b) {
  NodeMask m = a;
  m.on = a.on && b.on;
  return m;
}

NodeMask operator-(const NodeMask& a, const NodeMask& b) {
  NodeMask m = a;
  m.on = a.on && !b.on;
  return m;
}

bool is_subset(const NodeMask& a, const NodeMask& b) { return !(a.on && !b.on).any(); }

NodeMask inner_parallel(const GridPtr& grid, double eps) {
  if (eps < 0.0) throw std::invalid_argument("inner_parallel: eps must be nonnegative");
  NodeMask m(grid, false);
  for (Index id : grid->interior_nodes()) m.on[id] = grid->boundary_distance(id) > eps;
  return m;
}

NodeMask parallel_ring(const GridPtr& grid, double eps) {
  return inner_parallel(grid, eps) - inner_parallel(grid, 2.0 * eps);
}

BallStencil::BallStencil(Index dim, double h, double eps) : h_(h), eps_(eps) {
  if (dim < 1) throw std::invalid_argument("stencil dimension must be positive");
  if (!(h > 0.0)) throw std::invalid_argument("stencil spacing must be positive");
  if (eps < h) throw std::invalid_argument("stencil too small");
  // Accept |o| h == eps despite rounding in eps = k h.
  const double r2 = (eps / h) * (eps / h) * (1.0 + 1e-12);
  const int r = static_cast<int>(std::floor(eps / h * (1.0 + 1e-12)));
  std::vector<Eigen::VectorXi> kept;
  for_each_cube_offset(dim, r, [&](const Eigen::VectorXi& o) {
    if (static_cast<double>(o.squaredNorm()) <= r2) kept.push_back(o);
  });
  offsets_.resize(dim, static_cast<Index>(kept.size()));
  for (std::size_t k = 0; k < kept.size(); ++k) {
    offsets_.col(static_cast<Index>(k)) = kept[k];
    if (kept[k].isZero()) center_ = static_cast<Index>(k);
    reach_ = std::max(reach_, h * std::sqrt(static_cast<double>(kept[k].squaredNorm())));
  }
}

std::vector<Index> BallStencil::flat_offsets(const GridDomain& grid) const {
  std::vector<Index> flat(static_cast<std::size_t>(size()));
  for (Index k = 0; k < size(); ++k) {
    Index delta = 0;
    for (Index j = 0; j < dim(); ++j) delta += offsets_(j, k) * grid.strides()[j];
    flat[static_cast<std::size_t>(k)] = delta;
  }
  return flat;
}

BallStencil ball_stencil(Index dim, double h, double eps) {
  BallStencil s(dim, h, eps);
  if (eps < 3.0 * h) {
    std::cerr << "warning: ball stencil radius " << eps << " is below 3h (h = " << h
              << "); cone comparisons lose accuracy\n";
  }
  return s;
}

BallNeighbors ball_neighbors(const GridDomain& grid, const BallStencil& stencil,
                             const std::vector<Index>& nodes) {
  BallNeighbors nb;
  nb.nodes = nodes;
  nb.start.reserve(nodes.size() + 1);
  nb.ids.reserve(nodes.size() * static_cast<std::size_t>(stencil.size()));
  nb.start.push_back(0);
  for (Index id : nodes) {
    const Eigen::VectorXi mi = grid.multi_index(id);
    for (Index k = 0; k < stencil.size(); ++k) {
      const Index j = grid.node_at(mi + stencil.offset(k));
      if (j < 0) {
        nb.truncated = true;
        continue;
      }
      nb.ids.push_back(j);
    }
    nb.start.push_back(static_cast<Index>(nb.ids.size()));
  }
  return nb;
}

std::vector<Eigen::VectorXi> cube_neighbors(Index dim) {
  std::vector<Eigen::VectorXi> out;
  for_each_cube_offset(dim, 1, [&](const Eigen::VectorXi& o) {
    if (!o.isZero()) out.push_back(o);
  });
  return out;
}

void write_grid_csv(std::ostream& out, const GridDomain& grid) {
  out << "node_id";
  for (Index k = 0; k < grid.dim(); ++k) out << ",x" << (k + 1);
  out << ",kind\n";
  for (Index id = 0; id < grid.node_count(); ++id) {
    const NodeKind kind = grid.kind(id);
    if (kind == NodeKind::exterior) continue;
    out << id;
    for (Index k = 0; k < grid.dim(); ++k) out << ',' << format_number(grid.coord(id)[k]);
    out << ',' << (kind == NodeKind::interior ? "interior" : "boundary") << '\n';
  }
}

}  // namespace plinf
