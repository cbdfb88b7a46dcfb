#include "plinf/field.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "plinf/csv.hpp"

namespace plinf {

namespace {
constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
}

ScalarField::ScalarField(GridPtr grid, double value)
    : grid_(grid), values_(Eigen::VectorXd::Constant(grid->node_count(), value)), domain_(grid, true) {}

ScalarField::ScalarField(GridPtr grid, Eigen::VectorXd values, NodeMask domain)
    : grid_(std::move(grid)), values_(std::move(values)), domain_(std::move(domain)) {
  if (values_.size() != grid_->node_count() || domain_.on.size() != grid_->node_count()) {
    throw std::invalid_argument("field size does not match grid node count");
  }
  for (Index i = 0; i < values_.size(); ++i) {
    if (!domain_.on[i]) {
      values_[i] = kUndefined;
    } else if (!std::isfinite(values_[i])) {
      throw std::domain_error("field value at node " + std::to_string(i) + " is not finite");
    }
  }
}

ScalarField::ScalarField(GridPtr grid, Eigen::VectorXd values)
    : ScalarField(grid, std::move(values), NodeMask(grid, true)) {}

ScalarField ScalarField::restricted(const NodeMask& mask) const {
  if (!is_subset(mask, domain_)) throw std::invalid_argument("restriction outside field domain");
  return ScalarField(grid_, values_, mask);
}

double ScalarField::sup_norm() const {
  double s = 0.0;
  for (Index i = 0; i < values_.size(); ++i) {
    if (domain_.on[i]) s = std::max(s, std::abs(values_[i]));
  }
  return s;
}

double ScalarField::max() const {
  double s = -std::numeric_limits<double>::infinity();
  for (Index i = 0; i < values_.size(); ++i) {
    if (domain_.on[i]) s = std::max(s, values_[i]);
  }
  return s;
}

double ScalarField::min() const {
  double s = std::numeric_limits<double>::infinity();
  for (Index i = 0; i < values_.size(); ++i) {
    if (domain_.on[i]) s = std::min(s, values_[i]);
  }
  return s;
}

ScalarField ScalarField::operator-() const {
  ScalarField r = *this;
  r.values_ = -values_;
  return r;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) {
  if (a.grid_ != b.grid_) throw std::invalid_argument("fields live on different grids");
  const NodeMask dom = a.domain_ && b.domain_;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(a.values_.size());
  for (Index i = 0; i < v.size(); ++i) {
    if (dom.on[i]) v[i] = a.values_[i] - b.values_[i];
  }
  return ScalarField(a.grid_, std::move(v), dom);
}

ScalarField operator+(const ScalarField& a, double c) {
  ScalarField r = a;
  r.values_.array() += c;
  return r;
}

ScalarField ring_distance(const GridPtr& grid, double eps) {
  const NodeMask inner = inner_parallel(grid, eps);
  const NodeMask core = inner_parallel(grid, 2.0 * eps);
  if (core.empty()) throw std::domain_error("ring_distance: Omega_2eps is empty");
  const std::vector<Index> ring = (inner - core).nodes();

  Eigen::MatrixXd rc(grid->dim(), static_cast<Index>(ring.size()));
  for (std::size_t j = 0; j < ring.size(); ++j) rc.col(static_cast<Index>(j)) = grid->coord(ring[j]);

  Eigen::VectorXd dist = Eigen::VectorXd::Zero(grid->node_count());
  for (Index id : core.nodes()) {
    dist[id] = std::sqrt((rc.colwise() - grid->coord(id)).colwise().squaredNorm().minCoeff());
  }
  return ScalarField(grid, std::move(dist), inner);
}

void write_field_csv(std::ostream& out, const ScalarField& u) {
  out << "node_id,value\n";
  for (Index i = 0; i < u.grid()->node_count(); ++i) {
    out << i << ',';
    if (u.defined(i)) out << format_number(u[i]);
    out << '\n';
  }
}

ScalarField read_field_csv(std::istream& in, GridPtr grid) {
  std::string line;
  if (!std::getline(in, line) || trim(line) != "node_id,value") {
    throw std::runtime_error("field CSV: expected header 'node_id,value'");
  }
  Eigen::VectorXd v = Eigen::VectorXd::Zero(grid->node_count());
  NodeMask dom(grid, false);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto parts = split(line, ',');
    if (parts.size() != 2) throw std::runtime_error("field CSV line " + std::to_string(lineno) + ": expected 2 columns");
    const long long id = std::stoll(parts[0]);
    if (id < 0 || id >= grid->node_count()) {
      throw std::runtime_error("field CSV line " + std::to_string(lineno) + ": node id out of range");
    }
    const auto value = trim(parts[1]);
    if (value.empty()) continue;
    v[id] = std::stod(std::string(value));
    dom.on[id] = true;
  }
  return ScalarField(grid, std::move(v), dom);
}

}  // namespace plinf
