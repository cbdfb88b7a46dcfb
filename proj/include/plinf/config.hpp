#ifndef PLINF_CONFIG_HPP_
#define PLINF_CONFIG_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "plinf/solvers.hpp"

namespace plinf {

/// Invalid or unknown configuration entry; `key()` names it.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : std::runtime_error(key.empty() ? what : key + ": " + what), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct DomainSpec {
  std::string kind = "box";  // box | annulus | punctured_ball | mask
  int dim = 2;
  double lower = -1.0;
  double upper = 1.0;
  double inner_radius = 0.25;
  double outer_radius = 1.0;
  std::string mask_file;
};

struct BoundarySpec {
  std::string kind = "aronsson";  // affine | cone | radial | aronsson | expr | file
  std::vector<double> coeffs;     // affine gradient
  double offset = 0.0;
  std::vector<double> apex;       // cone apex
  double slope = 1.0;
  double exponent = 1.0;
  std::string expr;
  std::string file;
};

struct SolverSpec {
  std::string kind = "p_harmonious";  // p_harmonious | energy
  /// Absent means "auto": optimal_epsilon for each p.
  std::optional<double> eps;
  std::vector<double> ps{std::numeric_limits<double>::infinity()};
  double tol = 1e-8;
  long max_iter = 1000000;
  std::string sweep = "jacobi";
};

struct RatesSpec {
  std::string mode = "analytic";  // analytic | numeric
  std::optional<double> alpha;    // default 1 - d/p (analytic radial: beta)
  std::optional<double> holder;   // H; measured when absent
  std::optional<double> lip_uinf;
  std::optional<double> sup_uinf;
  std::optional<double> diam;
  std::optional<double> gamma;
  bool bounds = true;
};

struct VerifySpec {
  int size = 33;
  int trials = 20;
  int eps_cells = 4;
};

struct ConsistencySpec {
  double p = 3.0;
  double alpha = 0.5;
  std::optional<double> seminorm;
  double bound_factor = 1.1;
  double slack_factor = 8.0;
};

struct RunConfig {
  DomainSpec domain;
  double h = 1.0 / 32.0;
  BoundarySpec boundary;
  SolverSpec solver;
  RatesSpec rates;
  VerifySpec verify;
  ConsistencySpec consistency;
  std::string out_dir = "out";
  bool plot = false;
  int threads = 1;
  std::uint64_t seed = 7;

  /// Entries exactly as read, in key order; used for hashing.
  std::map<std::string, std::string> entries;
};

/// Parses `key=value` lines; `#` starts a comment. Unknown keys, repeated
/// keys and malformed values throw ConfigError naming the key.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// Stable hash of the entries (FNV-1a over `key=value\n` in key order).
std::uint64_t config_hash(const RunConfig& cfg);

/// The domain box: the cube [lower, upper]^d.
Box domain_box(const RunConfig& cfg);
/// Point predicate of the configured domain.
PointPredicate domain_predicate(const RunConfig& cfg);

/// Boundary function for exponent p (radial data depend on p).
std::function<double(const Point&)> boundary_function(const RunConfig& cfg, double p);

/// Boundary data on `grid`; file data are read as a field CSV over it.
BoundaryData make_boundary(const RunConfig& cfg, const GridPtr& grid, double p);

/// Parses a real number, "inf", or a constant arithmetic expression such as 1/64.
double parse_real(const std::string& key, const std::string& text);
std::vector<double> parse_real_list(const std::string& key, const std::string& text);

}  // namespace plinf

#endif  // PLINF_CONFIG_HPP_
