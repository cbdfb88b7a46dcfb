#include "plinf/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <tuple>

#include "plinf/cones.hpp"
#include "plinf/csv.hpp"
#include "plinf/expr.hpp"

namespace plinf {

namespace {
std::string strip(std::string_view s) { return std::string(trim(s)); }
}  // namespace

double parse_real(const std::string& key, const std::string& raw) {
  const std::string text = strip(raw);
  if (text.empty()) throw ConfigError(key, "empty value");
  if (text == "inf" || text == "infinity" || text == "+inf") return std::numeric_limits<double>::infinity();
  std::size_t used = 0;
  try {
    const double v = std::stod(text, &used);
    if (used == text.size()) return v;
  } catch (const std::exception&) {
  }
  try {
    const BoundaryExpr e = BoundaryExpr::parse(text, 1);
    const double v = e(Point::Constant(1, std::numeric_limits<double>::quiet_NaN()));
    if (std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(key, "not a number: '" + text + "'");
}

std::vector<double> parse_real_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  for (const std::string& part : split(text, ',')) out.push_back(parse_real(key, part));
  if (out.empty()) throw ConfigError(key, "empty list");
  return out;
}

namespace {

long parse_integer(const std::string& key, const std::string& text) {
  const double v = parse_real(key, text);
  if (!std::isfinite(v) || v != std::floor(v)) throw ConfigError(key, "expected an integer");
  return static_cast<long>(v);
}

bool parse_flag(const std::string& key, const std::string& text) {
  const std::string t = strip(text);
  if (t == "true" || t == "1" || t == "yes" || t == "on") return true;
  if (t == "false" || t == "0" || t == "no" || t == "off") return false;
  throw ConfigError(key, "expected true or false");
}

std::optional<double> parse_auto(const std::string& key, const std::string& text) {
  if (strip(text) == "auto") return std::nullopt;
  return parse_real(key, text);
}

std::string one_of(const std::string& key, const std::string& text, std::initializer_list<const char*> allowed) {
  const std::string t = strip(text);
  for (const char* a : allowed) {
    if (t == a) return t;
  }
  std::string list;
  for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
  throw ConfigError(key, "'" + t + "' is not one of " + list);
}

using Setter = std::function<void(RunConfig&, const std::string&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"domain.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.domain.kind = one_of(k, v, {"box", "annulus", "punctured_ball", "mask"});
       }},
      {"domain.dim", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.domain.dim = static_cast<int>(parse_integer(k, v));
       }},
      {"domain.lower", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain.lower = parse_real(k, v); }},
      {"domain.upper", [](RunConfig& c, const std::string& k, const std::string& v) { c.domain.upper = parse_real(k, v); }},
      {"domain.inner_radius",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.domain.inner_radius = parse_real(k, v); }},
      {"domain.outer_radius",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.domain.outer_radius = parse_real(k, v); }},
      {"domain.mask_file", [](RunConfig& c, const std::string&, const std::string& v) { c.domain.mask_file = strip(v); }},
      {"grid.h", [](RunConfig& c, const std::string& k, const std::string& v) { c.h = parse_real(k, v); }},
      {"boundary.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.boundary.kind = one_of(k, v, {"affine", "cone", "radial", "aronsson", "expr", "file"});
       }},
      {"boundary.coeffs",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.boundary.coeffs = parse_real_list(k, v); }},
      {"boundary.offset", [](RunConfig& c, const std::string& k, const std::string& v) { c.boundary.offset = parse_real(k, v); }},
      {"boundary.apex", [](RunConfig& c, const std::string& k, const std::string& v) { c.boundary.apex = parse_real_list(k, v); }},
      {"boundary.slope", [](RunConfig& c, const std::string& k, const std::string& v) { c.boundary.slope = parse_real(k, v); }},
      {"boundary.exponent",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.boundary.exponent = parse_real(k, v); }},
      {"boundary.expr", [](RunConfig& c, const std::string&, const std::string& v) { c.boundary.expr = strip(v); }},
      {"boundary.file", [](RunConfig& c, const std::string&, const std::string& v) { c.boundary.file = strip(v); }},
      {"solver.kind", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.solver.kind = one_of(k, v, {"p_harmonious", "energy"});
       }},
      {"solver.epsilon", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.eps = parse_auto(k, v); }},
      {"solver.p", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.ps = parse_real_list(k, v); }},
      {"solver.tol", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.tol = parse_real(k, v); }},
      {"solver.max_iter", [](RunConfig& c, const std::string& k, const std::string& v) { c.solver.max_iter = parse_integer(k, v); }},
      {"solver.sweep", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.solver.sweep = one_of(k, v, {"jacobi", "gauss_seidel"});
       }},
      {"rates.mode", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.rates.mode = one_of(k, v, {"analytic", "numeric"});
       }},
      {"rates.alpha", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.alpha = parse_auto(k, v); }},
      {"rates.holder", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.holder = parse_auto(k, v); }},
      {"rates.lip_uinf", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.lip_uinf = parse_auto(k, v); }},
      {"rates.sup_uinf", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.sup_uinf = parse_auto(k, v); }},
      {"rates.diam", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.diam = parse_auto(k, v); }},
      {"rates.gamma", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.gamma = parse_auto(k, v); }},
      {"rates.bounds", [](RunConfig& c, const std::string& k, const std::string& v) { c.rates.bounds = parse_flag(k, v); }},
      {"verify.size", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.verify.size = static_cast<int>(parse_integer(k, v));
       }},
      {"verify.trials", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.verify.trials = static_cast<int>(parse_integer(k, v));
       }},
      {"verify.eps_cells", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.verify.eps_cells = static_cast<int>(parse_integer(k, v));
       }},
      {"consistency.p", [](RunConfig& c, const std::string& k, const std::string& v) { c.consistency.p = parse_real(k, v); }},
      {"consistency.alpha",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.consistency.alpha = parse_real(k, v); }},
      {"consistency.seminorm",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.consistency.seminorm = parse_auto(k, v); }},
      {"consistency.bound_factor",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.consistency.bound_factor = parse_real(k, v); }},
      {"consistency.slack_factor",
       [](RunConfig& c, const std::string& k, const std::string& v) { c.consistency.slack_factor = parse_real(k, v); }},
      {"output.dir", [](RunConfig& c, const std::string&, const std::string& v) { c.out_dir = strip(v); }},
      {"output.plot", [](RunConfig& c, const std::string& k, const std::string& v) { c.plot = parse_flag(k, v); }},
      {"threads", [](RunConfig& c, const std::string& k, const std::string& v) {
         c.threads = static_cast<int>(parse_integer(k, v));
       }},
      {"seed", [](RunConfig& c, const std::string& k, const std::string& v) {
         const long s = parse_integer(k, v);
         if (s < 0) throw ConfigError(k, "seed must be nonnegative");
         c.seed = static_cast<std::uint64_t>(s);
       }},
  };
  return table;
}

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw ConfigError(key, what);
}

void validate(const RunConfig& c) {
  const DomainSpec& d = c.domain;
  require(d.dim >= 1 && d.dim <= 4, "domain.dim", "dimension must lie in 1..4");
  require(std::isfinite(d.lower) && std::isfinite(d.upper) && d.lower < d.upper, "domain.lower",
          "need finite lower < upper");
  require(c.h > 0.0 && std::isfinite(c.h), "grid.h", "spacing must be positive");
  require(c.h < d.upper - d.lower, "grid.h", "spacing exceeds the box");
  if (d.kind == "annulus") {
    require(d.inner_radius >= 0.0 && d.inner_radius < d.outer_radius, "domain.inner_radius",
            "need 0 <= inner_radius < outer_radius");
  }
  if (d.kind == "annulus" || d.kind == "punctured_ball") {
    require(d.outer_radius > 0.0, "domain.outer_radius", "radius must be positive");
  }
  if (d.kind == "mask") require(!d.mask_file.empty(), "domain.mask_file", "required for domain.kind=mask");

  const BoundarySpec& b = c.boundary;
  if (b.kind == "affine") {
    require(static_cast<int>(b.coeffs.size()) == d.dim, "boundary.coeffs", "need one coefficient per dimension");
  } else if (b.kind == "cone") {
    require(static_cast<int>(b.apex.size()) == d.dim, "boundary.apex", "need one coordinate per dimension");
    require(b.slope >= 0.0, "boundary.slope", "slope must be nonnegative");
    require(b.exponent > 0.0 && b.exponent <= 1.0, "boundary.exponent", "exponent must lie in (0, 1]");
  } else if (b.kind == "aronsson") {
    require(d.dim == 2, "boundary.kind", "aronsson data need domain.dim=2");
  } else if (b.kind == "radial") {
    require(d.dim >= 2, "boundary.kind", "radial data need domain.dim >= 2");
  } else if (b.kind == "expr") {
    require(!b.expr.empty(), "boundary.expr", "required for boundary.kind=expr");
  } else if (b.kind == "file") {
    require(!b.file.empty(), "boundary.file", "required for boundary.kind=file");
  }

  const SolverSpec& s = c.solver;
  require(s.tol > 0.0, "solver.tol", "tolerance must be positive");
  require(s.max_iter > 0, "solver.max_iter", "must be positive");
  if (s.eps) require(*s.eps >= c.h, "solver.epsilon", "stencil too small: epsilon must be at least grid.h");
  std::set<double> seen;
  for (double p : s.ps) {
    require(seen.insert(p).second, "solver.p", "repeated exponent");
    if (s.kind == "energy") {
      require(std::isfinite(p) && p > d.dim && p <= 64.0, "solver.p", "energy solver needs dim < p <= 64");
    } else {
      require(p >= 2.0, "solver.p", "p-harmonious scheme needs p >= 2");
    }
    if (b.kind == "radial" && std::isfinite(p)) require(p > d.dim, "solver.p", "radial data need p > dim");
    if (!s.eps && std::isfinite(p)) require(p > d.dim, "solver.epsilon", "auto epsilon needs every p > dim");
  }
  if (c.rates.alpha) require(*c.rates.alpha > 0.0 && *c.rates.alpha <= 1.0, "rates.alpha", "must lie in (0, 1]");
  if (c.rates.gamma) require(*c.rates.gamma > 0.0, "rates.gamma", "must be positive");
  require(c.verify.size >= 9, "verify.size", "need at least 9 nodes per side");
  require(c.verify.trials >= 1, "verify.trials", "need at least one trial");
  require(c.verify.eps_cells >= 1, "verify.eps_cells", "must be positive");
  require(c.consistency.p > d.dim, "consistency.p", "need p > dim");
  require(c.consistency.alpha > 0.0 && c.consistency.alpha <= 1.0, "consistency.alpha", "must lie in (0, 1]");
  require(c.threads >= 1, "threads", "need at least one thread");

  if (b.kind == "expr") {
    try {
      const BoundaryExpr e = BoundaryExpr::parse(b.expr, d.dim);
      Box probe = domain_box(c);
      const double pad = s.eps ? *s.eps : 0.0;
      probe.lower.array() -= pad;
      probe.upper.array() += pad;
      e.check_total(probe);
    } catch (const std::exception& err) {
      throw ConfigError("boundary.expr", err.what());
    }
  }
}

}  // namespace

RunConfig parse_config(std::istream& in) {
  RunConfig cfg;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = strip(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("", "line " + std::to_string(number) + ": expected key=value");
    const std::string key = strip(line.substr(0, eq));
    const std::string value = strip(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError(key, "unknown key");
    if (!cfg.entries.emplace(key, value).second) throw ConfigError(key, "repeated key");
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open config file " + path);
  return parse_config(in);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::string canon;
  for (const auto& [k, v] : cfg.entries) canon += k + "=" + v + "\n";
  return fnv1a(canon);
}

Box domain_box(const RunConfig& cfg) { return Box::cube(cfg.domain.dim, cfg.domain.lower, cfg.domain.upper); }

PointPredicate domain_predicate(const RunConfig& cfg) {
  const DomainSpec d = cfg.domain;
  if (d.kind == "box") return [](const Point&) { return true; };
  if (d.kind == "annulus") {
    return [d](const Point& x) {
      const double r = x.norm();
      return r > d.inner_radius && r < d.outer_radius;
    };
  }
  if (d.kind == "punctured_ball") {
    return [d](const Point& x) {
      const double r = x.norm();
      return r > 0.0 && r < d.outer_radius;
    };
  }
  // Mask file: a grid CSV whose interior rows define the domain.
  std::ifstream in(d.mask_file);
  if (!in) throw ConfigError("domain.mask_file", "cannot open " + d.mask_file);
  std::set<std::vector<long>> inside;
  std::string line;
  std::getline(in, line);
  const double h = cfg.h;
  while (std::getline(in, line)) {
    const std::vector<std::string> f = split(line, ',');
    if (static_cast<int>(f.size()) != d.dim + 2) throw ConfigError("domain.mask_file", "malformed row: " + line);
    if (strip(f.back()) != "interior") continue;
    std::vector<long> key;
    for (int k = 0; k < d.dim; ++k) {
      key.push_back(std::lround((parse_real("domain.mask_file", f[static_cast<std::size_t>(k + 1)]) - d.lower) / h));
    }
    inside.insert(key);
  }
  return [inside, d, h](const Point& x) {
    std::vector<long> key;
    for (int k = 0; k < d.dim; ++k) key.push_back(std::lround((x[k] - d.lower) / h));
    return inside.count(key) > 0;
  };
}

std::function<double(const Point&)> boundary_function(const RunConfig& cfg, double p) {
  const BoundarySpec b = cfg.boundary;
  const int dim = cfg.domain.dim;
  if (b.kind == "affine") {
    const Eigen::VectorXd a = Eigen::Map<const Eigen::VectorXd>(b.coeffs.data(), dim);
    return [a, off = b.offset](const Point& x) { return a.dot(x) + off; };
  }
  if (b.kind == "cone") {
    const Cone c(Eigen::Map<const Eigen::VectorXd>(b.apex.data(), dim), b.slope, b.offset, b.exponent);
    return [c](const Point& x) { return cone_eval(c, x); };
  }
  if (b.kind == "radial") {
    const RadialProblem<double> rp(dim, p);
    return [rp](const Point& x) { return radial_p_harmonic(rp, x); };
  }
  if (b.kind == "aronsson") {
    return [](const Point& x) { return aronsson<double>(x); };
  }
  if (b.kind == "expr") {
    const BoundaryExpr e = BoundaryExpr::parse(b.expr, dim);
    return [e](const Point& x) { return e(x); };
  }
  throw ConfigError("boundary.kind", "file data have no closed form");
}

BoundaryData make_boundary(const RunConfig& cfg, const GridPtr& grid, double p) {
  if (cfg.boundary.kind != "file") {
    try {
      return BoundaryData::sample(grid, boundary_function(cfg, p), cfg.boundary.kind);
    } catch (const std::domain_error& err) {
      throw ConfigError("boundary.kind", err.what());
    }
  }
  std::ifstream in(cfg.boundary.file);
  if (!in) throw ConfigError("boundary.file", "cannot open " + cfg.boundary.file);
  const ScalarField f = read_field_csv(in, grid);
  BoundaryData data{grid, f.values(), cfg.boundary.file};
  for (Index id = 0; id < grid->node_count(); ++id) {
    if (grid->is_interior(id)) data.values[id] = std::numeric_limits<double>::quiet_NaN();
  }
  return data;
}

}  // namespace plinf
