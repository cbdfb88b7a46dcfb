#ifndef PLINF_RUNS_HPP_
#define PLINF_RUNS_HPP_

#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "plinf/analysis.hpp"
#include "plinf/config.hpp"
#include "plinf/field.hpp"

namespace plinf {

enum ExitCode : int { kExitOk = 0, kExitConfig = 1, kExitVerification = 2, kExitNonConvergence = 3 };

// Subcommands. Each writes its artifacts plus manifest.txt into cfg.out_dir
// and returns an exit code; module errors propagate as exceptions.
int run_solve(const RunConfig& cfg, std::ostream& log);
int run_rates(const RunConfig& cfg, std::ostream& log);
int run_verify(const RunConfig& cfg, std::ostream& log);
int run_consistency(const RunConfig& cfg, std::ostream& log);
int example_radial(const RunConfig& cfg, std::ostream& log);

/// Dispatches by subcommand name and maps ConfigError to exit code 1.
int run_command(const std::string& name, const RunConfig& cfg, std::ostream& log);

/// Closed-form rows for the punctured-ball problem: error is the exact
/// radial error, epsilon the general optimal choice; bounds left empty
/// when their preconditions fail.
std::vector<RateRow> analytic_radial_rows(const std::vector<double>& ps, int d, const RatesSpec& spec);

/// Rate table CSV with `#fit:` footer lines (or a `#fit: unavailable=` line).
void write_rate_table(std::ostream& out, const std::vector<RateRow>& rows);

// Random inputs for the property suites.

/// Concave piecewise-linear start followed by `sweeps` midrange sweeps on
/// Omega_2eps with the ring held fixed. Monotonicity of the sweep keeps
/// every iterate an exact discrete supersolution. Defined on Omega_eps and
/// nonnegative.
ScalarField random_supersolution(const GridPtr& grid, double eps, std::mt19937_64& rng, int sweeps);

struct ComparisonTriple {
  ScalarField u;
  ScalarField v;
  double C = 0.0;
};

/// Convex u, concave v and C = max over Omega_2eps of -Lap u; nullopt when
/// the draw does not satisfy -Lap u <= C <= -Lap v.
std::optional<ComparisonTriple> random_comparison_triple(const GridPtr& grid, double eps, std::mt19937_64& rng);

struct PropertyLine {
  std::string name;
  Index nodes_checked = 0;
  double worst_margin = 0.0;
  bool passed = false;
};

std::vector<PropertyLine> verify_suite(const RunConfig& cfg);
void write_verify_report(std::ostream& out, const std::vector<PropertyLine>& lines);

}  // namespace plinf

#endif  // PLINF_RUNS_HPP_
