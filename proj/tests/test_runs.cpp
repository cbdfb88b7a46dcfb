#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include "plinf/config.hpp"
#include "plinf/csv.hpp"
#include "plinf/runs.hpp"

using namespace plinf;
namespace fs = std::filesystem;

namespace {

RunConfig parse(const std::string& text, const fs::path& out) {
  std::istringstream in(text);
  RunConfig c = parse_config(in);
  c.out_dir = out.string();
  return c;
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("plinf_test_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), {}};
}

std::vector<std::vector<std::string>> rows_of(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  std::string line;
  while (std::getline(in, line)) rows.push_back(split(line, ','));
  return rows;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(std::numeric_limits<double>::infinity()) == "inf");
  CHECK(std::stod(format_number(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("analytic radial rates match the closed form") {
  const fs::path out = scratch("radial");
  const RunConfig c = parse("domain.kind = punctured_ball\nboundary.kind = radial\nsolver.p = 10, 20, 40, 80\n", out);
  std::ostringstream log;
  CHECK(run_command("rates", c, log) == kExitOk);
  const auto rows = rows_of(out / "rates.csv");
  REQUIRE(rows.size() >= 5);
  CHECK(rows[0] == std::vector<std::string>{"p", "epsilon", "sup_error", "bound_general", "bound_posgrad", "boundary_gap"});
  for (std::size_t i = 1; i <= 4; ++i) {
    const double p = std::stod(rows[i][0]);
    CHECK(std::abs(std::stod(rows[i][2]) - radial_exact_error(p, 2)) <= 1e-12);
  }
  const std::string text = slurp(out / "rates.csv");
  CHECK(text.find("#fit: exponent=") != std::string::npos);
  const std::string manifest = slurp(out / "manifest.txt");
  CHECK(manifest.find("command=rates") != std::string::npos);
  CHECK(manifest.find("config_hash=") != std::string::npos);
  CHECK(manifest.find("exit_code=0") != std::string::npos);
}

TEST_CASE("solve with affine expression data") {
  const fs::path out = scratch("affine");
  const RunConfig c = parse(
      "grid.h = 1/16\nsolver.epsilon = 3/16\nboundary.kind = expr\nboundary.expr = 0.5*x1 - 2*x2 + 1\n", out);
  std::ostringstream log;
  CHECK(run_command("solve", c, log) == kExitOk);
  const auto grid = rows_of(out / "grid.csv");
  const auto field = rows_of(out / "u_pinf.csv");
  CHECK(grid[0] == std::vector<std::string>{"node_id", "x1", "x2", "kind"});
  CHECK(field[0] == std::vector<std::string>{"node_id", "value"});
  std::map<std::string, std::pair<double, double>> where;
  for (std::size_t i = 1; i < grid.size(); ++i) where[grid[i][0]] = {std::stod(grid[i][1]), std::stod(grid[i][2])};
  int checked = 0;
  for (std::size_t i = 1; i < field.size(); ++i) {
    const auto it = where.find(field[i][0]);
    if (it == where.end() || field[i].size() < 2 || field[i][1].empty()) continue;
    const auto [x, y] = it->second;
    CHECK(std::abs(std::stod(field[i][1]) - (0.5 * x - 2 * y + 1)) <= 1e-10);
    ++checked;
  }
  CHECK(checked == static_cast<int>(grid.size()) - 1);
  const auto runs = rows_of(out / "runs.csv");
  CHECK(runs[0].size() == 9);
  CHECK(runs[1][7] == "true");
}

TEST_CASE("exit codes") {
  std::ostringstream log;
  {
    const RunConfig c = parse("boundary.kind = aronsson\nrates.mode = analytic\n", scratch("cfgerr"));
    CHECK(run_command("rates", c, log) == kExitConfig);
  }
  {
    const RunConfig c = parse("grid.h = 1/32\nsolver.epsilon = 2/32\nsolver.max_iter = 2\n", scratch("noconv"));
    CHECK(run_command("solve", c, log) == kExitNonConvergence);
  }
  {
    RunConfig c = parse("", scratch("unknown"));
    CHECK(run_command("dance", c, log) == kExitConfig);
  }
  {
    const RunConfig c = parse("consistency.p = 3\nconsistency.bound_factor = 0\nconsistency.slack_factor = 0\n"
                              "domain.kind = annulus\nboundary.kind = radial\ngrid.h = 1/32\nsolver.epsilon = 4/32\n",
                              scratch("consistency_fail"));
    CHECK(run_command("consistency", c, log) == kExitVerification);
  }
}

TEST_CASE("verify suite passes on the default square") {
  const fs::path out = scratch("verify");
  const RunConfig c = parse("verify.trials = 8\n", out);
  std::ostringstream log;
  CHECK(run_command("verify", c, log) == kExitOk);
  const auto rows = rows_of(out / "verify.csv");
  CHECK(rows[0] == std::vector<std::string>{"property", "nodes_checked", "worst_margin", "status"});
  CHECK(rows.size() == 7);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i][3] == "pass");
}

TEST_CASE("numeric rates are reproducible across thread counts") {
  const std::string cfg =
      "grid.h = 1/16\nsolver.epsilon = 2/16\nsolver.p = 4, 8, 16\nrates.mode = numeric\nrates.alpha = 0.5\n";
  const fs::path a = scratch("num1");
  const fs::path b = scratch("num4");
  RunConfig ca = parse(cfg, a);
  RunConfig cb = parse(cfg, b);
  cb.threads = 4;
  std::ostringstream log;
  REQUIRE(run_command("rates", ca, log) == kExitOk);
  REQUIRE(run_command("rates", cb, log) == kExitOk);
  for (const char* f : {"rates.csv", "u_p4.csv", "u_p8.csv", "u_p16.csv", "u_pinf_eps0.125.csv"}) {
    CHECK(slurp(a / f) == slurp(b / f));
  }
  const auto ra = rows_of(a / "rates.csv");
  CHECK(std::stod(ra[1][2]) > std::stod(ra[3][2]));
}

TEST_CASE("plot output") {
  const fs::path out = scratch("plot");
  RunConfig c = parse("domain.kind = punctured_ball\nboundary.kind = radial\nsolver.p = 10, 20, 40\n", out);
  c.plot = true;
  std::ostringstream log;
  CHECK(example_radial(c, log) == kExitOk);
  const std::string svg = slurp(out / "rates.svg");
  CHECK(svg.rfind("<svg", 0) == 0);
  CHECK(svg.find("</svg>") != std::string::npos);
}
