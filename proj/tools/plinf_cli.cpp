// Command-line front end: plinf <subcommand> [--config FILE] [--out DIR]
// [--threads N] [--plot]

#include <CLI11.hpp>

#include <iostream>
#include <sstream>
#include <string>

#include "plinf/config.hpp"
#include "plinf/runs.hpp"

int main(int argc, char** argv) {
  CLI::App app{"p-Laplace to infinity-Laplace convergence lab"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  int threads = 0;
  bool plot = false;

  const char* commands[][2] = {
      {"solve", "solve the Dirichlet problem for every configured p"},
      {"rates", "measure sup errors against p and fit the rate"},
      {"verify", "run the discrete property suites"},
      {"consistency", "check the envelope consistency bound on a sampled field"},
      {"example-radial", "closed-form rate table for the punctured ball"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "key=value configuration file");
    sub->add_option("--out", out_dir, "output directory (overrides output.dir)");
    sub->add_option("--threads", threads, "worker threads for Jacobi sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--plot", plot, "also write an SVG log-log plot");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : plinf::kExitConfig;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  plinf::RunConfig cfg;
  try {
    if (!config_path.empty()) {
      cfg = plinf::load_config(config_path);
    } else {
      std::istringstream empty;
      cfg = plinf::parse_config(empty);
    }
  } catch (const plinf::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return plinf::kExitConfig;
  }
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  if (threads > 0) cfg.threads = threads;
  if (plot) cfg.plot = true;

  std::cout.precision(17);
  return plinf::run_command(name, cfg, std::cout);
}
