// Convergence-study driver.
//
//   dynbc run --problem linear_smooth --scheme lie --h auto:4 --tau coupled --out results
//
// Writes errors.csv, one plot-data file per error norm and summary.txt into
// the output directory. Exit code 0 when every grid point finished (blow-ups
// count as finished), 2 on hard errors.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dynbc/convergence.hpp"
#include "dynbc/error.hpp"
#include "dynbc/problems.hpp"
#include "dynbc/schemes.hpp"

namespace {

struct RunArgs {
  std::string problem;
  std::string config;
  std::string scheme;
  std::string h = "auto:4";
  std::string tau = "coupled";
  std::string out;
  std::optional<double> T;
  bool trace = false;
  bool cfl_report = false;
};

int run(const RunArgs& a) {
  using namespace dynbc;
  ProblemSpec spec = a.config.empty() ? builtin_problem(a.problem) : load_problem_config(a.config);
  if (a.T) {
    spec.T = *a.T;
    spec.validate();
  }
  const SchemeKind scheme = parse_scheme(a.scheme);
  const std::vector<double> hs = parse_h_list(a.h);
  const TauRule rule = TauRule::parse(a.tau);

  const std::filesystem::path out(a.out);
  std::filesystem::create_directories(out);
  ConvergenceOptions options;
  if (a.trace) options.trace_dir = out / "trace";

  const ConvergenceResult result = run_convergence(spec, scheme, hs, rule, options);

  {
    std::ofstream f(out / "errors.csv");
    if (!f) throw ResourceError("cannot write errors.csv");
    write_csv(f, result.records);
  }
  write_plot_data(out, result);
  {
    std::ofstream f(out / "summary.txt");
    if (!f) throw ResourceError("cannot write summary.txt");
    write_summary(f, result);
  }
  if (a.cfl_report) {
    std::ofstream f(out / "cfl.csv");
    if (!f) throw ResourceError("cannot write cfl.csv");
    f << CflReport::csv_header() << '\n';
    for (const auto& r : result.records) {
      if (r.failure.empty()) f << r.cfl.csv_row() << '\n';
    }
  }

  write_summary(std::cout, result);
  if (result.any_failure()) {
    for (const auto& r : result.records) {
      if (!r.failure.empty()) std::cerr << "h=" << r.h << " tau=" << r.tau << ": " << r.failure << '\n';
    }
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bulk-surface splitting schemes for dynamic boundary conditions"};
  app.require_subcommand(1);

  RunArgs args;
  auto* cmd = app.add_subcommand("run", "Run a (mesh size x step size) convergence grid");
  cmd->set_help_flag("--help", "Print this help message and exit");
  auto* problem = cmd->add_option("--problem", args.problem, "Builtin problem name");
  auto* config = cmd->add_option("--config", args.config, "JSON problem configuration file");
  problem->excludes(config);
  cmd->add_option("--scheme", args.scheme, "euler|lie|naive|strang")->required();
  cmd->add_option("--h", args.h, "Comma separated mesh sizes or auto:k")->capture_default_str();
  cmd->add_option("--tau", args.tau, "Comma separated step sizes or 'coupled'")->capture_default_str();
  cmd->add_option("--out", args.out, "Output directory")->required();
  cmd->add_option("--T", args.T, "Final time (overrides the problem default)");
  cmd->add_flag("--trace", args.trace, "Write a per-step trace CSV for every run");
  cmd->add_flag("--cfl-report", args.cfl_report, "Write cfl.csv with the CFL report of every run");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  if (args.problem.empty() && args.config.empty()) {
    std::cerr << "one of --problem or --config is required\n";
    return 2;
  }
  try {
    return run(args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
