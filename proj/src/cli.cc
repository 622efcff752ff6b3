#include "formpc/cli.h"

#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "formpc/avoidance.h"
#include "formpc/errors.h"
#include "formpc/scenario.h"
#include "formpc/sim_harness.h"
#include "formpc/svg_plot.h"
#include "formpc/trajectory_io.h"

namespace formpc::cli {

namespace {

namespace fs = std::filesystem;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("out", "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw ConfigError("out", "failed writing '" + path.string() + "'");
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw ConfigError("out", "cannot create directory '" + dir.string() + "'");
  }
}

void write_plots(const TrajectoryLog& log, const fs::path& dir) {
  write_text(dir / "xy_trajectories.svg", xy_trajectories_svg(log));
  write_text(dir / "formation_error.svg", formation_error_svg(log));
}

std::vector<std::string> guard_warnings(const Scenario& sc) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < sc.obstacles.size(); ++i) {
    const GuardResult g = feasibility_guard(sc.obstacles[i], sc.limits.v_max, sc.dt);
    if (!g.ok) out.push_back(fmt::format("obstacles[{}]: {}", i, g.message));
  }
  return out;
}

std::string opt_str(const std::optional<double>& v) {
  return v ? fmt::format("{:.4f}", *v) : std::string("n/a");
}

struct RunArgs {
  std::string scenario;
  std::string out_dir = ".";
  std::string mode;
  std::optional<double> duration;
  bool plot = false;
  bool quiet = false;
};

int do_run(const RunArgs& a, std::ostream& out, std::ostream& err) {
  Scenario sc = load_scenario(a.scenario);
  if (!a.mode.empty()) sc.control_mode = control_mode_from_string(a.mode);
  if (a.duration) sc.duration = *a.duration;
  sc.validate();
  for (const auto& w : guard_warnings(sc)) err << "warning: " << w << '\n';

  const RunResult result = run_scenario(sc);
  const fs::path dir(a.out_dir);
  ensure_dir(dir);
  write_trajectory_csv(result.log, dir / "trajectory.csv");
  write_text(dir / "metrics.json", metrics_json(result.metrics));
  if (a.plot) write_plots(result.log, dir);

  const Metrics& m = result.metrics;
  if (!a.quiet) {
    for (const auto& d : result.diagnostics) err << "note: " << d << '\n';
    out << fmt::format("scenario: {} ({}, {} vehicles, {} samples)\n", sc.name,
                       to_string(sc.control_mode), sc.vehicle_count(), m.samples);
    out << fmt::format("formation rms: {:.4f} (final quarter {:.4f}, max {:.4f})\n",
                       m.formation_error_rms, m.formation_error_rms_final_quarter,
                       m.max_formation_error);
    out << fmt::format("min separation: {}  min obstacle clearance: {}\n",
                       opt_str(m.min_separation), opt_str(m.min_obstacle_clearance));
    out << fmt::format("solver: mean {:.1f} iterations, {} non-converged\n",
                       m.mean_solver_iterations, m.nonconverged_solves);
    out << fmt::format("violations: {}\n", m.violation_count);
  }
  return m.violation_count > 0 ? kViolations : kOk;
}

int do_validate(const std::string& path, std::ostream& out, std::ostream& err) {
  const Scenario sc = load_scenario(path);
  const auto warnings = guard_warnings(sc);
  for (const auto& w : warnings) err << "warning: " << w << '\n';
  out << fmt::format("{}: ok, {} warning{}\n", sc.name, warnings.size(),
                     warnings.size() == 1 ? "" : "s");
  return kOk;
}

int do_plot(const std::string& csv, const std::string& out_dir, std::ostream& out) {
  const TrajectoryLog log = read_trajectory_csv(fs::path(csv));
  const fs::path dir(out_dir);
  ensure_dir(dir);
  write_plots(log, dir);
  out << fmt::format("wrote {} and {}\n", (dir / "xy_trajectories.svg").string(),
                     (dir / "formation_error.svg").string());
  return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Formation-flight model predictive control toolkit", "formpc"};
  app.require_subcommand(1);

  RunArgs run_args;
  CLI::App* run = app.add_subcommand("run", "Simulate a scenario");
  run->add_option("scenario", run_args.scenario, "Scenario TOML file")->required();
  run->add_option("--out", run_args.out_dir, "Output directory");
  run->add_option("--mode", run_args.mode, "centralized or decentralized");
  run->add_option("--duration", run_args.duration, "Override the simulated time [s]");
  run->add_flag("--plot", run_args.plot, "Also write SVG plots");
  run->add_flag("--quiet", run_args.quiet, "Suppress the summary");

  std::string validate_path;
  CLI::App* validate = app.add_subcommand("validate", "Check a scenario file");
  validate->add_option("scenario", validate_path, "Scenario TOML file")->required();

  std::string csv_path;
  std::string plot_dir = ".";
  CLI::App* plot = app.add_subcommand("plot", "Redraw plots from a trajectory CSV");
  plot->add_option("csv", csv_path, "trajectory.csv from a previous run")->required();
  plot->add_option("--out", plot_dir, "Output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    if (run->parsed()) return do_run(run_args, out, err);
    if (validate->parsed()) return do_validate(validate_path, out, err);
    return do_plot(csv_path, plot_dir, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const SolverError& e) {
    err << "solver error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kConfigError;
  }
}

}  // namespace formpc::cli
