// madapt: command-line front end.
//
//   madapt run --config FILE [--out DIR] [--mode M] [--snapshots t1,t2,...] [--bound]
//   madapt compare DIR_A DIR_B [--csv FILE]
//   madapt bound --config FILE [--out DIR]
//   madapt constants --config FILE
//
// Exit codes: 0 success, 2 configuration or input error, 3 physics/solver failure.

#include "madapt/run.hpp"

#include <CLI11.hpp>
#include <spdlog/spdlog.h>

#include <fstream>
#include <iostream>

namespace {

using namespace madapt;

constexpr int kConfigFailure = 2;
constexpr int kPhysicsFailure = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::string mode;
  std::string snapshots;
  bool bound = false;
};

RunConfig load(const Overrides& o) {
  RunConfig c = o.config.empty() ? default_shock_tube() : load_run_config(o.config);
  if (!o.out.empty()) c.out_dir = o.out;
  if (!o.mode.empty()) c.sim.mode = parse_run_mode(o.mode);
  if (!o.snapshots.empty()) c.snapshots = parse_time_list(o.snapshots);
  if (o.bound) c.write_bound = true;
  c.validate();
  return c;
}

void print_summary(const RunSummary& s, const RunConfig& c) {
  std::cout.precision(6);
  std::cout << "mode " << to_string(c.sim.mode) << ", " << c.mesh.cells << " cells, t = "
            << (s.snapshots.empty() ? 0.0 : s.snapshots.back().t) << "\n"
            << "steps " << s.steps << ", dt in [" << s.dt_min << ", " << s.dt_max << "], "
            << s.wall_seconds << " s\n"
            << "eps/nu " << s.eps_over_nu;
  if (s.nu > 0.0) std::cout << " (nu " << s.nu << ")";
  std::cout << "\nmax switches per cell " << s.max_switches << "\n";
  if (!s.snapshots.empty()) {
    const auto runs = simple_runs(s.snapshots.back().theta);
    std::cout << "simple runs at the end:";
    if (runs.empty()) std::cout << " none";
    for (const auto& [a, b] : runs) std::cout << " [" << a << ", " << b << "]";
    std::cout << "\n";
  }
  if (!s.bounds.empty()) write_bound_summary(std::cout, s.bounds);
  std::cout << "output in " << c.out_dir.string() << "\n";
}

template <typename F>
int guarded(F&& f) {
  try {
    return f();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const PhysicsError& e) {
    std::cerr << "physics failure: " << e.what() << "\n";
    return kPhysicsFailure;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kPhysicsFailure;
  } catch (const DomainError& e) {
    std::cerr << "physics failure: " << e.what() << "\n";
    return kPhysicsFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigFailure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-adaptive DG solver for the O2 dissociation balance law"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Progress messages");

  Overrides run_opt;
  auto* run = app.add_subcommand("run", "Run a configuration");
  run->add_option("--config", run_opt.config, "INI configuration")->check(CLI::ExistingFile);
  run->add_option("--out", run_opt.out, "Output directory");
  run->add_option("--mode", run_opt.mode, "adaptive, complex_only or simple_only");
  run->add_option("--snapshots", run_opt.snapshots, "Comma-separated snapshot times");
  run->add_flag("--bound", run_opt.bound, "Also write the error bound report");

  std::string dir_a, dir_b, csv;
  auto* compare = app.add_subcommand("compare", "Differences between two runs");
  compare->add_option("run_a", dir_a, "Run directory")->required();
  compare->add_option("run_b", dir_b, "Reference run directory")->required();
  compare->add_option("--csv", csv, "Write the norms to this file");

  Overrides bound_opt;
  auto* bound = app.add_subcommand("bound", "Run with the a posteriori bound report");
  bound->add_option("--config", bound_opt.config, "INI configuration")->check(CLI::ExistingFile);
  bound->add_option("--out", bound_opt.out, "Output directory");
  bound->add_option("--mode", bound_opt.mode, "adaptive, complex_only or simple_only");
  bound->add_option("--snapshots", bound_opt.snapshots, "Comma-separated snapshot times");

  std::string const_config;
  auto* constants = app.add_subcommand("constants", "Print nu and the Hessian constants");
  constants->add_option("--config", const_config, "INI configuration")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : kConfigFailure;
  }
  spdlog::set_level(verbose ? spdlog::level::info : spdlog::level::warn);

  if (*run) {
    return guarded([&] {
      const RunConfig c = load(run_opt);
      print_summary(execute_run(c, true), c);
      return 0;
    });
  }
  if (*bound) {
    bound_opt.bound = true;
    return guarded([&] {
      const RunConfig c = load(bound_opt);
      print_summary(execute_run(c, true), c);
      return 0;
    });
  }
  if (*compare) {
    return guarded([&] {
      const auto a = read_run_snapshots(dir_a);
      const auto r = compare_runs(a, read_run_snapshots(dir_b));
      write_compare_csv(std::cout, r, a.front().names);
      if (!csv.empty()) {
        std::ofstream out(csv);
        if (!out) throw std::runtime_error("cannot write " + csv);
        write_compare_csv(out, r, a.front().names);
      }
      return 0;
    });
  }
  if (*constants) {
    return guarded([&] {
      Overrides o;
      o.config = const_config;
      const RunConfig c = load(o);
      const o2::O2Hierarchy h(thermo_table(c));
      const auto nu = estimate_nu(h, c);
      const auto k = shock_tube_constants(h, c);
      const auto box = shock_tube_box(h, c);
      std::cout.precision(6);
      std::cout << "state box (" << box.grid_size() << " grid points)\n"
                << "  lower " << box.lower.transpose() << "\n"
                << "  upper " << box.upper.transpose() << "\n"
                << "nu        = " << nu.nu << " (" << nu.used << " samples)\n"
                << "C_H_lower = " << k.C_H_lower << "\n"
                << "C_H_upper = " << k.C_H_upper << "\n"
                << "C_F       = " << k.C_F << "\n"
                << "C_M       = " << k.C_M << "\n"
                << "|P|       = " << projection_norm(h) << "\n"
                << "skipped   = " << k.skipped << "\n";
      return 0;
    });
  }
  return 0;
}
