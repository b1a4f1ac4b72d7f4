#pragma once

// Run configuration: an INI file with fixed sections. Every key is optional and
// unknown keys are rejected.
//
//   [mesh]     a, b, cells, periodic
//   [time]     t_final, cfl, source_sigma, dt_update_interval
//   [adapt]    mode, tau_r, tau_kappa, f_eps, min_patch, eps_over_nu (number or "auto"),
//              nu_samples_per_axis, nu_box_factor, lazy_indicators
//   [dg]       limiter, tvb_M, positivity_fallback
//   [thermo]   table (path, relative to the config file), cv_normalization (species|literal)
//   [initial]  type (shock_tube|constant), preset (default|literal), T, v,
//              p_inner, rho_O_inner, p_outer, rho_O_outer, inner_a, inner_b
//   [output]   dir, snapshots (comma list), slabs, plots, bound

#include "madapt/chem_o2.hpp"
#include "madapt/simulation.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace madapt {

enum class InitialKind { shock_tube, constant };

struct ShockTubeSetup {
  double T = 2000.0;
  double v = 0.0;
  double p_inner = 2e6;
  double rho_O_inner = 0.01;
  double p_outer = 1e6;
  double rho_O_outer = 0.005;
  /// Inner region (inner_a, inner_b); the domain default puts it in the middle of (0, 1).
  double inner_a = 0.25;
  double inner_b = 0.75;
};

struct RunConfig {
  Mesh1D mesh{0.0, 1.0, 320, true};
  double t_final = 4.375e-4;
  SimulationOptions sim;
  /// Negative: estimate nu on the shock-tube state box and use eps/nu = 1/nu.
  double eps_over_nu = -1.0;
  int nu_samples_per_axis = 5;
  double nu_box_factor = 1.5;
  std::filesystem::path thermo_table;  // empty: built-in defaults
  o2::CvNormalization cv_normalization = o2::CvNormalization::species_mass;
  InitialKind initial = InitialKind::shock_tube;
  std::string preset = "default";
  ShockTubeSetup shock;
  std::vector<double> snapshots;  // t_final is always written
  std::filesystem::path out_dir = "out";
  bool write_slabs = true;
  bool write_plots = true;
  bool write_bound = false;

  /// Throws ConfigError.
  void validate() const;
  /// Snapshot times in increasing order including t_final.
  std::vector<double> snapshot_times() const;
};

/// Defaults of the shock tube on (0, 1) with inner region (0.25, 0.75).
RunConfig default_shock_tube();
/// The same states on (-1, 1) with inner region |x| <= 0.5.
RunConfig literal_shock_tube();

/// Throws ConfigError with the offending section and key.
RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
/// Comma-separated list of times.
std::vector<double> parse_time_list(const std::string& s);
/// INI text that reproduces `c` when parsed.
void write_run_config(std::ostream& os, const RunConfig& c);

o2::ThermoTable thermo_table(const RunConfig& c);

/// Initial data of the configured case; throws ConfigError when the equilibrium states
/// cannot be built.
std::function<Vec(double)> initial_data(const o2::O2Hierarchy& h, const RunConfig& c);
/// The two plateau states (inner, outer) of the shock tube.
std::pair<Vec, Vec> shock_tube_states(const o2::O2Hierarchy& h, const ShockTubeSetup& s);

}  // namespace madapt
