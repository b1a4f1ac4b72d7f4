#pragma once

// Batch driver: builds the O2 hierarchy and initial data from a RunConfig, runs the
// time loop and writes snapshots, plots, slab records, the bound report and metadata.

#include "madapt/config.hpp"
#include "madapt/io.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace madapt {

/// Box of states around the two shock-tube plateaus used for nu and the Hessian constants.
ConvexStateSet shock_tube_box(const o2::O2Hierarchy& h, const RunConfig& c);

/// nu on the shock-tube box, sampled on the full tensor grid.
CoercivityEstimate estimate_nu(const o2::O2Hierarchy& h, const RunConfig& c);

struct RunSummary {
  double nu = 0.0;            // 0 when eps_over_nu was given explicitly
  double eps_over_nu = 0.0;
  long steps = 0;
  double wall_seconds = 0.0;
  double dt_first = 0.0;
  double dt_min = 0.0;
  double dt_max = 0.0;
  int max_switches = 0;
  std::vector<Snapshot> snapshots;
  std::vector<BoundReport> bounds;  // at the snapshot times, when requested
  IdentityCheck identities;
  std::string error;                // set when the run stopped on a physics failure
};

struct RunHooks {
  std::function<void(const Simulation&, const StepInfo&)> on_step;
  /// Simulation options applied on top of the config (identity checks etc.).
  std::function<void(SimulationOptions&)> adjust;
};

/// Runs the configuration. With `write_files`, artifacts go to c.out_dir (created).
/// PhysicsError is rethrown after the partial outputs and metadata are flushed.
RunSummary execute_run(const RunConfig& c, bool write_files, const RunHooks& hooks = {});

/// Hessian-type constants on the shock-tube box.
HessianConstants shock_tube_constants(const o2::O2Hierarchy& h, const RunConfig& c,
                                      int directions = 16);

/// Spectral norm of the projection.
double projection_norm(const ModelHierarchy& h);

void write_slab_csv(std::ostream& os, const std::vector<SlabRecord>& slabs);

}  // namespace madapt
