#pragma once

// Snapshots, plots and run comparison.

#include "madapt/simulation.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace madapt {

/// Cell data at one time. Means are in the complex representation: simple cells are lifted.
struct Snapshot {
  double t = 0.0;
  std::vector<std::string> names;  // component names
  std::vector<std::string> units;
  std::vector<double> x;           // cell centres
  std::vector<Vec> mean;
  std::vector<int> theta;
  std::vector<double> indicator;   // M_s on simple cells, M_c on complex cells
  std::vector<double> kappa;
  std::vector<double> source_norm;  // |R(U)|

  int size() const { return static_cast<int>(x.size()); }
  int dim() const { return static_cast<int>(names.size()); }
};

Snapshot make_snapshot(const Simulation& sim);

inline constexpr const char* kSnapshotSchema = "# madapt snapshot v1";

/// CSV: schema line, a "# t = ..." line, then a header with x, the M components,
/// theta, indicator, kappa and source_norm. Numbers are written with 17 significant digits.
void write_snapshot_csv(std::ostream& os, const Snapshot& s);
void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s);
/// Throws std::runtime_error with the path and line on malformed input.
Snapshot read_snapshot_csv(const std::filesystem::path& path);
Snapshot read_snapshot_csv(std::istream& is, const std::string& name = "<stream>");

/// Maximal runs [first, last] of theta == 0 cells, in index order.
std::vector<std::pair<int, int>> simple_runs(const std::vector<int>& theta);

/// Figure-style SVG: densities, pressure and temperature (when `h` provides them) and the
/// indicators on a log scale; simple-model runs are shaded as gray bands.
void write_snapshot_svg(std::ostream& os, const Snapshot& s, const ModelHierarchy* h = nullptr);
void write_snapshot_svg(const std::filesystem::path& path, const Snapshot& s,
                        const ModelHierarchy* h = nullptr);

struct SnapshotDiff {
  double t = 0.0;
  std::vector<double> L1, L2, Linf;  // per component
  std::vector<double> rel_L1;        // L1 / L1 norm of the second snapshot
  double max_rel_L1 = 0.0;
};

/// Norms of the difference of two snapshots on the same uniform mesh. Throws
/// std::runtime_error on a mesh or schema mismatch.
SnapshotDiff compare_snapshots(const Snapshot& a, const Snapshot& b);

struct CompareReport {
  std::vector<SnapshotDiff> rows;
};

/// Compares the snapshot files of two run directories time by time. Throws
/// std::runtime_error listing the times present in only one of them.
CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);
CompareReport compare_runs(const std::vector<Snapshot>& a, const std::vector<Snapshot>& b);
void write_compare_csv(std::ostream& os, const CompareReport& r,
                       const std::vector<std::string>& names);

/// Snapshot files of a run directory, sorted by time.
std::vector<Snapshot> read_run_snapshots(const std::filesystem::path& dir);
std::string snapshot_filename(int index);

}  // namespace madapt
