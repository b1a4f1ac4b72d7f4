#pragma once

// Time loop of the model-adaptive scheme. Each step advances the DG solution
// with SSP-RK3, reconstructs the slab, evaluates the indicators of the active
// models, applies the switching rule and converts the switched cells.

#include "madapt/adapt.hpp"
#include "madapt/dg_solver.hpp"
#include "madapt/estimator.hpp"
#include "madapt/reconstruct.hpp"

#include <functional>
#include <string>
#include <vector>

namespace madapt {

enum class RunMode { adaptive, complex_only, simple_only };

std::string to_string(RunMode m);
/// Throws ConfigError on unknown names.
RunMode parse_run_mode(const std::string& s);

struct SimulationOptions {
  double cfl = 0.1;
  RunMode mode = RunMode::adaptive;
  AdaptConfig adapt;
  DGOptions dg;
  /// The step size is re-evaluated every this many steps and after any refinement.
  int dt_update_interval = 25;
  /// Store per-slab estimator records.
  bool record_slabs = true;
  /// Evaluate indicators in the non-adaptive modes too (for output only).
  bool indicators_always = false;
  /// Skip the coarsening residual of complex cells whose kappa already blocks coarsening.
  /// Their indicator is then reported as not coarsenable.
  bool lazy_indicators = false;
  /// Track the residual identities P R_eps = 0 and P R_s = r_s at every point.
  bool check_identities = false;
};

struct StepInfo {
  long step = 0;
  double t = 0.0;  // time after the step
  double dt = 0.0;
  int to_simple = 0;
  int to_complex = 0;
  int failed_conversions = 0;
};

struct IdentityCheck {
  double max_P_R_eps = 0.0;        // relative to the residual magnitude at the point
  double max_P_Rs_minus_rs = 0.0;  // same
  double max_split = 0.0;          // |R_delta + R_eps - R_s|, same
  long points = 0;
};

class Simulation {
 public:
  Simulation(const ModelHierarchy& h, const Mesh1D& mesh, std::function<Vec(double)> U0,
             SimulationOptions opt);

  double time() const { return t_; }
  long steps() const { return steps_; }
  const DGField& field() const { return U_; }
  const ModelMap& model_map() const { return map_; }
  const DGSolver& solver() const { return solver_; }
  const Mesh1D& mesh() const { return solver_.mesh(); }
  const ModelHierarchy& hierarchy() const { return *h_; }
  const SimulationOptions& options() const { return opt_; }
  const std::vector<SlabRecord>& slabs() const { return slabs_; }
  const IdentityCheck& identities() const { return ids_; }
  const TimeStepChoice& last_dt_choice() const { return dt_choice_; }
  /// int H(U0 | reconstruction at t = 0).
  double initial_relative_entropy() const { return I_; }

  /// Stable step size for the current field (CFL and source limits).
  double suggested_dt();
  /// One step of size dt including model adaptation.
  StepInfo step(double dt);
  /// Steps until t_end, shortening the last steps to land on it exactly.
  void advance_to(double t_end, const std::function<void(const StepInfo&)>& on_step = {});

  /// Spatial reconstruction of the current field.
  std::vector<CubicPoly> reconstruction() const;
  /// Mean of cell i in the complex representation (simple cells lifted by projection).
  Vec lifted_mean(int i) const;

 private:
  void evaluate_slab(const DGField& U_start, const DGField& rate_end, double t0, double dt,
                     std::vector<double>& indicator, std::vector<double>& kappa);

  const ModelHierarchy* h_;
  SimulationOptions opt_;
  DGSolver solver_;
  DGField U_;
  DGField rate_;  // L(U) under the current model map
  bool rate_valid_ = false;
  ModelMap map_;
  double t_ = 0.0;
  long steps_ = 0;
  double dt_cached_ = 0.0;
  long dt_age_ = 0;
  TimeStepChoice dt_choice_;
  std::vector<SlabRecord> slabs_;
  IdentityCheck ids_;
  double I_ = 0.0;
  std::vector<std::array<MaxwellianMemo, kSlabPoints>> warm_simple_, warm_coarse_;
  std::vector<std::array<MaxwellianMemo, basis::kQuad>> warm_kappa_;
};

}  // namespace madapt
