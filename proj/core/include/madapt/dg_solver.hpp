#pragma once

// Degree-2 RKDG discretisation of the heterogeneous system: complex cells
// advance the balance law, simple cells the equilibrium conservation law, and
// the two are coupled at model interfaces through the Maxwellian.

#include "madapt/dg_field.hpp"
#include "madapt/hierarchy.hpp"

#include <functional>
#include <utility>

namespace madapt {

/// 1/2 (F(UL) + F(UR)) - 1/2 lambda (UR - UL).
inline Vec llf_flux(const Vec& UL, const Vec& UR, const Vec& FL, const Vec& FR, double lambda) {
  return 0.5 * (FL + FR) - 0.5 * lambda * (UR - UL);
}

Vec llf_flux(const Vec& UL, const Vec& UR, const std::function<Vec(const Vec&)>& flux_fn,
             double lambda);

struct CouplingFlux {
  Vec complex_side;  // M-vector
  Vec simple_side;   // m-vector, P * complex_side
};

/// Interface flux between a complex trace U and a simple trace u. The simple trace is
/// lifted to M(u); `complex_on_left` orients the LLF flux.
CouplingFlux coupling_flux(const ModelHierarchy& h, const Vec& U_complex, const Vec& u_simple,
                           bool complex_on_left, const Vec* warm_start = nullptr);

struct DGOptions {
  double tvb_M = 0.0;
  bool limiter = true;
  /// Reduce to P0 where the limited polynomial leaves the admissible set.
  bool positivity_fallback = true;
  /// Safety factor applied to the analytic wave speed in the CFL rule.
  double speed_safety = 1.1;
  /// Source stability: dt <= sigma / spectral radius of dR/eps.
  double source_sigma = 0.5;
};

struct LimiterStats {
  long limited_cells = 0;
  long p0_fallbacks = 0;
};

struct TimeStepChoice {
  double dt = 0.0;
  double dt_cfl = 0.0;
  double dt_source = 0.0;
  double max_speed = 0.0;
  double source_radius = 0.0;
  bool source_cap_active = false;
};

class DGSolver {
 public:
  DGSolver(const ModelHierarchy& h, Mesh1D mesh, DGOptions opt = {});

  const ModelHierarchy& hierarchy() const { return *h_; }
  const Mesh1D& mesh() const { return mesh_; }
  const DGOptions& options() const { return opt_; }

  /// Field of the right model dimension in every cell, coefficients zero.
  DGField zero_like(const DGField& f) const;
  /// L2 projection of complex initial data; simple cells receive P U0.
  DGField project(const std::function<Vec(double)>& U0, const std::vector<Model>& model) const;

  /// Semi-discrete rate dc/dt of every cell.
  void rate(const DGField& f, DGField& out) const;
  /// Minmod limiter with admissibility fallback; cell means are never changed.
  LimiterStats limit(DGField& f) const;
  /// One Shu-Osher SSP-RK3 step, limiting after each stage. `rate_at_start`, if given,
  /// must equal rate(f) and saves one evaluation.
  void ssp_rk3_step(DGField& f, double dt, const DGField* rate_at_start = nullptr) const;

  double max_wave_speed(const DGField& f) const;
  /// Largest |eigenvalue| of dR/eps over complex cell means.
  double source_spectral_radius(const DGField& f) const;
  TimeStepChoice choose_dt(const DGField& f, double cfl) const;

  /// Complex-state value at reference point xi of cell i (simple cells are lifted).
  Vec lifted_value(const DGField& f, int i, double xi) const;
  /// Neighbour mean converted to the model of cell i.
  Vec neighbour_mean_as(const DGField& f, int i, int nb) const;

  /// Maxwellian memoized per (cell, point). Points 0..2 are Gauss nodes, 3 the left and
  /// 4 the right face, 5 the cell mean; any other slot disables caching.
  Vec lift(const Vec& u, int cell, int slot) const;

  long maxwellian_calls() const { return maxwellian_calls_; }

 private:
  bool point_admissible(const DGField& f, int i, const Vec& v) const;

  const ModelHierarchy* h_;
  Mesh1D mesh_;
  DGOptions opt_;
  mutable std::vector<MaxwellianMemo> warm_;
  mutable long maxwellian_calls_ = 0;
};

}  // namespace madapt
