#pragma once

// A posteriori bound for the heterogeneous solution:
//
//   int_c |U - U^|^2 + int_s |U - M(u^)|^2
//     <= (I + D_c + D_s + M_s) / C_H_lower * exp(max(G_c, G_s) t / C_H_lower),
//
// assembled from per-slab residual integrals and sup-norms recorded during a run.

#include "madapt/dg_field.hpp"
#include "madapt/hierarchy.hpp"
#include "madapt/reconstruct.hpp"

#include <functional>
#include <iosfwd>
#include <vector>

namespace madapt {

/// Sup-norms are taken over the slab quadrature points and inflated by this factor.
inline constexpr double kSupInflation = 1.05;

/// Contributions of one time slab. The integrals are already multiplied by h dt.
struct SlabRecord {
  double t0 = 0.0;
  double dt = 0.0;
  double D_c = 0.0;       // 1/2 int |Hess H(U^) R_c|^2
  double D_s = 0.0;       // 1/2 int |Hess H(M(u^)) R_delta|^2
  double M_s_raw = 0.0;   // int |Hess H(M(u^)) R_eps|^2, without eps/nu
  double sup_dxU = 0.0;
  double sup_source = 0.0;      // |R(U^)| / eps
  double sup_source_jac = 0.0;  // Frobenius norm of dR(U^) / eps
  double sup_dx_lifted = 0.0;   // |d_x M(u^)|
  double sup_R_eps = 0.0;
  /// max |U^ - M(u^)| over model-interface faces at the slab end.
  double interface_violation = 0.0;
  bool has_complex = false;
  bool has_simple = false;
};

/// Sums the contributions of the cells of one slab.
class SlabAccumulator {
 public:
  SlabAccumulator(double t0, double dt, double h);

  void add_complex(const ModelHierarchy& hier, const std::array<ComplexResidual, kSlabPoints>& r);
  void add_simple(const ModelHierarchy& hier, const std::array<SimpleResidual, kSlabPoints>& r);
  void add_interface(double violation);
  const SlabRecord& record() const { return rec_; }

 private:
  SlabRecord rec_;
  double h_;
};

struct EstimatorInputs {
  HessianConstants constants;
  double eps_over_nu = 1.0;
  double nu = 0.0;
  /// Spectral norm of P.
  double P_norm = 1.0;
  /// Initial relative entropy against the exact initial data.
  double I = 0.0;
  std::vector<SlabRecord> slabs;
};

struct BoundReport {
  double t = 0.0;
  double I = 0.0;
  double D_c = 0.0;
  double D_s = 0.0;
  double M_s = 0.0;  // with eps/nu
  double G_c = 0.0;
  double G_s = 0.0;
  double rhs = 0.0;
  double interface_violation = 0.0;
  HessianConstants constants;
  double nu = 0.0;
};

/// Bound at time t from the slabs covering [0, t]. Throws std::runtime_error listing the
/// uncovered intervals when the slabs leave gaps.
BoundReport assemble_bound(const EstimatorInputs& in, double t);

/// int H(U0 | U^(0)) over complex cells plus int H(U0 | M(u^(0))) over simple cells, with
/// 5-point Gauss per cell; `recon` is the spatial reconstruction of the initial field.
double initial_relative_entropy(const ModelHierarchy& h, const Mesh1D& mesh,
                                const std::vector<Model>& model,
                                const std::vector<CubicPoly>& recon,
                                const std::function<Vec(double)>& U0);

/// Complex-representation value of a reconstruction at (cell, xi): simple cells are lifted.
Vec lifted_reconstruction(const ModelHierarchy& h, const std::vector<Model>& model,
                          const std::vector<CubicPoly>& recon, int i, double xi);

/// int |U^ - U_h|^2 over complex cells plus int |M(u^) - M(u_h)|^2 over simple cells.
double reconstruction_gap_sq(const ModelHierarchy& h, const Mesh1D& mesh, const DGField& f,
                             const std::vector<CubicPoly>& recon);

/// int |U_ref - lifted reconstruction|^2, quadrature on the reference mesh. `nested` is set
/// false when the reference cells do not subdivide the coarse cells.
double reference_error_sq(const ModelHierarchy& h, const Mesh1D& mesh,
                          const std::vector<Model>& model, const std::vector<CubicPoly>& recon,
                          const Mesh1D& ref_mesh, const DGField& ref, bool* nested = nullptr);

struct SplittingRow {
  double t = 0.0;
  double bound_sq = 0.0;      // rhs of the estimate (reconstruction error)
  double gap_sq = 0.0;        // computable reconstruction - numerics gap
  double combined_sq = 0.0;   // (sqrt(bound) + sqrt(gap))^2, bounds |U - U_h|^2
  double measured_sq = -1.0;  // against a reference run; negative when absent
  double measured_recon_sq = -1.0;
  bool interpolated = false;
};

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& rows);
void write_splitting_csv(std::ostream& os, const std::vector<SplittingRow>& rows);
/// Short human-readable summary of the last row.
void write_bound_summary(std::ostream& os, const std::vector<BoundReport>& rows);

}  // namespace madapt
