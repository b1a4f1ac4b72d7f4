#pragma once

// Model adaptation: per-cell modelling-error indicators, the coarsening
// distance, the switching rule with safety factor and minimum patch size,
// and conversion of cell data between the two models.

#include "madapt/dg_field.hpp"
#include "madapt/hierarchy.hpp"
#include "madapt/reconstruct.hpp"

#include <array>
#include <limits>
#include <vector>

namespace madapt {

struct AdaptConfig {
  double tau_r = 0.16;       // indicator tolerance
  double tau_kappa = 0.0016;  // coarsening-distance tolerance
  double f_eps = 0.25;       // safety factor on the coarsening indicator
  double eps_over_nu = 1.0;
  int min_patch = 2;         // smallest admissible run of simple cells

  /// Throws ConfigError.
  void validate() const;
};

inline constexpr double kNotCoarsenable = std::numeric_limits<double>::infinity();

/// Per-cell model tag with the latest indicator values. `indicator` holds M_s in
/// simple cells and M_c in complex cells; `kappa` is only meaningful in complex cells.
struct ModelMap {
  std::vector<Model> theta;
  std::vector<double> indicator;
  std::vector<double> kappa;
  std::vector<int> switches;

  ModelMap() = default;
  ModelMap(int n, Model initial);
  int size() const { return static_cast<int>(theta.size()); }
  int simple_cells() const;
};

/// sqrt(eps/nu * slab average of |Hess H(lifted) r|^2) over the slab points.
double slab_indicator(const ModelHierarchy& h, const std::array<Vec, kSlabPoints>& lifted,
                      const std::array<Vec, kSlabPoints>& r, double eps_over_nu);

double indicator_Ms(const ModelHierarchy& h, const std::array<SimpleResidual, kSlabPoints>& res,
                    double eps_over_nu);

struct CoarseningResidual {
  Vec u_c;
  Vec lifted;
  Vec R_eps_c;
};

/// (I - dM P) dF(M) dM d_x u_c at one point.
CoarseningResidual coarsening_residual_at(const ModelHierarchy& h, const Vec& u_c,
                                          const Vec& dxu_c, const Vec* warm_start = nullptr);
CoarseningResidual coarsening_residual_at(const ModelHierarchy& h, const Vec& u_c,
                                          const Vec& dxu_c, MaxwellianMemo& memo);

/// Coarsening residual at the slab points of cell i of `projected`, the reconstruction of
/// the P-projected solution. Throws SolverError/DomainError when the Maxwellian fails.
std::array<CoarseningResidual, kSlabPoints> coarsening_residual(
    const ModelHierarchy& h, const SlabReconstruction& projected, int i,
    std::array<MaxwellianMemo, kSlabPoints>* memo = nullptr);

double indicator_Mc(const ModelHierarchy& h,
                    const std::array<CoarseningResidual, kSlabPoints>& res, double eps_over_nu);

/// sqrt(cell average of H(U | M(P U)) / dt), 3-point Gauss. kNotCoarsenable when the
/// Maxwellian fails. `memo` (optional) keeps one evaluation per Gauss node.
double coarsening_distance(const ModelHierarchy& h, const CellPoly& U, double dt,
                           std::array<MaxwellianMemo, basis::kQuad>* memo = nullptr);

/// Cellwise P-projection of the complex cells; simple cells are copied. Model tags are kept.
DGField project_to_simple(const ModelHierarchy& h, const DGField& f);

/// Three-branch switching rule.
std::vector<Model> algorithm1_update(const std::vector<Model>& theta,
                                     const std::vector<double>& indicator,
                                     const std::vector<double>& kappa, const AdaptConfig& cfg);

/// Reverts every maximal run of simple cells shorter than `min_patch` to complex. With
/// `periodic`, a run crossing the domain end counts once.
std::vector<Model> patch_postprocess(std::vector<Model> theta, int min_patch, bool periodic);

struct ConversionReport {
  int to_simple = 0;
  int to_complex = 0;
  /// Cells whose conversion failed and kept their previous model.
  std::vector<int> failed;
};

/// complex -> simple: P applied to every coefficient.
CellPoly convert_to_simple(const ModelHierarchy& h, const CellPoly& U);
/// simple -> complex: Maxwellian at the Gauss nodes, L2-projected to degree 2. P of the
/// result equals the input polynomial up to round-off.
CellPoly convert_to_complex(const ModelHierarchy& h, const CellPoly& u,
                            const std::array<Vec, basis::kQuad>* warm = nullptr);

/// Converts the cells of `f` whose model differs from `target`; updates f.model, the
/// switch counters and, on failure, reverts the target entry of that cell.
ConversionReport convert_models(const ModelHierarchy& h, DGField& f, std::vector<Model>& target,
                                std::vector<int>* switches = nullptr);

}  // namespace madapt
