#pragma once

// Two-level model hierarchy: a balance law
//
//   d_t U + d_x F(U) = (1/eps) R(U),       U in R^M,
//
// with strictly convex entropy pair (H, Q), a constant projection P (m x M)
// annihilating R, and a Maxwellian M(u) parameterising the equilibrium
// manifold, R(M(u)) = 0 and P M(u) = u. The induced conservation law is
// d_t u + d_x g(u) = 0 with g(u) = P F(M(u)).

#include "madapt/types.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace madapt {

class ModelHierarchy {
 public:
  virtual ~ModelHierarchy() = default;

  virtual int complex_dim() const = 0;
  virtual int simple_dim() const = 0;
  /// Stiffness scale multiplying the source as R/eps.
  virtual double epsilon() const { return 1.0; }
  virtual const Mat& projection() const = 0;

  virtual Vec flux(const Vec& U) const = 0;
  /// R(U), without the 1/eps factor.
  virtual Vec source(const Vec& U) const = 0;
  virtual double entropy(const Vec& U) const = 0;
  virtual double entropy_flux(const Vec& U) const = 0;
  /// Equilibrium state with P M(u) = u. `warm_start` is an optional nearby equilibrium state.
  virtual Vec maxwellian(const Vec& u, const Vec* warm_start) const = 0;
  Vec maxwellian(const Vec& u) const { return maxwellian(u, nullptr); }

  /// Largest |characteristic speed| of the balance law at U.
  virtual double max_wave_speed(const Vec& U) const = 0;
  /// Largest speed of the simple system at u; defaults to the frozen speed at M(u).
  virtual double simple_max_wave_speed(const Vec& u) const {
    return max_wave_speed(maxwellian(u));
  }

  virtual bool admissible(const Vec& U) const { return U.allFinite(); }
  virtual bool simple_admissible(const Vec& u) const { return u.allFinite(); }
  /// Throws DomainError naming the offending component when U is not admissible.
  virtual void require_admissible(const Vec& U) const;

  // Derivatives. The defaults use central differences of the functions
  // above; concrete hierarchies override them with closed forms.
  virtual Mat flux_jacobian(const Vec& U) const;
  virtual Vec entropy_gradient(const Vec& U) const;
  virtual Mat entropy_hessian(const Vec& U) const;
  virtual Mat source_jacobian(const Vec& U) const;
  virtual Mat maxwellian_jacobian(const Vec& u) const;
  /// Same, with the equilibrium state M(u) already known.
  virtual Mat maxwellian_jacobian(const Vec& u, const Vec& /*M*/) const {
    return maxwellian_jacobian(u);
  }

  /// Typical magnitude of each component near U; sets finite-difference steps and box widths.
  virtual Vec state_scale(const Vec& U) const;
  virtual Vec simple_state_scale(const Vec& u) const;

  /// Components that must stay strictly positive (partial densities).
  virtual bool component_positive(int /*k*/) const { return false; }

  virtual std::string component_name(int k) const { return "U" + std::to_string(k); }
  virtual std::string component_unit(int /*k*/) const { return "1"; }
  /// Named derived quantities (pressure, temperature, ...) for output.
  virtual std::vector<std::pair<std::string, double>> diagnostics(const Vec& /*U*/) const {
    return {};
  }
};

/// Last Maxwellian evaluation at one point. A bitwise-repeated input returns the stored
/// state; otherwise the stored state warm-starts the solve.
struct MaxwellianMemo {
  Vec u;
  Vec M;
  Mat dM;
  bool has_jacobian = false;

  const Vec& lift(const ModelHierarchy& h, const Vec& input);
  /// Jacobian at `input`, reusing the stored state when it belongs to the same input.
  const Mat& jacobian(const ModelHierarchy& h, const Vec& input);
};

/// Fully finite-difference derivatives of every hierarchy function; used to cross-check
/// closed forms.
namespace numeric {
Mat flux_jacobian(const ModelHierarchy& h, const Vec& U);
Vec entropy_gradient(const ModelHierarchy& h, const Vec& U);
Mat entropy_hessian(const ModelHierarchy& h, const Vec& U);
Mat source_jacobian(const ModelHierarchy& h, const Vec& U);
Mat maxwellian_jacobian(const ModelHierarchy& h, const Vec& u);
/// Hessian of the i-th flux component, from differences of the analytic Jacobian.
Mat flux_component_hessian(const ModelHierarchy& h, const Vec& U, int i);
/// Hessian of h_i = dH/dU_i, from differences of the analytic entropy Hessian.
Mat entropy_gradient_component_hessian(const ModelHierarchy& h, const Vec& U, int i);
/// Hessian (m x m) of the k-th component of the Maxwellian.
Mat maxwellian_component_hessian(const ModelHierarchy& h, const Vec& u, int k);
}  // namespace numeric

/// Box of admissible states.
struct ConvexStateSet {
  Vec lower;
  Vec upper;
  int samples_per_axis = 9;

  int dim() const { return static_cast<int>(lower.size()); }
  bool contains(const Vec& U) const;
  /// Validates finiteness and lower < upper.
  void validate() const;
  /// Tensor-grid point with the given flat index in [0, samples_per_axis^dim).
  Vec grid_point(std::int64_t flat_index) const;
  std::int64_t grid_size() const;

  /// Bounding box of `states` inflated by `factor` about its centre. Each half-width is
  /// at least (factor - 1) times |centre| (a quarter of the state scale for components centred
  /// at zero); positive components are floored at `density_floor`.
  static ConvexStateSet around(const ModelHierarchy& h, const std::vector<Vec>& states,
                               double factor, double density_floor, int samples_per_axis = 9);
};

struct HessianConstants {
  double C_H_lower = 0.0;
  double C_H_upper = 0.0;
  double C_F = 0.0;
  double C_M = 0.0;
  /// Grid samples that were inadmissible and skipped.
  std::int64_t skipped = 0;
};

/// H(U|V) = H(U) - H(V) - dH(V).(U - V).
double relative_entropy(const ModelHierarchy& h, const Vec& U, const Vec& V);
/// Q(U|V) = Q(U) - Q(V) - dH(V).(F(U) - F(V)).
double relative_entropy_flux(const ModelHierarchy& h, const Vec& U, const Vec& V);
/// D(U|V) = -(dH(U) - dH(V)).(R(U) - R(V)).
double relative_dissipation(const ModelHierarchy& h, const Vec& U, const Vec& V);

/// g(u) = P F(M(u)).
Vec simple_flux_g(const ModelHierarchy& h, const Vec& u);
/// (eta, q) = (H(M(u)), Q(M(u))).
std::pair<double, double> induced_entropy(const ModelHierarchy& h, const Vec& u);
/// Hessian of eta: dM^T Hess(H)(M(u)) dM.
Mat induced_entropy_hessian(const ModelHierarchy& h, const Vec& u);
/// Jacobian of g: P dF(M(u)) dM(u).
Mat simple_flux_jacobian(const ModelHierarchy& h, const Vec& u);

/// Residual |dQ - dH dF| / scale, all gradients by central differences with relative
/// step `rel` (0: the default cube root of machine epsilon).
double entropy_compatibility_residual(const ModelHierarchy& h, const Vec& U, double rel = 0.0);
/// Same for the induced pair (eta, q) and g.
double induced_compatibility_residual(const ModelHierarchy& h, const Vec& u, double rel = 0.0);

struct CoercivityEstimate {
  double nu = 0.0;
  Vec witness;          // sample attaining the minimum
  std::int64_t used = 0;  // off-manifold samples entering the minimum
};

/// nu = min D(U|M(PU)) / |U - M(PU)|^2 over the tensor grid of `set` (at most `samples`
/// points, evenly strided). Throws DomainError when no off-manifold sample exists or the
/// minimum is not positive.
CoercivityEstimate estimate_coercivity_nu(const ModelHierarchy& h, const ConvexStateSet& set,
                                          std::int64_t samples);
/// Same minimum over an explicit sample list.
CoercivityEstimate estimate_coercivity_nu(const ModelHierarchy& h, const std::vector<Vec>& samples);

/// Box-wide bounds of the Hessian-type constants, from tensor-grid samples and
/// `directions` fixed-seed random unit directions per sample.
HessianConstants compute_hessian_constants(const ModelHierarchy& h, const ConvexStateSet& set,
                                           int directions = 64, std::uint64_t seed = 20240611);

}  // namespace madapt
