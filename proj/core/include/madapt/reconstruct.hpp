#pragma once

// Space-time reconstructions of the DG solution and the residuals of the
// perturbed systems they satisfy.

#include "madapt/dg_field.hpp"
#include "madapt/hierarchy.hpp"

#include <array>
#include <iosfwd>
#include <vector>

namespace madapt {

/// Degree-3 polynomial on one cell; d[j] multiplies basis::phi(j).
struct CubicPoly {
  std::array<Vec, 4> d;

  Vec value(double xi) const;
  /// d/dxi.
  Vec dxi(double xi) const;
};

/// Per cell: the cubic with the first two moments of the DG polynomial and the
/// prescribed face values. Inside a subdomain a face value is the mean of the two
/// traces; at a model interface or a non-periodic boundary each cell keeps its own trace.
std::vector<CubicPoly> reconstruct_space(const Mesh1D& mesh, const DGField& f);

/// Quadratic-in-time interpolant on [t0, t0 + dt] matching the end values and the end rate:
///   q(tau) = A + b tau + c tau^2,  b = 2(B - A) - dt D,  c = dt D - (B - A),  tau in [0, 1].
struct SlabReconstruction {
  double t0 = 0.0;
  double dt = 0.0;
  double h = 0.0;
  std::vector<Model> model;
  std::vector<CubicPoly> start, end, end_rate;

  int size() const { return static_cast<int>(model.size()); }
  Vec value(int i, double xi, double tau) const;
  /// Physical d/dx.
  Vec dx(int i, double xi, double tau) const;
  /// Physical d/dt.
  Vec dt_value(int i, double xi, double tau) const;

  struct Point {
    Vec value, dx, dt;
  };
  /// value, dx and dt_value in one pass.
  Point eval(int i, double xi, double tau) const;
};

/// Builds the slab from the solutions at both ends and the semi-discrete rate at the end.
/// All three fields must share one model map.
SlabReconstruction reconstruct_time(const Mesh1D& mesh, const DGField& U_start,
                                    const DGField& U_end, const DGField& rate_end, double t0,
                                    double dt);
SlabReconstruction reconstruct_time(std::vector<CubicPoly> start, std::vector<CubicPoly> end,
                                    std::vector<CubicPoly> end_rate, std::vector<Model> model,
                                    double t0, double dt, double h);

/// Tensor Gauss points of a cell-slab: 3 in space times 2 in time. Weights sum to 1,
/// so weighted sums are slab averages.
struct SlabPoint {
  double xi;
  double tau;
  double weight;
};
inline constexpr int kSlabPoints = 6;
const std::array<SlabPoint, kSlabPoints>& slab_points();

struct ComplexResidual {
  Vec U;
  Vec dxU;
  Vec source;  // R(U)
  Vec R_c;
};

struct SimpleResidual {
  Vec u;
  Vec lifted;     // M(u)
  Vec dx_lifted;  // dM d_x u
  Vec r_s;
  Vec R_s;
  Vec R_delta;
  Vec R_eps;
};

/// d_t U + dF(U) d_x U - R(U)/eps at one point.
Vec complex_residual_at(const ModelHierarchy& h, const Vec& U, const Vec& dxU, const Vec& dtU);

/// Residual parts of the simple system at one point:
///   r_s = d_t u + P dF(M) dM d_x u,  R_s = dM d_t u + dF(M) dM d_x u,
///   R_delta = dM r_s,  R_eps = R_s - R_delta.
SimpleResidual simple_residual_at(const ModelHierarchy& h, const Vec& u, const Vec& dxu,
                                  const Vec& dtu, const Vec* warm_start = nullptr);
SimpleResidual simple_residual_at(const ModelHierarchy& h, const Vec& u, const Vec& dxu,
                                  const Vec& dtu, MaxwellianMemo& memo);

/// Residual at every slab point of complex cell i. Throws PhysicsError on inadmissible values.
std::array<ComplexResidual, kSlabPoints> residual_complex(const ModelHierarchy& h,
                                                          const SlabReconstruction& r, int i);
/// Same for simple cell i. `memo` (optional) keeps one Maxwellian evaluation per slab point
/// across calls. Throws PhysicsError when the Maxwellian fails.
std::array<SimpleResidual, kSlabPoints> residual_simple(
    const ModelHierarchy& h, const SlabReconstruction& r, int i,
    std::array<MaxwellianMemo, kSlabPoints>* memo = nullptr);

/// Debug dump: one row per cell and slab point with the Euclidean norms of the residual parts.
void write_residual_csv(std::ostream& os, const ModelHierarchy& h, const Mesh1D& mesh,
                        const SlabReconstruction& r);

}  // namespace madapt
