#pragma once

// Small hierarchies with closed-form structure, used by the verification
// cases and tests.

#include "madapt/hierarchy.hpp"

#include <cmath>

namespace madapt {

/// Linear advection d_t u + a d_x u = 0, viewed as a hierarchy with M = m = 1,
/// P = 1 and M(u) = u. Entropy u^2 / 2.
class ScalarAdvection final : public ModelHierarchy {
 public:
  explicit ScalarAdvection(double speed = 1.0);

  int complex_dim() const override { return 1; }
  int simple_dim() const override { return 1; }
  const Mat& projection() const override { return P_; }

  Vec flux(const Vec& U) const override { return speed_ * U; }
  Vec source(const Vec& U) const override { return Vec::Zero(U.size()); }
  double entropy(const Vec& U) const override { return 0.5 * U.squaredNorm(); }
  double entropy_flux(const Vec& U) const override { return 0.5 * speed_ * U.squaredNorm(); }
  using ModelHierarchy::maxwellian;
  Vec maxwellian(const Vec& u, const Vec*) const override { return u; }
  double max_wave_speed(const Vec&) const override { return std::abs(speed_); }
  double simple_max_wave_speed(const Vec&) const override { return std::abs(speed_); }

  Mat flux_jacobian(const Vec&) const override { return Mat::Constant(1, 1, speed_); }
  Vec entropy_gradient(const Vec& U) const override { return U; }
  Mat entropy_hessian(const Vec&) const override { return Mat::Identity(1, 1); }
  Mat source_jacobian(const Vec&) const override { return Mat::Zero(1, 1); }
  using ModelHierarchy::maxwellian_jacobian;
  Mat maxwellian_jacobian(const Vec&) const override { return Mat::Identity(1, 1); }

  double speed() const { return speed_; }

 private:
  double speed_;
  Mat P_;
};

/// Two advected populations exchanging mass:
///   d_t U + A d_x U = (1/eps) R(U),  A = diag(a1, a2),  R(U) = (u2 - u1, u1 - u2),
/// with P = [1 1], M(u) = (u/2, u/2), H = |U|^2/2 and Q = (a1 u1^2 + a2 u2^2)/2.
class LinearRelaxation final : public ModelHierarchy {
 public:
  LinearRelaxation(double a1, double a2, double eps);

  int complex_dim() const override { return 2; }
  int simple_dim() const override { return 1; }
  double epsilon() const override { return eps_; }
  const Mat& projection() const override { return P_; }

  Vec flux(const Vec& U) const override;
  Vec source(const Vec& U) const override;
  double entropy(const Vec& U) const override { return 0.5 * U.squaredNorm(); }
  double entropy_flux(const Vec& U) const override;
  using ModelHierarchy::maxwellian;
  Vec maxwellian(const Vec& u, const Vec*) const override;
  double max_wave_speed(const Vec&) const override;
  double simple_max_wave_speed(const Vec&) const override;

  Mat flux_jacobian(const Vec&) const override;
  Vec entropy_gradient(const Vec& U) const override { return U; }
  Mat entropy_hessian(const Vec&) const override { return Mat::Identity(2, 2); }
  Mat source_jacobian(const Vec&) const override;
  using ModelHierarchy::maxwellian_jacobian;
  Mat maxwellian_jacobian(const Vec&) const override;

  Vec state_scale(const Vec& U) const override;
  Vec simple_state_scale(const Vec& u) const override;

  double a1() const { return a1_; }
  double a2() const { return a2_; }

 private:
  double a1_, a2_, eps_;
  Mat P_;
};

}  // namespace madapt
