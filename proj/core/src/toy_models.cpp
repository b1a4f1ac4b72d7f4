#include "madapt/toy_models.hpp"

#include <algorithm>
#include <cmath>

namespace madapt {

ScalarAdvection::ScalarAdvection(double speed) : speed_(speed), P_(Mat::Identity(1, 1)) {}

LinearRelaxation::LinearRelaxation(double a1, double a2, double eps)
    : a1_(a1), a2_(a2), eps_(eps), P_(Mat::Ones(1, 2)) {
  if (!(eps > 0.0)) throw ConfigError("relaxation time eps must be positive");
}

Vec LinearRelaxation::flux(const Vec& U) const { return Vec{{a1_ * U[0], a2_ * U[1]}}; }

Vec LinearRelaxation::source(const Vec& U) const {
  const double d = U[1] - U[0];
  return Vec{{d, -d}};
}

double LinearRelaxation::entropy_flux(const Vec& U) const {
  return 0.5 * (a1_ * U[0] * U[0] + a2_ * U[1] * U[1]);
}

Vec LinearRelaxation::maxwellian(const Vec& u, const Vec*) const {
  return Vec{{0.5 * u[0], 0.5 * u[0]}};
}

double LinearRelaxation::max_wave_speed(const Vec&) const {
  return std::max(std::abs(a1_), std::abs(a2_));
}

double LinearRelaxation::simple_max_wave_speed(const Vec&) const {
  return std::abs(0.5 * (a1_ + a2_));
}

Mat LinearRelaxation::flux_jacobian(const Vec&) const {
  Mat J = Mat::Zero(2, 2);
  J(0, 0) = a1_;
  J(1, 1) = a2_;
  return J;
}

Mat LinearRelaxation::source_jacobian(const Vec&) const {
  Mat J(2, 2);
  J << -1.0, 1.0, 1.0, -1.0;
  return J;
}

Mat LinearRelaxation::maxwellian_jacobian(const Vec&) const { return Mat::Constant(2, 1, 0.5); }

Vec LinearRelaxation::state_scale(const Vec& U) const {
  const double s = std::max(1.0, U.cwiseAbs().maxCoeff());
  return Vec::Constant(U.size(), s);
}

Vec LinearRelaxation::simple_state_scale(const Vec& u) const {
  return Vec::Constant(u.size(), std::max(1.0, std::abs(u[0])));
}

}  // namespace madapt
