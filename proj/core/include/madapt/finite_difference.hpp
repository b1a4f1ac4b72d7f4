#pragma once

#include "madapt/types.hpp"

#include <cmath>
#include <limits>

namespace madapt::fd {

/// Central-difference step for component k of x; `scale` guards components near zero.
inline double step(double x, double scale, double rel) {
  return rel * std::max(std::abs(x), scale);
}

inline double default_rel_first() { return std::cbrt(std::numeric_limits<double>::epsilon()); }

/// Gradient of a scalar function by central differences.
template <class Fn>
Vec gradient(Fn&& f, const Vec& x, const Vec& scale, double rel = default_rel_first()) {
  Vec g(x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step(x[k], scale[k], rel);
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    g[k] = (f(xp) - f(xm)) / (xp[k] - xm[k]);
  }
  return g;
}

/// Jacobian d f_i / d x_j of a vector function by central differences.
template <class Fn>
Mat jacobian(Fn&& f, const Vec& x, const Vec& scale, double rel = default_rel_first()) {
  const Vec f0 = f(x);
  Mat J(f0.size(), x.size());
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double h = step(x[k], scale[k], rel);
    Vec xp = x, xm = x;
    xp[k] += h;
    xm[k] -= h;
    J.col(k) = (f(xp) - f(xm)) / (xp[k] - xm[k]);
  }
  return J;
}

/// Hessian of a scalar function from second-order central differences.
template <class Fn>
Mat hessian(Fn&& f, const Vec& x, const Vec& scale, double rel = 1e-4) {
  const Eigen::Index n = x.size();
  Mat Hs(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = step(x[i], scale[i], rel);
    for (Eigen::Index j = i; j < n; ++j) {
      const double hj = step(x[j], scale[j], rel);
      auto at = [&](double si, double sj) {
        Vec y = x;
        y[i] += si * hi;
        y[j] += sj * hj;
        return f(y);
      };
      const double v = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      Hs(i, j) = v;
      Hs(j, i) = v;
    }
  }
  return Hs;
}

}  // namespace madapt::fd
