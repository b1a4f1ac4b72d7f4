#pragma once

// Modal Legendre basis on the reference cell [-1, 1], orthonormal for the
// averaged inner product (1/2) int_{-1}^{1} f g dxi, so the zeroth coefficient
// of a cell polynomial is its mean.

#include <array>
#include <cmath>

namespace madapt::basis {

inline constexpr int kDofs = 3;
inline constexpr int kQuad = 3;

inline constexpr double kSqrt3 = 1.7320508075688772;
inline constexpr double kSqrt5 = 2.2360679774997898;
inline constexpr double kSqrt7 = 2.6457513110645907;

/// 3-point Gauss-Legendre on [-1, 1]; weights sum to 2.
inline constexpr std::array<double, kQuad> kNodes = {-0.77459666924148338, 0.0,
                                                     0.77459666924148338};
inline constexpr std::array<double, kQuad> kWeights = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};

/// 2-point Gauss-Legendre on [0, 1] for the time direction; weights sum to 1.
inline constexpr std::array<double, 2> kTimeNodes = {0.21132486540518713, 0.78867513459481287};
inline constexpr std::array<double, 2> kTimeWeights = {0.5, 0.5};

inline double phi(int j, double xi) {
  switch (j) {
    case 0: return 1.0;
    case 1: return kSqrt3 * xi;
    case 2: return 0.5 * kSqrt5 * (3.0 * xi * xi - 1.0);
    default: return 0.5 * kSqrt7 * (5.0 * xi * xi * xi - 3.0 * xi);
  }
}

/// d phi_j / d xi.
inline double dphi(int j, double xi) {
  switch (j) {
    case 0: return 0.0;
    case 1: return kSqrt3;
    case 2: return 3.0 * kSqrt5 * xi;
    default: return 0.5 * kSqrt7 * (15.0 * xi * xi - 3.0);
  }
}

/// Tabulated basis values at the Gauss nodes and faces.
struct Tables {
  double phi_q[kDofs][kQuad];
  double dphi_q[kDofs][kQuad];
  double phi_left[kDofs];
  double phi_right[kDofs];

  Tables() {
    for (int j = 0; j < kDofs; ++j) {
      for (int q = 0; q < kQuad; ++q) {
        phi_q[j][q] = phi(j, kNodes[q]);
        dphi_q[j][q] = dphi(j, kNodes[q]);
      }
      phi_left[j] = phi(j, -1.0);
      phi_right[j] = phi(j, 1.0);
    }
  }
};

inline const Tables& tables() {
  static const Tables t;
  return t;
}

}  // namespace madapt::basis
