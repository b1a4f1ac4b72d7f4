#pragma once

#include "madapt/dg_basis.hpp"
#include "madapt/types.hpp"

#include <array>
#include <vector>

namespace madapt {

/// Uniform 1D mesh with cells V_i = (a + i h, a + (i+1) h).
struct Mesh1D {
  double a = 0.0;
  double b = 1.0;
  int cells = 4;
  bool periodic = true;

  Mesh1D() = default;
  Mesh1D(double a_, double b_, int n, bool periodic_ = true);

  double h() const { return (b - a) / cells; }
  double left(int i) const { return a + i * h(); }
  double centre(int i) const { return a + (i + 0.5) * h(); }
  /// Physical coordinate of reference point xi in cell i.
  double x(int i, double xi) const { return centre(i) + 0.5 * h() * xi; }
  /// Neighbour index; -1 past a non-periodic boundary.
  int neighbour(int i, int offset) const;
};

/// Degree-2 modal polynomial of one cell; c[j] holds the coefficients of phi_j.
struct CellPoly {
  std::array<Vec, basis::kDofs> c;

  int dim() const { return static_cast<int>(c[0].size()); }
  const Vec& mean() const { return c[0]; }
  Vec value(double xi) const;
  /// d/dxi; divide by h/2 for d/dx.
  Vec dxi(double xi) const;
  Vec at_node(int q) const;
  Vec left_trace() const;
  Vec right_trace() const;

  static CellPoly constant(const Vec& v);
};

/// DG solution: one polynomial and model tag per cell. Complex cells carry
/// M-vectors, simple cells m-vectors.
struct DGField {
  std::vector<CellPoly> cells;
  std::vector<Model> model;

  int size() const { return static_cast<int>(cells.size()); }
  bool is_complex(int i) const { return model[i] == Model::complex; }

  /// this = a * x + b * y, cellwise; all three must share the model map.
  void assign_combination(double a, const DGField& x, double b, const DGField& y);
};

/// L2 projection of f(x) onto degree 2 in cell i, by 5-point Gauss quadrature.
template <class Fn>
CellPoly project_cell(const Mesh1D& mesh, int i, Fn&& f) {
  static constexpr std::array<double, 5> nodes = {-0.90617984593866399, -0.53846931010568309,
                                                  0.0, 0.53846931010568309, 0.90617984593866399};
  static constexpr std::array<double, 5> weights = {0.23692688505618909, 0.47862867049936647,
                                                    0.56888888888888889, 0.47862867049936647,
                                                    0.23692688505618909};
  CellPoly p;
  for (int q = 0; q < 5; ++q) {
    const Vec v = f(mesh.x(i, nodes[q]));
    for (int j = 0; j < basis::kDofs; ++j) {
      const Vec term = (0.5 * weights[q] * basis::phi(j, nodes[q])) * v;
      if (q == 0) {
        p.c[j] = term;
      } else {
        p.c[j] += term;
      }
    }
  }
  return p;
}

}  // namespace madapt
