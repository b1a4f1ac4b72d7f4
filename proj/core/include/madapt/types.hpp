#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace madapt {

/// Largest state dimension supported by the fixed-capacity vector types.
inline constexpr int kMaxStateDim = 5;

/// Small state vectors and matrices live on the stack; rows/cols are set at runtime.
using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxStateDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor,
                          kMaxStateDim, kMaxStateDim>;

/// Conserved vector of the balance law (dimension M).
using ComplexState = Vec;
/// Conserved vector of the equilibrium conservation law (dimension m).
using SimpleState = Vec;

enum class Model : unsigned char { simple = 0, complex = 1 };

inline int theta_of(Model m) { return m == Model::complex ? 1 : 0; }

/// A state violates the admissible range of a closure (nonpositive density, temperature, ...).
class DomainError : public std::runtime_error {
 public:
  DomainError(const std::string& what, int component = -1)
      : std::runtime_error(what), component_(component) {}
  int component() const { return component_; }

 private:
  int component_;
};

/// Nonlinear solve (Maxwellian, inversion) did not converge.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical solution left the physical regime during a run.
class PhysicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid user configuration or input data.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace madapt
