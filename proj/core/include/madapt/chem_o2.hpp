#pragma once

// Oxygen dissociation O2 + N2 <=> 2 O + N2 with nitrogen as catalyst.
//
// Complex state U = (rho_O2, rho_O, rho_N2, rho v, rho E), simple state
// u = P U = (rho_O2 + rho_O, rho_N2, rho v, rho E). Ideal-gas mixture with
// constant specific heats,
//
//   rho E = sum_k rho_k (e0_k + cv_k (T - T_ref)) + rho v^2 / 2,
//   p     = R T sum_k rho_k / m_k,
//   s_k   = s_ref_k + cv_k ln(T / T_ref) - (R / m_k) ln(rho_k / rho_ref_k),
//
// entropy pair H = -rho s, Q = H v. All table quantities are stored per kg.

#include "madapt/hierarchy.hpp"

#include <array>
#include <atomic>
#include <filesystem>
#include <string>

namespace madapt::o2 {

enum Species : int { kO2 = 0, kO = 1, kN2 = 2 };
inline constexpr int kSpecies = 3;
inline constexpr int kMomentum = 3;
inline constexpr int kEnergy = 4;

/// How the specific heats are normalised: by each species' own molar mass, or
/// all by the O2 molar mass as printed in the source table.
enum class CvNormalization { species_mass, literal_table };

struct SpeciesData {
  std::string name;
  double molar_mass = 0.0;  // kg/mol
  int alpha = 0;            // reactant stoichiometry
  int beta = 0;             // product stoichiometry
  double cv_factor = 0.0;   // cv = cv_factor * R / (normalising mass)
  double cv = 0.0;          // J/(kg K)
  double e0 = 0.0;          // J/kg
  double rho_ref = 0.0;     // kg/m^3
  double s_ref = 0.0;       // J/(kg K)

  int nu() const { return beta - alpha; }
};

struct ThermoTable {
  std::array<SpeciesData, kSpecies> species;
  double R = 8.314;         // J/(mol K)
  double T_ref = 2000.0;    // K
  double p_ref = 1.01325e5; // Pa
  double rate_C = 2.9e13;
  double rate_E = 597.5;    // K
  CvNormalization cv_normalization = CvNormalization::species_mass;

  /// Compiled-in defaults (molar table values converted to per-kg form).
  static ThermoTable defaults(CvNormalization norm = CvNormalization::species_mass);
  /// Reads the key-value schema documented in configs/thermo_o2.ini.
  static ThermoTable load(const std::filesystem::path& path);

  /// Recomputes the per-kg quantities from molar inputs.
  void set_molar(int k, double molar_mass, int alpha, int beta, double cv_factor,
                 double e0_molar, double rho_ref, double s_ref_molar);
  void validate() const;

  double gas_constant(int k) const { return R / species[k].molar_mass; }
};

struct PrimitiveState {
  std::array<double, kSpecies> rho{};
  double v = 0.0;
  double T = 0.0;
  double p = 0.0;
};

struct RateConstants {
  double k_f = 0.0;
  double k_eq = 0.0;
};

struct MaxwellianSolve {
  Vec U;
  int newton_iterations = 0;
  bool used_bisection = false;
  double residual = 0.0;
};

class O2Hierarchy final : public ModelHierarchy {
 public:
  explicit O2Hierarchy(ThermoTable table = ThermoTable::defaults());

  int complex_dim() const override { return 5; }
  int simple_dim() const override { return 4; }
  const Mat& projection() const override { return P_; }

  Vec flux(const Vec& U) const override;
  Vec source(const Vec& U) const override;
  double entropy(const Vec& U) const override;
  double entropy_flux(const Vec& U) const override;
  using ModelHierarchy::maxwellian;
  Vec maxwellian(const Vec& u, const Vec* warm_start) const override;
  double max_wave_speed(const Vec& U) const override;

  bool admissible(const Vec& U) const override;
  bool simple_admissible(const Vec& u) const override;
  void require_admissible(const Vec& U) const override;

  Mat flux_jacobian(const Vec& U) const override;
  Vec entropy_gradient(const Vec& U) const override;
  Mat entropy_hessian(const Vec& U) const override;
  Mat source_jacobian(const Vec& U) const override;
  Mat maxwellian_jacobian(const Vec& u) const override;
  Mat maxwellian_jacobian(const Vec& u, const Vec& M) const override;

  Vec state_scale(const Vec& U) const override;
  Vec simple_state_scale(const Vec& u) const override;
  bool component_positive(int k) const override { return k < kSpecies; }
  std::string component_name(int k) const override;
  std::string component_unit(int k) const override;
  std::vector<std::pair<std::string, double>> diagnostics(const Vec& U) const override;

  const ThermoTable& table() const { return table_; }

  double temperature(const Vec& U) const;
  double pressure(const Vec& U) const;
  /// Frozen speed of sound sqrt(Gamma p / rho), Gamma = 1 + R_mix / cv_mix.
  double sound_speed(const Vec& U) const;
  PrimitiveState conservative_to_primitive(const Vec& U) const;
  Vec primitive_to_conservative(const PrimitiveState& prim) const;

  double forward_rate(double T) const;
  /// k_f(T) and k_eq(T, c), with the total molar concentration c taken from `prim`.
  RateConstants rate_constants(double T, const PrimitiveState& prim) const;
  /// Molar reaction rate k_f (prod x^alpha - prod x^beta / k_eq).
  double reaction_rate(const Vec& U) const;
  /// sum_k nu_k m_k g_k: molar Gibbs energy of reaction; zero exactly on equilibrium.
  double reaction_affinity(const Vec& U) const;

  /// Equilibrium state with given T, p, v and atomic-oxygen density.
  Vec equilibrium_from_Tpv(double T, double p, double v, double rho_O) const;

  MaxwellianSolve maxwellian_detailed(const Vec& u, const Vec* warm_start) const;
  /// Scalar bisection on the equilibrium condition with T from the energy closure.
  Vec maxwellian_bisection(const Vec& u) const;

  /// Number of exponent clamps applied while evaluating k_eq.
  long exp_clamps() const { return exp_clamps_.load(); }

  int max_newton_iterations = 50;

 private:
  double internal_energy(int k, double T) const;
  double gibbs(int k, double rho_k, double T) const;
  double reference_gibbs(int k, double T) const;
  double log_inverse_keq(double T, double c) const;
  double clamp_exp(double x) const;
  double temperature_from_energy(const std::array<double, kSpecies>& rho, double mom,
                                 double energy) const;
  bool maxwellian_newton(const Vec& u, double rho_O, MaxwellianSolve& out) const;

  ThermoTable table_;
  Mat P_;
  mutable std::atomic<long> exp_clamps_{0};
};

}  // namespace madapt::o2
