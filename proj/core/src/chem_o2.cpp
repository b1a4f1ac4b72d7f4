#include "madapt/chem_o2.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

namespace madapt::o2 {

namespace {

constexpr double kExpLimit = 700.0;

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// d/dx_j of prod_k x_k^e_k.
std::array<double, kSpecies> product_gradient(const std::array<double, kSpecies>& x,
                                              const std::array<int, kSpecies>& e) {
  std::array<double, kSpecies> g{};
  for (int k = 0; k < kSpecies; ++k) {
    if (e[k] == 0) continue;
    double v = e[k] * ipow(x[k], e[k] - 1);
    for (int i = 0; i < kSpecies; ++i) {
      if (i != k) v *= ipow(x[i], e[i]);
    }
    g[k] = v;
  }
  return g;
}

double product(const std::array<double, kSpecies>& x, const std::array<int, kSpecies>& e) {
  double v = 1.0;
  for (int k = 0; k < kSpecies; ++k) v *= ipow(x[k], e[k]);
  return v;
}

}  // namespace

// ---------------------------------------------------------------- ThermoTable

void ThermoTable::set_molar(int k, double molar_mass, int alpha, int beta, double cv_factor,
                            double e0_molar, double rho_ref, double s_ref_molar) {
  auto& s = species[k];
  s.molar_mass = molar_mass;
  s.alpha = alpha;
  s.beta = beta;
  s.cv_factor = cv_factor;
  const double norm_mass = cv_normalization == CvNormalization::literal_table
                               ? species[kO2].molar_mass
                               : molar_mass;
  s.cv = cv_factor * R / norm_mass;
  s.e0 = e0_molar / molar_mass;
  s.rho_ref = rho_ref;
  s.s_ref = s_ref_molar / molar_mass;
}

ThermoTable ThermoTable::defaults(CvNormalization norm) {
  ThermoTable t;
  t.cv_normalization = norm;
  t.species[kO2].name = "O2";
  t.species[kO].name = "O";
  t.species[kN2].name = "N2";
  // O2 first: the literal normalisation divides every cv by its molar mass.
  t.set_molar(kO2, 0.032, 1, 0, 2.5, 0.0, 1145.0, 205.15);
  t.set_molar(kO, 0.016, 0, 2, 1.5, 249200.0, 1141.0, 161.1);
  t.set_molar(kN2, 0.028, 1, 1, 2.5, 0.0, 1308.0, 191.61);
  t.validate();
  return t;
}

ThermoTable ThermoTable::load(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("cannot read thermo table " + path.string() + ": " + e.message());
  }
  ThermoTable t = defaults();
  const std::set<std::string> const_keys = {"R", "T_ref", "p_ref", "rate_C", "rate_E",
                                            "cv_normalization"};
  const std::set<std::string> species_keys = {"molar_mass", "alpha", "beta", "cv_factor",
                                              "e0_molar", "rho_ref", "s_ref_molar"};
  auto number = [&](const pt::ptree& sec, const std::string& sec_name, const std::string& key) {
    const auto raw = sec.get<std::string>(key);
    try {
      std::size_t pos = 0;
      const double v = std::stod(raw, &pos);
      if (pos != raw.size()) throw std::invalid_argument(raw);
      return v;
    } catch (const std::exception&) {
      throw ConfigError("thermo table [" + sec_name + "] " + key + ": not a number: " + raw);
    }
  };
  for (const auto& [name, sec] : tree) {
    if (name == "constants") {
      for (const auto& [key, _] : sec) {
        if (!const_keys.count(key)) throw ConfigError("thermo table: unknown key constants." + key);
      }
      if (sec.count("R")) t.R = number(sec, name, "R");
      if (sec.count("T_ref")) t.T_ref = number(sec, name, "T_ref");
      if (sec.count("p_ref")) t.p_ref = number(sec, name, "p_ref");
      if (sec.count("rate_C")) t.rate_C = number(sec, name, "rate_C");
      if (sec.count("rate_E")) t.rate_E = number(sec, name, "rate_E");
      if (sec.count("cv_normalization")) {
        const auto v = sec.get<std::string>("cv_normalization");
        if (v == "species") {
          t.cv_normalization = CvNormalization::species_mass;
        } else if (v == "literal") {
          t.cv_normalization = CvNormalization::literal_table;
        } else {
          throw ConfigError("thermo table: cv_normalization must be 'species' or 'literal'");
        }
      }
    } else if (name != "O2" && name != "O" && name != "N2") {
      throw ConfigError("thermo table: unknown section [" + name + "]");
    }
  }
  // Species after constants so R and the normalisation are final; O2 before the others.
  for (int k : {kO2, kO, kN2}) {
    const auto& sp = t.species[k];
    const auto it = tree.find(sp.name);
    double mm = sp.molar_mass, cvf = sp.cv_factor, e0 = sp.e0 * sp.molar_mass,
           rr = sp.rho_ref, sr = sp.s_ref * sp.molar_mass;
    int a = sp.alpha, b = sp.beta;
    if (it != tree.not_found()) {
      const auto& sec = it->second;
      for (const auto& [key, _] : sec) {
        if (!species_keys.count(key)) {
          throw ConfigError("thermo table: unknown key " + sp.name + "." + key);
        }
      }
      if (sec.count("molar_mass")) mm = number(sec, sp.name, "molar_mass");
      if (sec.count("alpha")) a = static_cast<int>(number(sec, sp.name, "alpha"));
      if (sec.count("beta")) b = static_cast<int>(number(sec, sp.name, "beta"));
      if (sec.count("cv_factor")) cvf = number(sec, sp.name, "cv_factor");
      if (sec.count("e0_molar")) e0 = number(sec, sp.name, "e0_molar");
      if (sec.count("rho_ref")) rr = number(sec, sp.name, "rho_ref");
      if (sec.count("s_ref_molar")) sr = number(sec, sp.name, "s_ref_molar");
    }
    t.set_molar(k, mm, a, b, cvf, e0, rr, sr);
  }
  t.validate();
  return t;
}

void ThermoTable::validate() const {
  if (!(R > 0 && T_ref > 0 && p_ref > 0 && rate_C > 0 && rate_E >= 0)) {
    throw ConfigError("thermo table: R, T_ref, p_ref, rate_C must be positive, rate_E >= 0");
  }
  double mass_balance = 0.0;
  for (const auto& s : species) {
    if (!(s.molar_mass > 0 && s.cv > 0 && s.rho_ref > 0)) {
      throw ConfigError("thermo table: species " + s.name +
                        " needs positive molar mass, cv and reference density");
    }
    if (s.alpha < 0 || s.beta < 0) {
      throw ConfigError("thermo table: negative stoichiometry for " + s.name);
    }
    mass_balance += s.nu() * s.molar_mass;
  }
  if (std::abs(mass_balance) > 1e-12) {
    throw ConfigError("thermo table: reaction does not conserve mass (sum nu_k m_k != 0)");
  }
  if (species[kO2].nu() != -1 || species[kO].nu() != 2 || species[kN2].nu() != 0) {
    throw ConfigError("thermo table: stoichiometry must describe O2 + N2 <=> 2 O + N2");
  }
}

// ---------------------------------------------------------------- O2Hierarchy

O2Hierarchy::O2Hierarchy(ThermoTable table) : table_(std::move(table)), P_(Mat::Zero(4, 5)) {
  table_.validate();
  P_(0, kO2) = 1.0;
  P_(0, kO) = 1.0;
  P_(1, kN2) = 1.0;
  P_(2, kMomentum) = 1.0;
  P_(3, kEnergy) = 1.0;
}

double O2Hierarchy::internal_energy(int k, double T) const {
  const auto& s = table_.species[k];
  return s.e0 + s.cv * (T - table_.T_ref);
}

double O2Hierarchy::gibbs(int k, double rho_k, double T) const {
  const auto& s = table_.species[k];
  const double Rk = table_.gas_constant(k);
  const double sk = s.s_ref + s.cv * std::log(T / table_.T_ref) - Rk * std::log(rho_k / s.rho_ref);
  return internal_energy(k, T) + Rk * T - T * sk;
}

double O2Hierarchy::reference_gibbs(int k, double T) const {
  return gibbs(k, table_.species[k].rho_ref, T);
}

double O2Hierarchy::clamp_exp(double x) const {
  if (x > kExpLimit || x < -kExpLimit) {
    exp_clamps_.fetch_add(1, std::memory_order_relaxed);
    x = std::clamp(x, -kExpLimit, kExpLimit);
  }
  return std::exp(x);
}

// ln(1/k_eq) = A0(T)/(R T) + sum_k nu_k ln(m_k c / rho_ref_k)
double O2Hierarchy::log_inverse_keq(double T, double c) const {
  double a0 = 0.0, pressure_part = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    a0 += s.nu() * s.molar_mass * reference_gibbs(k, T);
    pressure_part += s.nu() * std::log(s.molar_mass * c / s.rho_ref);
  }
  return a0 / (table_.R * T) + pressure_part;
}

double O2Hierarchy::temperature_from_energy(const std::array<double, kSpecies>& rho, double mom,
                                            double energy) const {
  double rho_tot = 0.0, heat = 0.0, e0 = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    rho_tot += rho[k];
    heat += rho[k] * table_.species[k].cv;
    e0 += rho[k] * table_.species[k].e0;
  }
  const double kinetic = 0.5 * mom * mom / rho_tot;
  return table_.T_ref + (energy - kinetic - e0) / heat;
}

double O2Hierarchy::temperature(const Vec& U) const {
  return temperature_from_energy({U[kO2], U[kO], U[kN2]}, U[kMomentum], U[kEnergy]);
}

double O2Hierarchy::pressure(const Vec& U) const {
  const double T = temperature(U);
  double c = 0.0;
  for (int k = 0; k < kSpecies; ++k) c += U[k] / table_.species[k].molar_mass;
  return table_.R * T * c;
}

double O2Hierarchy::sound_speed(const Vec& U) const {
  double rho = 0.0, heat = 0.0, c = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    rho += U[k];
    heat += U[k] * table_.species[k].cv;
    c += U[k] / table_.species[k].molar_mass;
  }
  const double gamma = 1.0 + table_.R * c / heat;
  const double a2 = gamma * pressure(U) / rho;
  if (!(a2 > 0.0)) throw DomainError("nonpositive squared sound speed");
  return std::sqrt(a2);
}

PrimitiveState O2Hierarchy::conservative_to_primitive(const Vec& U) const {
  PrimitiveState prim;
  double rho = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    if (!(U[k] > 0.0)) {
      throw DomainError("unphysical state: nonpositive " + component_name(k), k);
    }
    prim.rho[k] = U[k];
    rho += U[k];
  }
  prim.v = U[kMomentum] / rho;
  prim.T = temperature(U);
  if (!(prim.T > 0.0) || !std::isfinite(prim.T)) {
    throw DomainError("unphysical state: temperature " + std::to_string(prim.T) + " K", kEnergy);
  }
  double c = 0.0;
  for (int k = 0; k < kSpecies; ++k) c += prim.rho[k] / table_.species[k].molar_mass;
  prim.p = table_.R * prim.T * c;
  return prim;
}

Vec O2Hierarchy::primitive_to_conservative(const PrimitiveState& prim) const {
  Vec U(5);
  double rho = 0.0, rhoe = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    U[k] = prim.rho[k];
    rho += prim.rho[k];
    rhoe += prim.rho[k] * internal_energy(k, prim.T);
  }
  U[kMomentum] = rho * prim.v;
  U[kEnergy] = rhoe + 0.5 * rho * prim.v * prim.v;
  return U;
}

bool O2Hierarchy::admissible(const Vec& U) const {
  if (U.size() != 5 || !U.allFinite()) return false;
  for (int k = 0; k < kSpecies; ++k) {
    if (!(U[k] > 0.0)) return false;
  }
  return temperature(U) > 0.0;
}

void O2Hierarchy::require_admissible(const Vec& U) const {
  ModelHierarchy::require_admissible(U);
}

bool O2Hierarchy::simple_admissible(const Vec& u) const {
  if (u.size() != 4 || !u.allFinite()) return false;
  if (!(u[0] > 0.0 && u[1] > 0.0)) return false;
  // Highest attainable temperature: all oxygen molecular.
  return temperature_from_energy({u[0], 0.0, u[1]}, u[2], u[3]) > 0.0;
}

Vec O2Hierarchy::flux(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  const double v = U[kMomentum] / rho;
  const double p = pressure(U);
  Vec F(5);
  for (int k = 0; k < kSpecies; ++k) F[k] = U[k] * v;
  F[kMomentum] = U[kMomentum] * v + p;
  F[kEnergy] = (U[kEnergy] + p) * v;
  return F;
}

Mat O2Hierarchy::flux_jacobian(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  const double v = U[kMomentum] / rho;
  const double T = temperature(U);
  double heat = 0.0, conc = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    heat += U[k] * table_.species[k].cv;
    conc += U[k] / table_.species[k].molar_mass;
  }
  const double p = table_.R * T * conc;

  Vec dT(5), dv(5), dp(5);
  for (int k = 0; k < kSpecies; ++k) {
    dT[k] = (0.5 * v * v - internal_energy(k, T)) / heat;
    dv[k] = -v / rho;
  }
  dT[kMomentum] = -v / heat;
  dT[kEnergy] = 1.0 / heat;
  dv[kMomentum] = 1.0 / rho;
  dv[kEnergy] = 0.0;
  for (int j = 0; j < 5; ++j) dp[j] = table_.R * conc * dT[j];
  for (int k = 0; k < kSpecies; ++k) dp[k] += table_.R * T / table_.species[k].molar_mass;

  Mat J(5, 5);
  for (int j = 0; j < 5; ++j) {
    for (int k = 0; k < kSpecies; ++k) J(k, j) = (k == j ? v : 0.0) + U[k] * dv[j];
    J(kMomentum, j) = (j == kMomentum ? v : 0.0) + U[kMomentum] * dv[j] + dp[j];
    J(kEnergy, j) = ((j == kEnergy ? 1.0 : 0.0) + dp[j]) * v + (U[kEnergy] + p) * dv[j];
  }
  return J;
}

double O2Hierarchy::entropy(const Vec& U) const {
  const double T = temperature(U);
  double rhos = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    const double sk = s.s_ref + s.cv * std::log(T / table_.T_ref) -
                      table_.gas_constant(k) * std::log(U[k] / s.rho_ref);
    rhos += U[k] * sk;
  }
  return -rhos;
}

double O2Hierarchy::entropy_flux(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  return entropy(U) * U[kMomentum] / rho;
}

Vec O2Hierarchy::entropy_gradient(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  const double v = U[kMomentum] / rho;
  const double T = temperature(U);
  Vec w(5);
  for (int k = 0; k < kSpecies; ++k) w[k] = (gibbs(k, U[k], T) - 0.5 * v * v) / T;
  w[kMomentum] = v / T;
  w[kEnergy] = -1.0 / T;
  return w;
}

Mat O2Hierarchy::entropy_hessian(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  const double v = U[kMomentum] / rho;
  const double T = temperature(U);
  double heat = 0.0;
  for (int k = 0; k < kSpecies; ++k) heat += U[k] * table_.species[k].cv;

  // Primitive derivatives: rows (rho_1..3, v, T), columns U.
  Mat dprim = Mat::Zero(5, 5);
  for (int k = 0; k < kSpecies; ++k) {
    dprim(k, k) = 1.0;
    dprim(3, k) = -v / rho;
    dprim(4, k) = (0.5 * v * v - internal_energy(k, T)) / heat;
  }
  dprim(3, kMomentum) = 1.0 / rho;
  dprim(4, kMomentum) = -v / heat;
  dprim(4, kEnergy) = 1.0 / heat;

  // Entropy variables w as functions of (rho_k, v, T).
  Mat dw = Mat::Zero(5, 5);
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    const double Rk = table_.gas_constant(k);
    const double sk = s.s_ref + s.cv * std::log(T / table_.T_ref) - Rk * std::log(U[k] / s.rho_ref);
    const double gk = internal_energy(k, T) + Rk * T - T * sk;
    dw(k, k) = Rk / U[k];
    dw(k, 3) = -v / T;
    dw(k, 4) = (Rk - sk) / T - (gk - 0.5 * v * v) / (T * T);
  }
  dw(3, 3) = 1.0 / T;
  dw(3, 4) = -v / (T * T);
  dw(4, 4) = 1.0 / (T * T);

  Mat Hs = dw * dprim;
  return 0.5 * (Hs + Hs.transpose());
}

double O2Hierarchy::forward_rate(double T) const {
  return table_.rate_C * std::exp(-table_.rate_E / T) / (T * T);
}

RateConstants O2Hierarchy::rate_constants(double T, const PrimitiveState& prim) const {
  if (!(T > 0.0)) throw DomainError("rate constants need T > 0");
  double c = 0.0;
  for (int k = 0; k < kSpecies; ++k) c += prim.rho[k] / table_.species[k].molar_mass;
  return {forward_rate(T), 1.0 / clamp_exp(log_inverse_keq(T, c))};
}

double O2Hierarchy::reaction_rate(const Vec& U) const {
  std::array<double, kSpecies> conc{}, x{};
  std::array<int, kSpecies> alpha{}, beta{};
  double c = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    if (U[k] < 0.0) throw DomainError("negative partial density " + component_name(k), k);
    conc[k] = U[k] / table_.species[k].molar_mass;
    c += conc[k];
    alpha[k] = table_.species[k].alpha;
    beta[k] = table_.species[k].beta;
  }
  if (!(c > 0.0)) throw DomainError("vanishing total concentration");
  for (int k = 0; k < kSpecies; ++k) x[k] = conc[k] / c;
  const double T = temperature(U);
  if (!(T > 0.0)) throw DomainError("unphysical temperature in reaction source", kEnergy);
  const double inv_keq = clamp_exp(log_inverse_keq(T, c));
  return forward_rate(T) * (product(x, alpha) - inv_keq * product(x, beta));
}

double O2Hierarchy::reaction_affinity(const Vec& U) const {
  const double T = temperature(U);
  double a = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    a += s.nu() * s.molar_mass * gibbs(k, U[k], T);
  }
  return a;
}

Vec O2Hierarchy::source(const Vec& U) const {
  const double rate = reaction_rate(U);
  Vec S = Vec::Zero(5);
  for (int k = 0; k < kSpecies; ++k) {
    S[k] = table_.species[k].nu() * table_.species[k].molar_mass * rate;
  }
  return S;
}

Mat O2Hierarchy::source_jacobian(const Vec& U) const {
  std::array<double, kSpecies> conc{}, x{};
  std::array<int, kSpecies> alpha{}, beta{};
  double c = 0.0, heat = 0.0, rho = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    conc[k] = U[k] / s.molar_mass;
    c += conc[k];
    heat += U[k] * s.cv;
    rho += U[k];
    alpha[k] = s.alpha;
    beta[k] = s.beta;
  }
  for (int k = 0; k < kSpecies; ++k) x[k] = conc[k] / c;
  const double v = U[kMomentum] / rho;
  const double T = temperature(U);
  const double kf = forward_rate(T);
  const double dkf_dT = kf * (-2.0 / T + table_.rate_E / (T * T));
  const double K = clamp_exp(log_inverse_keq(T, c));
  int sum_nu = 0;
  double dlnK_dT = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    sum_nu += s.nu();
    dlnK_dT -= s.nu() * s.molar_mass * internal_energy(k, T) / (table_.R * T * T);
  }
  const double pa = product(x, alpha), pb = product(x, beta);
  const auto ga = product_gradient(x, alpha), gb = product_gradient(x, beta);

  // d(rate)/d rho_j at fixed T, and d(rate)/dT at fixed rho.
  std::array<double, kSpecies> drate_drho{};
  for (int j = 0; j < kSpecies; ++j) {
    const double mj = table_.species[j].molar_mass;
    double dpa = 0.0, dpb = 0.0;
    for (int k = 0; k < kSpecies; ++k) {
      const double dx = ((k == j ? 1.0 : 0.0) - x[k]) / (mj * c);
      dpa += ga[k] * dx;
      dpb += gb[k] * dx;
    }
    const double dK = K * sum_nu / (c * mj);
    drate_drho[j] = kf * (dpa - K * dpb - dK * pb);
  }
  const double drate_dT = dkf_dT * (pa - K * pb) - kf * K * dlnK_dT * pb;

  Vec drate(5);
  for (int j = 0; j < kSpecies; ++j) {
    drate[j] = drate_drho[j] + drate_dT * (0.5 * v * v - internal_energy(j, T)) / heat;
  }
  drate[kMomentum] = drate_dT * (-v / heat);
  drate[kEnergy] = drate_dT / heat;

  Mat J = Mat::Zero(5, 5);
  for (int k = 0; k < kSpecies; ++k) {
    const auto& s = table_.species[k];
    J.row(k) = s.nu() * s.molar_mass * drate.transpose();
  }
  return J;
}

double O2Hierarchy::max_wave_speed(const Vec& U) const {
  const double rho = U[kO2] + U[kO] + U[kN2];
  return std::abs(U[kMomentum] / rho) + sound_speed(U);
}

Vec O2Hierarchy::equilibrium_from_Tpv(double T, double p, double v, double rho_O) const {
  if (!(T > 0.0 && p > 0.0)) throw ConfigError("equilibrium state needs T > 0 and p > 0");
  if (!(rho_O > 0.0)) throw ConfigError("equilibrium state needs a positive atomic-oxygen density");
  const double c = p / (table_.R * T);
  const double cO = rho_O / table_.species[kO].molar_mass;
  // prod x^alpha = K prod x^beta with x_N2 cancelling: x_O2 = K x_O^2.
  const double K = clamp_exp(log_inverse_keq(T, c));
  const double cO2 = K * cO * cO / c;
  const double cN2 = c - cO - cO2;
  if (!(cO2 > 0.0) || !(cN2 > 0.0)) {
    std::ostringstream os;
    os << "inconsistent equilibrium data (T=" << T << ", p=" << p << ", rho_O=" << rho_O
       << "): concentrations O2=" << cO2 << ", N2=" << cN2 << " mol/m^3";
    throw ConfigError(os.str());
  }
  PrimitiveState prim;
  prim.rho = {cO2 * table_.species[kO2].molar_mass, rho_O, cN2 * table_.species[kN2].molar_mass};
  prim.v = v;
  prim.T = T;
  prim.p = p;
  return primitive_to_conservative(prim);
}

// ---------------------------------------------------------------- Maxwellian

namespace {

struct EqResidual {
  double energy;    // scaled energy closure
  double affinity;  // A / (R T)
};

}  // namespace

bool O2Hierarchy::maxwellian_newton(const Vec& u, double rho_O, MaxwellianSolve& out) const {
  const double a = u[0], b = u[1], mom = u[2], E = u[3];
  const double rho = a + b;
  const double kinetic = 0.5 * mom * mom / rho;
  const auto& sp = table_.species;
  const double R = table_.R;

  auto T_closure = [&](double rO) {
    return temperature_from_energy({a - rO, rO, b}, mom, E);
  };
  double T = T_closure(rho_O);
  if (!(T > 0.0)) T = table_.T_ref;

  for (int it = 0; it < max_newton_iterations; ++it) {
    const double rO2 = a - rho_O;
    const double heat = rO2 * sp[kO2].cv + rho_O * sp[kO].cv + b * sp[kN2].cv;
    const double escale = std::max(std::abs(E), heat * T);
    const double e_O2 = internal_energy(kO2, T), e_O = internal_energy(kO, T),
                 e_N2 = internal_energy(kN2, T);
    const double r1 = (rO2 * e_O2 + rho_O * e_O + b * e_N2 + kinetic - E) / escale;
    const double A = sp[kO2].nu() * sp[kO2].molar_mass * gibbs(kO2, rO2, T) +
                     sp[kO].nu() * sp[kO].molar_mass * gibbs(kO, rho_O, T) +
                     sp[kN2].nu() * sp[kN2].molar_mass * gibbs(kN2, b, T);
    const double r2 = A / (R * T);
    const double res = std::max(std::abs(r1), std::abs(r2));
    out.newton_iterations = it + 1;
    out.residual = res;
    if (!std::isfinite(res)) return false;

    const double j11 = (e_O - e_O2) / escale;
    const double j12 = heat / escale;
    const double j21 = sp[kO].nu() / rho_O - sp[kO2].nu() / rO2;
    double j22 = 0.0;
    for (int k = 0; k < kSpecies; ++k) {
      j22 -= sp[k].nu() * sp[k].molar_mass * internal_energy(k, T) / (R * T * T);
    }
    const double det = j11 * j22 - j12 * j21;
    if (!(std::abs(det) > 0.0)) return false;
    const double d_rO = -(j22 * r1 - j12 * r2) / det;
    const double d_T = -(-j21 * r1 + j11 * r2) / det;

    double next_rO = rho_O + d_rO;
    double next_T = T + d_T;
    if (!(next_rO > 0.0)) next_rO = 0.1 * rho_O;
    if (!(next_rO < a)) next_rO = rho_O + 0.9 * (a - rho_O);
    if (!(next_T > 0.0)) next_T = 0.5 * T;
    const bool small_step = std::abs(next_rO - rho_O) <= 4e-16 * a &&
                            std::abs(next_T - T) <= 4e-16 * T;
    rho_O = next_rO;
    T = next_T;
    if (res < 1e-11 && small_step) break;
    if (res < 1e-14) break;
  }
  if (!(out.residual < 1e-11)) return false;
  out.U = Vec(5);
  out.U << a - rho_O, rho_O, b, mom, E;
  return admissible(out.U);
}

Vec O2Hierarchy::maxwellian_bisection(const Vec& u) const {
  const double a = u[0], b = u[1], mom = u[2], E = u[3];
  const auto& sp = table_.species;
  auto T_of = [&](double rO) { return temperature_from_energy({a - rO, rO, b}, mom, E); };
  auto f = [&](double rO) {
    const double T = T_of(rO);
    double A = 0.0;
    A += sp[kO2].nu() * sp[kO2].molar_mass * gibbs(kO2, a - rO, T);
    A += sp[kO].nu() * sp[kO].molar_mass * gibbs(kO, rO, T);
    A += sp[kN2].nu() * sp[kN2].molar_mass * gibbs(kN2, b, T);
    return A / (table_.R * T);
  };
  double lo = a * 1e-300 > 0 ? a * 1e-300 : std::numeric_limits<double>::min();
  double hi = a * (1.0 - 1e-15);
  if (!(T_of(lo) > 0.0)) throw SolverError("Maxwellian: energy too low for any composition");
  if (!(T_of(hi) > 0.0)) {
    // T decreases with rho_O; restrict to the positive-temperature range.
    double l = lo, r = hi;
    for (int i = 0; i < 2000 && r - l > 1e-16 * a; ++i) {
      const double mid = 0.5 * (l + r);
      (T_of(mid) > 0.0 ? l : r) = mid;
    }
    hi = l;
  }
  double flo = f(lo), fhi = f(hi);
  if (!(flo < 0.0 && fhi > 0.0)) throw SolverError("Maxwellian: equilibrium root not bracketed");
  // Bisect in log space first (the root may sit many decades below a), then linearly.
  for (int i = 0; i < 4000; ++i) {
    const double mid = (hi / lo > 4.0) ? std::sqrt(lo) * std::sqrt(hi) : 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double fm = f(mid);
    if (fm == 0.0) {
      lo = hi = mid;
      break;
    }
    (fm < 0.0 ? lo : hi) = mid;
  }
  const double rO = 0.5 * (lo + hi);
  Vec U(5);
  U << a - rO, rO, b, mom, E;
  return U;
}

MaxwellianSolve O2Hierarchy::maxwellian_detailed(const Vec& u, const Vec* warm_start) const {
  if (!simple_admissible(u)) {
    throw SolverError("Maxwellian: inadmissible simple state");
  }
  MaxwellianSolve out;
  const double a = u[0];
  double start = 1e-3 * a;
  if (warm_start != nullptr && warm_start->size() == 5 && (*warm_start)[kO] > 0.0 &&
      (*warm_start)[kO] < a) {
    start = (*warm_start)[kO];
  }
  if (maxwellian_newton(u, start, out)) return out;
  if (warm_start != nullptr && start != 1e-3 * a) {
    MaxwellianSolve cold;
    if (maxwellian_newton(u, 1e-3 * a, cold)) return cold;
  }
  out.used_bisection = true;
  try {
    out.U = maxwellian_bisection(u);
  } catch (const SolverError& e) {
    throw SolverError(std::string("Maxwellian: Newton and bisection both failed: ") + e.what());
  }
  out.residual = std::abs(reaction_affinity(out.U) / (table_.R * temperature(out.U)));
  if (!admissible(out.U)) throw SolverError("Maxwellian: unphysical equilibrium state");
  return out;
}

Vec O2Hierarchy::maxwellian(const Vec& u, const Vec* warm_start) const {
  return maxwellian_detailed(u, warm_start).U;
}

Mat O2Hierarchy::maxwellian_jacobian(const Vec& u) const {
  return maxwellian_jacobian(u, maxwellian(u));
}

Mat O2Hierarchy::maxwellian_jacobian(const Vec& u, const Vec& U) const {
  const auto& sp = table_.species;
  const double a = u[0], b = u[1], mom = u[2];
  const double rho = a + b;
  const double rO2 = U[kO2], rO = U[kO];
  const double T = temperature(U);
  const double heat = rO2 * sp[kO2].cv + rO * sp[kO].cv + b * sp[kN2].cv;
  const double R = table_.R;

  // G1 = energy closure (unscaled), G2 = A/(RT); unknowns (rho_O, T).
  Eigen::Matrix2d JX;
  JX(0, 0) = internal_energy(kO, T) - internal_energy(kO2, T);
  JX(0, 1) = heat;
  JX(1, 0) = sp[kO].nu() / rO - sp[kO2].nu() / rO2;
  double j22 = 0.0;
  for (int k = 0; k < kSpecies; ++k) {
    j22 -= sp[k].nu() * sp[k].molar_mass * internal_energy(k, T) / (R * T * T);
  }
  JX(1, 1) = j22;

  Eigen::Matrix<double, 2, 4> Gu = Eigen::Matrix<double, 2, 4>::Zero();
  const double dkin = 0.5 * mom * mom / (rho * rho);
  Gu(0, 0) = internal_energy(kO2, T) - dkin;
  Gu(0, 1) = internal_energy(kN2, T) - dkin;
  Gu(0, 2) = mom / rho;
  Gu(0, 3) = -1.0;
  Gu(1, 0) = sp[kO2].nu() / rO2;
  Gu(1, 1) = 0.0;  // nitrogen is inert: nu_N2 = 0

  const Eigen::Matrix<double, 2, 4> dX = -JX.partialPivLu().solve(Gu);
  Mat J = Mat::Zero(5, 4);
  J(kO2, 0) = 1.0;
  for (int j = 0; j < 4; ++j) {
    J(kO, j) = dX(0, j);
    J(kO2, j) -= dX(0, j);
  }
  J(kN2, 1) = 1.0;
  J(kMomentum, 2) = 1.0;
  J(kEnergy, 3) = 1.0;
  return J;
}

// ---------------------------------------------------------------- naming/scales

Vec O2Hierarchy::state_scale(const Vec& U) const {
  const double rho = std::abs(U[kO2]) + std::abs(U[kO]) + std::abs(U[kN2]);
  Vec s(5);
  for (int k = 0; k < kSpecies; ++k) s[k] = std::max(std::abs(U[k]), 1e-8 * rho);
  double heat = 0.0;
  for (int k = 0; k < kSpecies; ++k) heat += std::abs(U[k]) * table_.species[k].cv;
  double T = table_.T_ref;
  double a = 0.0;
  if (admissible(U)) {
    T = temperature(U);
    a = sound_speed(U);
  } else {
    a = std::sqrt(1.4 * table_.R / table_.species[kO2].molar_mass * table_.T_ref);
  }
  s[kMomentum] = std::max(std::abs(U[kMomentum]), rho * a);
  s[kEnergy] = std::max(std::abs(U[kEnergy]), heat * T);
  return s;
}

Vec O2Hierarchy::simple_state_scale(const Vec& u) const {
  const double rho = std::abs(u[0]) + std::abs(u[1]);
  Vec s(4);
  s[0] = std::max(std::abs(u[0]), 1e-8 * rho);
  s[1] = std::max(std::abs(u[1]), 1e-8 * rho);
  const double heat = std::abs(u[0]) * table_.species[kO2].cv + std::abs(u[1]) * table_.species[kN2].cv;
  double T = table_.T_ref;
  if (simple_admissible(u)) T = temperature_from_energy({u[0], 0.0, u[1]}, u[2], u[3]);
  const double a = std::sqrt(1.4 * table_.R / table_.species[kO2].molar_mass * T);
  s[2] = std::max(std::abs(u[2]), rho * a);
  s[3] = std::max(std::abs(u[3]), heat * T);
  return s;
}

std::string O2Hierarchy::component_name(int k) const {
  static const char* names[] = {"rho_O2", "rho_O", "rho_N2", "rho_v", "rho_E"};
  return (k >= 0 && k < 5) ? names[k] : "U" + std::to_string(k);
}

std::string O2Hierarchy::component_unit(int k) const {
  static const char* units[] = {"kg/m^3", "kg/m^3", "kg/m^3", "kg/(m^2 s)", "J/m^3"};
  return (k >= 0 && k < 5) ? units[k] : "1";
}

std::vector<std::pair<std::string, double>> O2Hierarchy::diagnostics(const Vec& U) const {
  if (!admissible(U)) return {};
  const auto prim = conservative_to_primitive(U);
  return {{"p", prim.p}, {"T", prim.T}, {"v", prim.v}};
}

}  // namespace madapt::o2
