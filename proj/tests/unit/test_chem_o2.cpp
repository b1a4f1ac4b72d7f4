#include "madapt/chem_o2.hpp"
#include "madapt/finite_difference.hpp"
#include "o2_samples.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <filesystem>
#include <fstream>

using namespace madapt;
using madapt::testing::rel_diff;
using madapt::testing::random_states;

namespace {

const o2::O2Hierarchy& gas() {
  static const o2::O2Hierarchy h;
  return h;
}

Vec left_state() { return gas().equilibrium_from_Tpv(2000.0, 2.0e6, 0.0, 0.01); }
Vec right_state() { return gas().equilibrium_from_Tpv(2000.0, 1.0e6, 0.0, 0.005); }

}  // namespace

TEST(ThermoTable, PerKgConversion) {
  const auto& t = gas().table();
  EXPECT_NEAR(t.species[o2::kO2].cv, 2.5 * 8.314 / 0.032, 1e-12);
  EXPECT_NEAR(t.species[o2::kO].cv, 1.5 * 8.314 / 0.016, 1e-12);
  EXPECT_NEAR(t.species[o2::kO].e0, 249200.0 / 0.016, 1e-6);
  EXPECT_NEAR(t.species[o2::kN2].s_ref, 191.61 / 0.028, 1e-9);
  // p_k = (R/m_k) rho_k T: J/(kg K) * kg/m^3 * K = Pa.
  EXPECT_NEAR(t.gas_constant(o2::kN2) * 1.0 * 300.0, 8.314 / 0.028 * 300.0, 1e-9);
}

TEST(ThermoTable, LiteralNormalisationUsesO2Mass) {
  const auto t = o2::ThermoTable::defaults(o2::CvNormalization::literal_table);
  EXPECT_NEAR(t.species[o2::kO].cv, 1.5 * 8.314 / 0.032, 1e-12);
  EXPECT_NEAR(t.species[o2::kN2].cv, 2.5 * 8.314 / 0.032, 1e-12);
}

TEST(ThermoTable, LoadsFileAndRejectsUnknownKeys) {
  const auto dir = std::filesystem::temp_directory_path();
  const auto good = dir / "madapt_thermo_good.ini";
  {
    std::ofstream f(good);
    f << "[constants]\nT_ref = 2000\ncv_normalization = literal\n[O]\ne0_molar = 249200\n";
  }
  const auto t = o2::ThermoTable::load(good);
  EXPECT_EQ(t.cv_normalization, o2::CvNormalization::literal_table);
  EXPECT_NEAR(t.species[o2::kO].cv, 1.5 * 8.314 / 0.032, 1e-12);

  const auto bad = dir / "madapt_thermo_bad.ini";
  {
    std::ofstream f(bad);
    f << "[O2]\nmolar_mas = 0.032\n";
  }
  EXPECT_THROW(o2::ThermoTable::load(bad), ConfigError);
  EXPECT_THROW(o2::ThermoTable::load(dir / "does_not_exist.ini"), ConfigError);
}

TEST(ThermoTable, RejectsMassViolatingStoichiometry) {
  auto t = o2::ThermoTable::defaults();
  t.species[o2::kO].beta = 1;
  EXPECT_THROW(t.validate(), ConfigError);
}

TEST(Primitive, ReferenceTemperatureCase) {
  o2::PrimitiveState p;
  p.rho = {1.0, 0.1, 2.0};
  p.T = 2000.0;
  const Vec U = gas().primitive_to_conservative(p);
  const auto& t = gas().table();
  const double e0 = 1.0 * t.species[0].e0 + 0.1 * t.species[1].e0 + 2.0 * t.species[2].e0;
  EXPECT_DOUBLE_EQ(U[o2::kEnergy], e0);
  EXPECT_DOUBLE_EQ(gas().temperature(U), 2000.0);
}

TEST(Primitive, RoundTrip) {
  for (const auto& U : random_states(gas(), 200, 7)) {
    const auto prim = gas().conservative_to_primitive(U);
    const Vec back = gas().primitive_to_conservative(prim);
    for (int k = 0; k < 5; ++k) {
      EXPECT_NEAR(back[k], U[k], 1e-12 * std::max(1.0, std::abs(U[k])));
    }
  }
  const Vec L = left_state();
  const auto prim = gas().conservative_to_primitive(L);
  EXPECT_NEAR(prim.T, 2000.0, 1e-9);
  EXPECT_NEAR(prim.p, 2.0e6, 1e-10 * 2.0e6);
}

TEST(Primitive, NegativeTemperatureIsDomainError) {
  Vec U = left_state();
  U[o2::kEnergy] = -1e9;
  try {
    gas().conservative_to_primitive(U);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_EQ(e.component(), o2::kEnergy);
  }
}

TEST(Equilibrium, ShockTubeStates) {
  const Vec L = left_state();
  EXPECT_NEAR(L[o2::kO2], 1.91243052, 1e-6);
  EXPECT_NEAR(L[o2::kN2], 1.67693662, 1e-6);
  EXPECT_DOUBLE_EQ(L[o2::kO], 0.01);
  EXPECT_NEAR(gas().pressure(L), 2.0e6, 1e-10 * 2.0e6);
  EXPECT_NEAR(gas().reaction_rate(L), 0.0, 1e-9 * gas().forward_rate(2000.0));

  const Vec Rr = right_state();
  EXPECT_NEAR(Rr[o2::kO2], 0.478108, 1e-5);
  EXPECT_NEAR(Rr[o2::kN2], 1.25681, 1e-4);
  EXPECT_NEAR(gas().pressure(Rr), 1.0e6, 1e-10 * 1.0e6);
  EXPECT_NEAR(gas().reaction_rate(Rr), 0.0, 1e-9 * gas().forward_rate(2000.0));
}

TEST(Equilibrium, InconsistentDataIsConfigError) {
  EXPECT_THROW(gas().equilibrium_from_Tpv(2000.0, 1.0e3, 0.0, 5.0), ConfigError);
  EXPECT_THROW(gas().equilibrium_from_Tpv(-1.0, 1.0e6, 0.0, 0.01), ConfigError);
}

TEST(Flux, RestStateAndMassConsistency) {
  const Vec L = left_state();
  const Vec F = gas().flux(L);
  EXPECT_EQ(F[0], 0.0);
  EXPECT_EQ(F[1], 0.0);
  EXPECT_EQ(F[2], 0.0);
  EXPECT_NEAR(F[3], 2.0e6, 1e-4);
  EXPECT_EQ(F[4], 0.0);

  for (const auto& U : random_states(gas(), 20, 3)) {
    const Vec G = gas().flux(U);
    EXPECT_NEAR(G[0] + G[1] + G[2], U[3], 1e-12 * std::abs(U[3]) + 1e-14);
  }
}

TEST(Flux, SpeciesFluxLinearInVelocity) {
  o2::PrimitiveState p = gas().conservative_to_primitive(left_state());
  p.v = 40.0;
  const Vec F1 = gas().flux(gas().primitive_to_conservative(p));
  p.v = 80.0;
  const Vec F2 = gas().flux(gas().primitive_to_conservative(p));
  for (int k = 0; k < 3; ++k) EXPECT_NEAR(F2[k], 2.0 * F1[k], 1e-12 * std::abs(F2[k]));
}

TEST(Source, SignsAndMassBalance) {
  o2::PrimitiveState p;
  p.rho = {1.0, 1e-12, 1.0};
  p.T = 3000.0;
  const Vec S = gas().source(gas().primitive_to_conservative(p));
  EXPECT_GT(S[o2::kO], 0.0);
  EXPECT_LT(S[o2::kO2], 0.0);
  EXPECT_EQ(S[o2::kO2] + S[o2::kO], 0.0);
  EXPECT_EQ(S[o2::kN2], 0.0);
  EXPECT_EQ(S[3], 0.0);
  EXPECT_EQ(S[4], 0.0);

  const Mat& P = gas().projection();
  for (const auto& U : random_states(gas(), 100, 11)) {
    const Vec PS = P * gas().source(U);
    EXPECT_EQ(PS.cwiseAbs().maxCoeff(), 0.0);
  }
}

TEST(Source, ForwardRateConstant) {
  EXPECT_NEAR(gas().forward_rate(2000.0), 2.9e13 / 4.0e6 * std::exp(-597.5 / 2000.0),
              1e-9 * gas().forward_rate(2000.0));
  // d ln k_f / dT changes sign at T = E/2.
  const double Tc = 597.5 / 2.0;
  EXPECT_LT(gas().forward_rate(Tc * 0.9), gas().forward_rate(Tc));
  EXPECT_LT(gas().forward_rate(Tc * 1.1), gas().forward_rate(Tc));
}

TEST(Source, EquilibriumConstantMatchesRateRoot) {
  const Vec L = left_state();
  const auto prim = gas().conservative_to_primitive(L);
  const auto rc = gas().rate_constants(prim.T, prim);
  double c = 0.0;
  for (int k = 0; k < 3; ++k) c += prim.rho[k] / gas().table().species[k].molar_mass;
  const double xO2 = prim.rho[o2::kO2] / 0.032 / c;
  const double xO = prim.rho[o2::kO] / 0.016 / c;
  EXPECT_NEAR(xO * xO / xO2, rc.k_eq, 1e-9 * rc.k_eq);
}

TEST(Projection, MatrixRows) {
  Vec U(5);
  U << 1, 2, 3, 4, 5;
  const Vec u = gas().projection() * U;
  ASSERT_EQ(u.size(), 4);
  EXPECT_EQ(u[0], 3);
  EXPECT_EQ(u[1], 3);
  EXPECT_EQ(u[2], 4);
  EXPECT_EQ(u[3], 5);
  const Mat& P = gas().projection();
  const Mat PPt = P * P.transpose();
  EXPECT_GT(std::abs(PPt.determinant()), 0.0);
}

TEST(Entropy, ReferenceStateAndConvexity) {
  o2::PrimitiveState p;
  const auto& t = gas().table();
  p.rho = {t.species[0].rho_ref, t.species[1].rho_ref, t.species[2].rho_ref};
  p.T = t.T_ref;
  const Vec U = gas().primitive_to_conservative(p);
  double rhos = 0.0;
  for (int k = 0; k < 3; ++k) rhos += p.rho[k] * t.species[k].s_ref;
  EXPECT_NEAR(gas().entropy(U), -rhos, 1e-12 * rhos);

  for (const Vec& V : {left_state(), right_state()}) {
    const Mat Hn = numeric::entropy_hessian(gas(), V);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(Hn)};
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);
  }
}

TEST(Entropy, SecondLawOnSamples) {
  int violations = 0;
  for (const auto& U : random_states(gas(), 10000, 5)) {
    if (gas().entropy_gradient(U).dot(gas().source(U)) > 0.0) ++violations;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Entropy, CompatibilityAndSign) {
  for (const auto& U : random_states(gas(), 100, 13)) {
    EXPECT_LT(entropy_compatibility_residual(gas(), U), 1e-6);
  }
}

TEST(Jacobians, AnalyticMatchFiniteDifferences) {
  for (const auto& U : random_states(gas(), 50, 17)) {
    EXPECT_LT(rel_diff(gas().flux_jacobian(U), numeric::flux_jacobian(gas(), U)), 1e-5);
    EXPECT_LT(rel_diff(gas().entropy_gradient(U), numeric::entropy_gradient(gas(), U)), 1e-5);
    EXPECT_LT(rel_diff(gas().source_jacobian(U), numeric::source_jacobian(gas(), U)), 1e-5);
    // Row-scaled comparison: the Hessian mixes very different unit scales.
    const Mat Ha = gas().entropy_hessian(U);
    const Mat Hn = numeric::entropy_hessian(gas(), U);
    const Vec s = gas().state_scale(U);
    const Mat D = s.asDiagonal();
    EXPECT_LT(rel_diff(D * Ha * D, D * Hn * D), 1e-5);
  }
}

TEST(Maxwellian, StructureAndIdempotence) {
  const Mat& P = gas().projection();
  for (const auto& U : random_states(gas(), 200, 19)) {
    const Vec u = P * U;
    const Vec M = gas().maxwellian(u);
    EXPECT_LT((P * M - u).cwiseQuotient(gas().simple_state_scale(u)).cwiseAbs().maxCoeff(),
              1e-10);
    EXPECT_LT(std::abs(gas().reaction_rate(M)), 1e-10 * gas().forward_rate(gas().temperature(M)));
    const Vec M2 = gas().maxwellian(P * M);
    EXPECT_LT(rel_diff(M2, M), 1e-10);
  }
}

TEST(Maxwellian, AgreesWithNestedBisection) {
  const Mat& P = gas().projection();
  for (const auto& U : random_states(gas(), 100, 23)) {
    const Vec u = P * U;
    const Vec M = gas().maxwellian(u);
    const Vec oracle = madapt::testing::nested_bisection_equilibrium(gas(), u);
    for (int k = 0; k < 5; ++k) {
      EXPECT_NEAR(M[k], oracle[k], 1e-8 * gas().state_scale(M)[k]) << "component " << k;
    }
  }
}

TEST(Maxwellian, BisectionFallbackMatchesNewton) {
  const Mat& P = gas().projection();
  for (const auto& U : random_states(gas(), 20, 29)) {
    const Vec u = P * U;
    const Vec a = gas().maxwellian(u);
    const Vec b = gas().maxwellian_bisection(u);
    EXPECT_LT(rel_diff(a, b), 1e-9);
  }
}

TEST(Maxwellian, JacobianMatchesFiniteDifferences) {
  const Mat& P = gas().projection();
  for (const auto& U : random_states(gas(), 50, 31)) {
    const Vec u = P * U;
    const Mat Ja = gas().maxwellian_jacobian(u);
    const Mat Jn = numeric::maxwellian_jacobian(gas(), u);
    const Vec su = gas().simple_state_scale(u);
    const Vec sU = gas().state_scale(gas().maxwellian(u));
    const Mat A = sU.cwiseInverse().asDiagonal() * Ja * su.asDiagonal();
    const Mat B = sU.cwiseInverse().asDiagonal() * Jn * su.asDiagonal();
    EXPECT_LT(rel_diff(A, B), 1e-5);
    // P dM = I.
    EXPECT_LT((P * Ja - Mat::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Maxwellian, InadmissibleInputIsSolverError) {
  Vec u(4);
  u << 1.0, 1.0, 0.0, -1e12;
  EXPECT_THROW(gas().maxwellian(u), SolverError);
}

TEST(WaveSpeed, MatchesSpectralRadius) {
  for (const auto& U : random_states(gas(), 100, 37)) {
    const Mat J = numeric::flux_jacobian(gas(), U);
    Eigen::EigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(J)};
    const double rho = es.eigenvalues().cwiseAbs().maxCoeff();
    EXPECT_NEAR(gas().max_wave_speed(U), rho, 0.1 * rho);
  }
}

TEST(WaveSpeed, ScalesWithRootTemperature) {
  o2::PrimitiveState p = gas().conservative_to_primitive(left_state());
  const double c1 = gas().max_wave_speed(gas().primitive_to_conservative(p));
  p.T *= 4.0;
  const double c4 = gas().max_wave_speed(gas().primitive_to_conservative(p));
  EXPECT_NEAR(c4 / c1, 2.0, 1e-12);
}
