#include "madapt/adapt.hpp"
#include "madapt/chem_o2.hpp"
#include "madapt/toy_models.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace madapt;

namespace {

const o2::O2Hierarchy& gas() {
  static const o2::O2Hierarchy h;
  return h;
}

constexpr auto C = Model::complex;
constexpr auto S = Model::simple;

std::vector<Model> from_bits(std::initializer_list<int> bits) {
  std::vector<Model> out;
  for (int b : bits) out.push_back(b ? C : S);
  return out;
}

Vec equilibrium(double T, double p, double v) { return gas().equilibrium_from_Tpv(T, p, v, 0.002); }

/// Simple polynomial around an equilibrium state with gentle slopes.
CellPoly simple_poly() {
  const Vec u = gas().projection() * equilibrium(2600.0, 1.2e5, 50.0);
  CellPoly p;
  p.c[0] = u;
  p.c[1] = 0.01 * u;
  p.c[1][2] = 20.0;
  p.c[2] = -0.002 * u;
  p.c[2][2] = 3.0;
  return p;
}

}  // namespace

TEST(AdaptConfig, Validation) {
  AdaptConfig c;
  EXPECT_NO_THROW(c.validate());
  c.f_eps = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AdaptConfig{};
  c.tau_kappa = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = AdaptConfig{};
  c.tau_r = -1.0;
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Algorithm1, Coarsens) {
  const AdaptConfig cfg;
  EXPECT_EQ(algorithm1_update({C}, {0.03}, {0.001}, cfg)[0], S);
}

TEST(Algorithm1, Refines) {
  const AdaptConfig cfg;
  EXPECT_EQ(algorithm1_update({S}, {0.2}, {0.0}, cfg)[0], C);
}

TEST(Algorithm1, KeepsOtherwise) {
  const AdaptConfig cfg;
  EXPECT_EQ(algorithm1_update({C}, {0.05}, {0.001}, cfg)[0], C);
  EXPECT_EQ(algorithm1_update({C}, {0.03}, {0.002}, cfg)[0], C);
  EXPECT_EQ(algorithm1_update({S}, {0.15}, {1.0}, cfg)[0], S);
  EXPECT_EQ(algorithm1_update({C}, {kNotCoarsenable}, {0.0}, cfg)[0], C);
}

TEST(Algorithm1, IdempotentWithoutFiring) {
  const AdaptConfig cfg;
  const auto theta = from_bits({1, 0, 0, 1, 1});
  const std::vector<double> ind = {0.1, 0.1, 0.12, 0.05, 0.2};
  const std::vector<double> kap = {0.0, 0.0, 0.0, 0.0, 0.0};
  const auto once = algorithm1_update(theta, ind, kap, cfg);
  EXPECT_EQ(once, theta);
  EXPECT_EQ(algorithm1_update(once, ind, kap, cfg), once);
}

TEST(Algorithm1, Hysteresis) {
  // Any indicator value that coarsens a cell cannot refine it again.
  const AdaptConfig cfg;
  for (double m = 0.0; m < 1.0; m += 0.001) {
    const auto a = algorithm1_update({C}, {m}, {0.0}, cfg)[0];
    if (a == S) EXPECT_EQ(algorithm1_update({S}, {m}, {0.0}, cfg)[0], S);
  }
}

TEST(PatchRule, SingleCellReverted) {
  EXPECT_EQ(patch_postprocess(from_bits({1, 0, 1}), 2, false), from_bits({1, 1, 1}));
}

TEST(PatchRule, PairKept) {
  EXPECT_EQ(patch_postprocess(from_bits({1, 0, 0, 1}), 2, false), from_bits({1, 0, 0, 1}));
}

TEST(PatchRule, PeriodicWrapRunKept) {
  EXPECT_EQ(patch_postprocess(from_bits({0, 1, 1, 0}), 2, true), from_bits({0, 1, 1, 0}));
  // Without the wrap the two boundary cells are isolated.
  EXPECT_EQ(patch_postprocess(from_bits({0, 1, 1, 0}), 2, false), from_bits({1, 1, 1, 1}));
}

TEST(PatchRule, WrapAwareRunLength) {
  EXPECT_EQ(patch_postprocess(from_bits({0, 1, 1, 1}), 2, true), from_bits({1, 1, 1, 1}));
  EXPECT_EQ(patch_postprocess(from_bits({0, 0, 1, 0, 1, 0}), 3, true),
            from_bits({0, 0, 1, 1, 1, 0}));
  EXPECT_EQ(patch_postprocess(from_bits({0, 0, 0}), 2, true), from_bits({0, 0, 0}));
}

TEST(PatchRule, InvariantOnRandomMaps) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<Model> t(17);
    for (auto& m : t) m = rng() % 3 == 0 ? C : S;
    const auto out = patch_postprocess(t, 3, true);
    for (int i = 0; i < 17; ++i) {
      if (t[i] == C) {
        EXPECT_EQ(out[i], C);
      }
      if (out[i] == S) {
        // Count the run through i, wrapping.
        int len = 1;
        for (int k = 1; k < 17 && out[(i + k) % 17] == S; ++k) ++len;
        for (int k = 1; k < 17 && out[(i - k + 17) % 17] == S; ++k) ++len;
        EXPECT_GE(std::min(len, 17), 3);
      }
    }
  }
}

TEST(IndicatorMs, ZeroResidualGivesZero) {
  std::array<SimpleResidual, kSlabPoints> res;
  for (auto& r : res) {
    r.lifted = equilibrium(2500.0, 1e5, 0.0);
    r.R_eps = Vec::Zero(5);
  }
  EXPECT_EQ(indicator_Ms(gas(), res, 1e-8), 0.0);
}

TEST(IndicatorMs, Homogeneous) {
  std::array<SimpleResidual, kSlabPoints> res;
  for (int k = 0; k < kSlabPoints; ++k) {
    res[k].lifted = equilibrium(2500.0 + 50.0 * k, 1e5, 10.0 * k);
    res[k].R_eps = Vec(5);
    res[k].R_eps << -1.0, 1.0, 0.0, 0.0, 0.0;
    res[k].R_eps *= 3.0 + k;
  }
  const double a = indicator_Ms(gas(), res, 1e-8);
  for (auto& r : res) r.R_eps *= 2.0;
  EXPECT_NEAR(indicator_Ms(gas(), res, 1e-8), 2.0 * a, 1e-14 * a);
  EXPECT_GT(a, 0.0);
}

TEST(IndicatorMs, ConstantIntegrandClosedForm) {
  // Identity entropy Hessian: |Hess H r| = |r| = c at every point.
  const LinearRelaxation lr(1.0, -1.0, 0.1);
  std::array<Vec, kSlabPoints> lifted, r;
  for (int k = 0; k < kSlabPoints; ++k) {
    lifted[k] = Vec::Constant(2, 0.5);
    r[k] = Vec(2);
    const double angle = 0.7 * k;
    r[k] << 1.5 * std::cos(angle), 1.5 * std::sin(angle);
  }
  EXPECT_NEAR(slab_indicator(lr, lifted, r, 0.05), std::sqrt(0.05) * 1.5, 1e-14);
}

TEST(CoarseningResidual, AnnihilatedByProjection) {
  const Vec u = gas().projection() * equilibrium(3100.0, 2e5, -80.0);
  Vec dxu(4);
  dxu << 0.3 * u[0], -0.1 * u[1], 400.0, 0.2 * u[3];
  const auto r = coarsening_residual_at(gas(), u, dxu);
  const Vec PR = gas().projection() * r.R_eps_c;
  EXPECT_LT(PR.cwiseAbs().maxCoeff(), 1e-10 * r.R_eps_c.cwiseAbs().maxCoeff());
  EXPECT_GT(r.R_eps_c.norm(), 0.0);
}

TEST(CoarseningResidual, ConstantStateGivesZero) {
  const Vec u = gas().projection() * equilibrium(3100.0, 2e5, -80.0);
  EXPECT_EQ(coarsening_residual_at(gas(), u, Vec::Zero(4)).R_eps_c.cwiseAbs().maxCoeff(), 0.0);
}

TEST(CoarseningResidual, MatchesModellingResidualOfExactSimpleSolution) {
  const Vec u = gas().projection() * equilibrium(2700.0, 1.4e5, 150.0);
  Vec dxu(4);
  dxu << -0.05 * u[0], 0.02 * u[1], 250.0, -0.04 * u[3];
  const Vec dtu = -simple_flux_jacobian(gas(), u) * dxu;
  const auto s = simple_residual_at(gas(), u, dxu, dtu);
  const auto c = coarsening_residual_at(gas(), u, dxu);
  const double scale = s.R_s.cwiseAbs().maxCoeff();
  EXPECT_LT((s.R_eps - c.R_eps_c).cwiseAbs().maxCoeff(), 1e-8 * scale);

  std::array<SimpleResidual, kSlabPoints> sr;
  std::array<CoarseningResidual, kSlabPoints> cr;
  sr.fill(s);
  cr.fill(c);
  EXPECT_NEAR(indicator_Ms(gas(), sr, 1e-8), indicator_Mc(gas(), cr, 1e-8),
              1e-7 * indicator_Ms(gas(), sr, 1e-8));
}

TEST(IndicatorMc, ConstantEquilibriumGivesZero) {
  const Mesh1D mesh(0.0, 1.0, 4);
  const Vec U = equilibrium(2500.0, 1e5, 30.0);
  DGField f;
  f.model.assign(4, C);
  f.cells.assign(4, CellPoly::constant(U));
  const DGField p = project_to_simple(gas(), f);
  DGField zero = p;
  for (auto& c : zero.cells) {
    for (auto& v : c.c) v.setZero();
  }
  const auto slab = reconstruct_time(mesh, p, p, zero, 0.0, 1e-7);
  for (int i = 0; i < 4; ++i) {
    EXPECT_EQ(indicator_Mc(gas(), coarsening_residual(gas(), slab, i), 1e-8), 0.0);
    EXPECT_EQ(p.cells[i].c[0].size(), 4);
  }
}

TEST(CoarseningDistance, ZeroOnManifold) {
  const Vec U = equilibrium(2500.0, 1e5, 30.0);
  const double k = coarsening_distance(gas(), CellPoly::constant(U), 1e-7);
  EXPECT_LT(k, 1e-6);
}

TEST(CoarseningDistance, LinearInOffManifoldPerturbation) {
  const Vec U = equilibrium(2500.0, 1e5, 30.0);
  Vec d = Vec::Zero(5);
  d[o2::kO2] = -1.0;
  d[o2::kO] = 1.0;  // P d = 0: moves along the reaction direction only
  std::vector<double> logk, logd;
  for (double delta : {1e-7, 3e-7, 1e-6, 3e-6}) {
    const double k = coarsening_distance(gas(), CellPoly::constant(U + delta * d), 1e-7);
    logk.push_back(std::log(k));
    logd.push_back(std::log(delta));
  }
  for (std::size_t i = 1; i < logk.size(); ++i) {
    EXPECT_NEAR((logk[i] - logk[0]) / (logd[i] - logd[0]), 1.0, 0.02);
  }
}

TEST(CoarseningDistance, ScalesWithInverseRootDt) {
  Vec U = equilibrium(2500.0, 1e5, 30.0);
  U[o2::kO] += 1e-4;
  U[o2::kO2] -= 1e-4;
  const CellPoly p = CellPoly::constant(U);
  EXPECT_NEAR(coarsening_distance(gas(), p, 1e-8) / coarsening_distance(gas(), p, 4e-8), 2.0,
              1e-12);
}

TEST(CoarseningDistance, MaxwellianFailureIsNotCoarsenable) {
  Vec U = equilibrium(2500.0, 1e5, 30.0);
  U[4] = -1e9;
  EXPECT_EQ(coarsening_distance(gas(), CellPoly::constant(U), 1e-7), kNotCoarsenable);
}

TEST(Conversion, RoundTripOnManifoldIsIdentity) {
  const CellPoly u = simple_poly();
  const CellPoly back = convert_to_simple(gas(), convert_to_complex(gas(), u));
  for (int j = 0; j < basis::kDofs; ++j) {
    EXPECT_LT((back.c[j] - u.c[j]).cwiseQuotient(gas().simple_state_scale(u.c[0])).cwiseAbs()
                  .maxCoeff(),
              1e-10);
  }
}

TEST(Conversion, PreservesPMeans) {
  const CellPoly u = simple_poly();
  const CellPoly U = convert_to_complex(gas(), u);
  const Vec Pm = gas().projection() * U.mean();
  EXPECT_LT((Pm - u.mean()).cwiseQuotient(u.mean().cwiseAbs() + Vec::Constant(4, 1.0))
                .cwiseAbs()
                .maxCoeff(),
            1e-12);
}

TEST(Conversion, ModalProjectionEqualsNodal) {
  const CellPoly U = convert_to_complex(gas(), simple_poly());
  const CellPoly u = convert_to_simple(gas(), U);
  for (double xi : {-1.0, -0.2, 0.6, 1.0}) {
    const Vec nodal = gas().projection() * U.value(xi);
    EXPECT_LT((u.value(xi) - nodal).cwiseAbs().maxCoeff(), 1e-12 * nodal.cwiseAbs().maxCoeff());
  }
}

TEST(ConvertModels, CountsConservesAndReverts) {
  const int n = 6;
  DGField f;
  f.model.assign(n, S);
  for (int i = 0; i < n; ++i) f.cells.push_back(simple_poly());
  f.cells[4].c[0][3] = -1e9;  // cannot be lifted
  auto moments = [&](const DGField& g) {
    Vec tot = Vec::Zero(4);
    for (int i = 0; i < n; ++i) {
      tot += g.is_complex(i) ? Vec(gas().projection() * g.cells[i].mean()) : g.cells[i].mean();
    }
    return tot;
  };
  const Vec before = moments(f);
  std::vector<Model> target = from_bits({1, 1, 0, 0, 1, 0});
  std::vector<int> switches(n, 0);
  const auto rep = convert_models(gas(), f, target, &switches);
  EXPECT_EQ(rep.to_complex, 2);
  EXPECT_EQ(rep.failed, std::vector<int>{4});
  EXPECT_EQ(target[4], S);
  EXPECT_EQ(f.model, target);
  EXPECT_EQ(switches, (std::vector<int>{1, 1, 0, 0, 0, 0}));
  const Vec after = moments(f);
  // Cell 4 is untouched; compare the rest.
  EXPECT_LT(((after - before).cwiseQuotient(before.cwiseAbs())).cwiseAbs().maxCoeff(), 1e-11);

  std::vector<Model> back(n, S);
  const auto rep2 = convert_models(gas(), f, back, &switches);
  EXPECT_EQ(rep2.to_simple, 2);
  EXPECT_EQ(switches, (std::vector<int>{2, 2, 0, 0, 0, 0}));
  EXPECT_LT(((moments(f) - before).cwiseQuotient(before.cwiseAbs())).cwiseAbs().maxCoeff(), 1e-11);
}
