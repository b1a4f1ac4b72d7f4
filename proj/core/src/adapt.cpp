#include "madapt/adapt.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace madapt {

void AdaptConfig::validate() const {
  if (!(tau_r > 0.0)) throw ConfigError("adapt: tau_r must be positive");
  if (!(tau_kappa > 0.0)) throw ConfigError("adapt: tau_kappa must be positive");
  if (!(f_eps > 0.0 && f_eps < 1.0)) throw ConfigError("adapt: f_eps must lie in (0, 1)");
  if (!(eps_over_nu > 0.0) || !std::isfinite(eps_over_nu)) {
    throw ConfigError("adapt: eps_over_nu must be positive and finite");
  }
  if (min_patch < 1) throw ConfigError("adapt: min_patch must be at least 1");
}

ModelMap::ModelMap(int n, Model initial)
    : theta(n, initial), indicator(n, 0.0), kappa(n, 0.0), switches(n, 0) {}

int ModelMap::simple_cells() const {
  return static_cast<int>(std::count(theta.begin(), theta.end(), Model::simple));
}

// ---------------------------------------------------------------- indicators

double slab_indicator(const ModelHierarchy& h, const std::array<Vec, kSlabPoints>& lifted,
                      const std::array<Vec, kSlabPoints>& r, double eps_over_nu) {
  const auto& pts = slab_points();
  double sum = 0.0;
  for (int k = 0; k < kSlabPoints; ++k) {
    if (r[k].cwiseAbs().maxCoeff() == 0.0) continue;
    sum += pts[k].weight * (h.entropy_hessian(lifted[k]) * r[k]).squaredNorm();
  }
  return std::sqrt(eps_over_nu * sum);
}

double indicator_Ms(const ModelHierarchy& h, const std::array<SimpleResidual, kSlabPoints>& res,
                    double eps_over_nu) {
  std::array<Vec, kSlabPoints> lifted, r;
  for (int k = 0; k < kSlabPoints; ++k) {
    lifted[k] = res[k].lifted;
    r[k] = res[k].R_eps;
  }
  return slab_indicator(h, lifted, r, eps_over_nu);
}

namespace {

CoarseningResidual coarsening_parts(const ModelHierarchy& h, const Vec& u_c, const Vec& dxu_c,
                                    const Vec& lifted, const Mat& dM) {
  CoarseningResidual r;
  r.u_c = u_c;
  r.lifted = lifted;
  const Vec dxF = h.flux_jacobian(r.lifted) * (dM * dxu_c);
  r.R_eps_c = dxF - dM * (h.projection() * dxF);
  return r;
}

}  // namespace

CoarseningResidual coarsening_residual_at(const ModelHierarchy& h, const Vec& u_c,
                                          const Vec& dxu_c, const Vec* warm_start) {
  const Vec M = h.maxwellian(u_c, warm_start);
  return coarsening_parts(h, u_c, dxu_c, M, h.maxwellian_jacobian(u_c, M));
}

CoarseningResidual coarsening_residual_at(const ModelHierarchy& h, const Vec& u_c,
                                          const Vec& dxu_c, MaxwellianMemo& memo) {
  if (dxu_c.isZero(0.0)) return {u_c, memo.lift(h, u_c), Vec::Zero(h.complex_dim())};
  const Mat& dM = memo.jacobian(h, u_c);
  return coarsening_parts(h, u_c, dxu_c, memo.M, dM);
}

std::array<CoarseningResidual, kSlabPoints> coarsening_residual(
    const ModelHierarchy& h, const SlabReconstruction& projected, int i,
    std::array<MaxwellianMemo, kSlabPoints>* memo) {
  std::array<CoarseningResidual, kSlabPoints> out;
  const auto& pts = slab_points();
  for (int k = 0; k < kSlabPoints; ++k) {
    const auto& p = pts[k];
    const auto e = projected.eval(i, p.xi, p.tau);
    out[k] = memo ? coarsening_residual_at(h, e.value, e.dx, (*memo)[k])
                  : coarsening_residual_at(h, e.value, e.dx);
  }
  return out;
}

double indicator_Mc(const ModelHierarchy& h,
                    const std::array<CoarseningResidual, kSlabPoints>& res, double eps_over_nu) {
  std::array<Vec, kSlabPoints> lifted, r;
  for (int k = 0; k < kSlabPoints; ++k) {
    lifted[k] = res[k].lifted;
    r[k] = res[k].R_eps_c;
  }
  return slab_indicator(h, lifted, r, eps_over_nu);
}

double coarsening_distance(const ModelHierarchy& h, const CellPoly& U, double dt,
                           std::array<MaxwellianMemo, basis::kQuad>* memo) {
  double sum = 0.0;
  for (int q = 0; q < basis::kQuad; ++q) {
    const Vec Uq = U.at_node(q);
    double H = 0.0;
    try {
      const Vec u = h.projection() * Uq;
      const Vec M = memo ? (*memo)[q].lift(h, u) : h.maxwellian(u);
      H = relative_entropy(h, Uq, M);
    } catch (const std::exception&) {
      return kNotCoarsenable;
    }
    if (!std::isfinite(H)) return kNotCoarsenable;
    sum += 0.5 * basis::kWeights[q] * std::max(H, 0.0);
  }
  return std::sqrt(sum / dt);
}

DGField project_to_simple(const ModelHierarchy& h, const DGField& f) {
  DGField out;
  out.model = f.model;
  out.cells.resize(f.cells.size());
  for (int i = 0; i < f.size(); ++i) {
    out.cells[i] = f.is_complex(i) ? convert_to_simple(h, f.cells[i]) : f.cells[i];
  }
  return out;
}

// ---------------------------------------------------------------- switching

std::vector<Model> algorithm1_update(const std::vector<Model>& theta,
                                     const std::vector<double>& indicator,
                                     const std::vector<double>& kappa, const AdaptConfig& cfg) {
  if (indicator.size() != theta.size() || kappa.size() != theta.size()) {
    throw std::invalid_argument("algorithm1_update: size mismatch");
  }
  std::vector<Model> next = theta;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (theta[i] == Model::complex && indicator[i] < cfg.f_eps * cfg.tau_r &&
        kappa[i] < cfg.tau_kappa) {
      next[i] = Model::simple;
    } else if (theta[i] == Model::simple && indicator[i] > cfg.tau_r) {
      next[i] = Model::complex;
    }
  }
  return next;
}

std::vector<Model> patch_postprocess(std::vector<Model> theta, int min_patch, bool periodic) {
  const int n = static_cast<int>(theta.size());
  if (n == 0 || min_patch <= 1) return theta;
  const auto first_complex = std::find(theta.begin(), theta.end(), Model::complex);
  if (first_complex == theta.end()) {
    // One run covering everything.
    if (n < min_patch) std::fill(theta.begin(), theta.end(), Model::complex);
    return theta;
  }
  auto flush = [&](int begin, int len) {
    if (len > 0 && len < min_patch) {
      for (int k = 0; k < len; ++k) theta[(begin + k) % n] = Model::complex;
    }
  };
  // Periodic scans start just after a complex cell so a wrapped run is seen whole.
  const int offset = periodic ? static_cast<int>(first_complex - theta.begin()) + 1 : 0;
  int begin = 0, len = 0;
  for (int k = 0; k < n; ++k) {
    const int i = (offset + k) % n;
    if (theta[i] == Model::simple) {
      if (len == 0) begin = i;
      ++len;
    } else {
      flush(begin, len);
      len = 0;
    }
  }
  flush(begin, len);
  return theta;
}

// ---------------------------------------------------------------- conversion

CellPoly convert_to_simple(const ModelHierarchy& h, const CellPoly& U) {
  CellPoly u;
  for (int j = 0; j < basis::kDofs; ++j) u.c[j] = h.projection() * U.c[j];
  return u;
}

CellPoly convert_to_complex(const ModelHierarchy& h, const CellPoly& u,
                            const std::array<Vec, basis::kQuad>* warm) {
  const auto& t = basis::tables();
  CellPoly U;
  for (int q = 0; q < basis::kQuad; ++q) {
    const Vec* ws = (warm && (*warm)[q].size() > 0) ? &(*warm)[q] : nullptr;
    const Vec M = h.maxwellian(u.at_node(q), ws);
    for (int j = 0; j < basis::kDofs; ++j) {
      const Vec term = (0.5 * basis::kWeights[q] * t.phi_q[j][q]) * M;
      if (q == 0) {
        U.c[j] = term;
      } else {
        U.c[j] += term;
      }
    }
  }
  return U;
}

ConversionReport convert_models(const ModelHierarchy& h, DGField& f, std::vector<Model>& target,
                                std::vector<int>* switches) {
  if (static_cast<int>(target.size()) != f.size()) {
    throw std::invalid_argument("convert_models: size mismatch");
  }
  ConversionReport rep;
  for (int i = 0; i < f.size(); ++i) {
    if (f.model[i] == target[i]) continue;
    if (target[i] == Model::simple) {
      f.cells[i] = convert_to_simple(h, f.cells[i]);
      ++rep.to_simple;
    } else {
      try {
        f.cells[i] = convert_to_complex(h, f.cells[i]);
      } catch (const std::exception&) {
        target[i] = f.model[i];
        rep.failed.push_back(i);
        continue;
      }
      ++rep.to_complex;
    }
    f.model[i] = target[i];
    if (switches) ++(*switches)[i];
  }
  return rep;
}

}  // namespace madapt
