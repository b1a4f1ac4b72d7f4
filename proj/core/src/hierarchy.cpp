#include "madapt/hierarchy.hpp"

#include "madapt/finite_difference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace madapt {

namespace {

Vec fd_scale_complex(const ModelHierarchy& h, const Vec& U) { return h.state_scale(U); }

std::string describe(const Vec& U) {
  std::ostringstream os;
  os.precision(17);
  os << "(";
  for (Eigen::Index k = 0; k < U.size(); ++k) os << (k ? ", " : "") << U[k];
  os << ")";
  return os.str();
}

}  // namespace

void ModelHierarchy::require_admissible(const Vec& U) const {
  for (Eigen::Index k = 0; k < U.size(); ++k) {
    if (!std::isfinite(U[k])) {
      throw DomainError("non-finite component " + component_name(static_cast<int>(k)),
                        static_cast<int>(k));
    }
    if (component_positive(static_cast<int>(k)) && !(U[k] > 0.0)) {
      throw DomainError("nonpositive " + component_name(static_cast<int>(k)) + " in state " +
                            describe(U),
                        static_cast<int>(k));
    }
  }
  if (!admissible(U)) throw DomainError("inadmissible state " + describe(U));
}

Vec ModelHierarchy::state_scale(const Vec& U) const {
  Vec s = U.cwiseAbs();
  const double floor = std::max(1e-12, 1e-8 * s.maxCoeff());
  for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = std::max(s[k], floor);
  return s;
}

Vec ModelHierarchy::simple_state_scale(const Vec& u) const {
  Vec s = u.cwiseAbs();
  const double floor = std::max(1e-12, 1e-8 * s.maxCoeff());
  for (Eigen::Index k = 0; k < s.size(); ++k) s[k] = std::max(s[k], floor);
  return s;
}

Mat ModelHierarchy::flux_jacobian(const Vec& U) const { return numeric::flux_jacobian(*this, U); }
Vec ModelHierarchy::entropy_gradient(const Vec& U) const {
  return numeric::entropy_gradient(*this, U);
}
Mat ModelHierarchy::entropy_hessian(const Vec& U) const {
  return numeric::entropy_hessian(*this, U);
}
Mat ModelHierarchy::source_jacobian(const Vec& U) const {
  return numeric::source_jacobian(*this, U);
}
Mat ModelHierarchy::maxwellian_jacobian(const Vec& u) const {
  return numeric::maxwellian_jacobian(*this, u);
}

const Vec& MaxwellianMemo::lift(const ModelHierarchy& h, const Vec& input) {
  if (u.size() == input.size() && u == input) return M;
  M = h.maxwellian(input, M.size() == h.complex_dim() ? &M : nullptr);
  u = input;
  has_jacobian = false;
  return M;
}

const Mat& MaxwellianMemo::jacobian(const ModelHierarchy& h, const Vec& input) {
  lift(h, input);
  if (!has_jacobian) {
    dM = h.maxwellian_jacobian(u, M);
    has_jacobian = true;
  }
  return dM;
}

namespace numeric {

Mat flux_jacobian(const ModelHierarchy& h, const Vec& U) {
  return fd::jacobian([&](const Vec& x) { return h.flux(x); }, U, fd_scale_complex(h, U));
}

Vec entropy_gradient(const ModelHierarchy& h, const Vec& U) {
  return fd::gradient([&](const Vec& x) { return h.entropy(x); }, U, fd_scale_complex(h, U));
}

Mat entropy_hessian(const ModelHierarchy& h, const Vec& U) {
  // Differences of the gradient are far less noisy than second differences of H.
  Mat J = fd::jacobian([&](const Vec& x) { return h.entropy_gradient(x); }, U,
                       fd_scale_complex(h, U));
  return 0.5 * (J + J.transpose());
}

Mat source_jacobian(const ModelHierarchy& h, const Vec& U) {
  return fd::jacobian([&](const Vec& x) { return h.source(x); }, U, fd_scale_complex(h, U));
}

Mat maxwellian_jacobian(const ModelHierarchy& h, const Vec& u) {
  const Vec base = h.maxwellian(u);
  return fd::jacobian([&](const Vec& x) { return h.maxwellian(x, &base); }, u,
                      h.simple_state_scale(u));
}

Mat flux_component_hessian(const ModelHierarchy& h, const Vec& U, int i) {
  Mat Hs = fd::jacobian([&](const Vec& x) -> Vec { return h.flux_jacobian(x).row(i).transpose(); },
                        U, fd_scale_complex(h, U));
  return 0.5 * (Hs + Hs.transpose());
}

Mat entropy_gradient_component_hessian(const ModelHierarchy& h, const Vec& U, int i) {
  Mat Hs = fd::jacobian(
      [&](const Vec& x) -> Vec { return h.entropy_hessian(x).row(i).transpose(); }, U,
      fd_scale_complex(h, U));
  return 0.5 * (Hs + Hs.transpose());
}

Mat maxwellian_component_hessian(const ModelHierarchy& h, const Vec& u, int k) {
  Mat Hs = fd::jacobian(
      [&](const Vec& x) -> Vec { return h.maxwellian_jacobian(x).row(k).transpose(); }, u,
      h.simple_state_scale(u));
  return 0.5 * (Hs + Hs.transpose());
}

}  // namespace numeric

bool ConvexStateSet::contains(const Vec& U) const {
  if (U.size() != lower.size()) return false;
  for (Eigen::Index k = 0; k < U.size(); ++k) {
    if (!(U[k] >= lower[k] && U[k] <= upper[k])) return false;
  }
  return true;
}

void ConvexStateSet::validate() const {
  if (lower.size() == 0 || lower.size() != upper.size()) {
    throw ConfigError("state set bounds must be non-empty and of equal dimension");
  }
  if (samples_per_axis < 1) throw ConfigError("state set needs at least one sample per axis");
  for (Eigen::Index k = 0; k < lower.size(); ++k) {
    if (!std::isfinite(lower[k]) || !std::isfinite(upper[k])) {
      throw ConfigError("state set bound " + std::to_string(k) + " is not finite");
    }
    if (!(lower[k] < upper[k])) {
      throw ConfigError("state set bound " + std::to_string(k) + ": lower must be < upper");
    }
  }
}

std::int64_t ConvexStateSet::grid_size() const {
  std::int64_t n = 1;
  for (int k = 0; k < dim(); ++k) n *= samples_per_axis;
  return n;
}

Vec ConvexStateSet::grid_point(std::int64_t flat_index) const {
  Vec U(dim());
  for (int k = 0; k < dim(); ++k) {
    const auto i = flat_index % samples_per_axis;
    flat_index /= samples_per_axis;
    const double s = samples_per_axis == 1
                         ? 0.5
                         : static_cast<double>(i) / static_cast<double>(samples_per_axis - 1);
    U[k] = lower[k] + s * (upper[k] - lower[k]);
  }
  return U;
}

ConvexStateSet ConvexStateSet::around(const ModelHierarchy& h, const std::vector<Vec>& states,
                                      double factor, double density_floor, int samples_per_axis) {
  if (states.empty()) throw ConfigError("cannot build a state set from no states");
  if (!(factor >= 1.0)) throw ConfigError("state set inflation factor must be >= 1");
  const Eigen::Index n = states.front().size();
  Vec lo = states.front(), hi = states.front(), mean = Vec::Zero(n);
  for (const auto& s : states) {
    lo = lo.cwiseMin(s);
    hi = hi.cwiseMax(s);
    mean += s;
  }
  mean /= static_cast<double>(states.size());
  const Vec scale = h.state_scale(mean);
  ConvexStateSet set;
  set.samples_per_axis = samples_per_axis;
  set.lower.resize(n);
  set.upper.resize(n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const double centre = 0.5 * (lo[k] + hi[k]);
    // Components centred at zero (momentum at rest) get a quarter of the state scale.
    const double magnitude =
        std::abs(centre) > 1e-6 * scale[k] ? std::abs(centre) : 0.25 * scale[k];
    const double half =
        std::max(0.5 * (hi[k] - lo[k]) * factor, std::max(factor - 1.0, 0.05) * magnitude);
    set.lower[k] = centre - half;
    set.upper[k] = centre + half;
    if (h.component_positive(static_cast<int>(k))) {
      set.lower[k] = std::max(set.lower[k], density_floor);
    }
  }
  set.validate();
  return set;
}

double relative_entropy(const ModelHierarchy& h, const Vec& U, const Vec& V) {
  const double r = h.entropy(U) - h.entropy(V) - h.entropy_gradient(V).dot(U - V);
  if (!std::isfinite(r)) {
    h.require_admissible(U);
    h.require_admissible(V);
    throw DomainError("relative entropy is not finite");
  }
  return r;
}

double relative_entropy_flux(const ModelHierarchy& h, const Vec& U, const Vec& V) {
  const double r = h.entropy_flux(U) - h.entropy_flux(V) -
                   h.entropy_gradient(V).dot(h.flux(U) - h.flux(V));
  if (!std::isfinite(r)) {
    h.require_admissible(U);
    h.require_admissible(V);
    throw DomainError("relative entropy flux is not finite");
  }
  return r;
}

double relative_dissipation(const ModelHierarchy& h, const Vec& U, const Vec& V) {
  const double r =
      -(h.entropy_gradient(U) - h.entropy_gradient(V)).dot(h.source(U) - h.source(V));
  if (!std::isfinite(r)) {
    h.require_admissible(U);
    h.require_admissible(V);
    throw DomainError("relative entropy dissipation is not finite");
  }
  return r;
}

Vec simple_flux_g(const ModelHierarchy& h, const Vec& u) {
  return h.projection() * h.flux(h.maxwellian(u));
}

std::pair<double, double> induced_entropy(const ModelHierarchy& h, const Vec& u) {
  const Vec U = h.maxwellian(u);
  return {h.entropy(U), h.entropy_flux(U)};
}

Mat induced_entropy_hessian(const ModelHierarchy& h, const Vec& u) {
  const Vec U = h.maxwellian(u);
  const Mat J = h.maxwellian_jacobian(u);
  return J.transpose() * h.entropy_hessian(U) * J;
}

Mat simple_flux_jacobian(const ModelHierarchy& h, const Vec& u) {
  const Vec U = h.maxwellian(u);
  return h.projection() * h.flux_jacobian(U) * h.maxwellian_jacobian(u);
}

double entropy_compatibility_residual(const ModelHierarchy& h, const Vec& U, double rel) {
  if (rel <= 0.0) rel = fd::default_rel_first();
  const Vec scale = h.state_scale(U);
  const Vec dQ = fd::gradient([&](const Vec& x) { return h.entropy_flux(x); }, U, scale, rel);
  const Vec dH = fd::gradient([&](const Vec& x) { return h.entropy(x); }, U, scale, rel);
  const Mat dF = fd::jacobian([&](const Vec& x) { return h.flux(x); }, U, scale, rel);
  const Vec rhs = (dH.transpose() * dF).transpose();
  // Componentwise magnitude of the summed terms; cancellation-free normalisation.
  const Vec mag = (dH.cwiseAbs().transpose() * dF.cwiseAbs()).transpose();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < U.size(); ++j) {
    const double denom = std::max({mag[j], std::abs(dQ[j]), 1e-300});
    worst = std::max(worst, std::abs(dQ[j] - rhs[j]) / denom);
  }
  return worst;
}

double induced_compatibility_residual(const ModelHierarchy& h, const Vec& u, double rel) {
  if (rel <= 0.0) rel = fd::default_rel_first();
  const Vec scale = h.simple_state_scale(u);
  const Vec base = h.maxwellian(u);
  auto lift = [&](const Vec& x) { return h.maxwellian(x, &base); };
  const Vec dq = fd::gradient([&](const Vec& x) { return h.entropy_flux(lift(x)); }, u, scale, rel);
  const Vec deta = fd::gradient([&](const Vec& x) { return h.entropy(lift(x)); }, u, scale, rel);
  const Mat dg =
      fd::jacobian([&](const Vec& x) -> Vec { return h.projection() * h.flux(lift(x)); }, u, scale, rel);
  const Vec rhs = (deta.transpose() * dg).transpose();
  const Vec mag = (deta.cwiseAbs().transpose() * dg.cwiseAbs()).transpose();
  double worst = 0.0;
  for (Eigen::Index j = 0; j < u.size(); ++j) {
    const double denom = std::max({mag[j], std::abs(dq[j]), 1e-300});
    worst = std::max(worst, std::abs(dq[j] - rhs[j]) / denom);
  }
  return worst;
}

CoercivityEstimate estimate_coercivity_nu(const ModelHierarchy& h, const std::vector<Vec>& samples) {
  CoercivityEstimate est;
  est.nu = std::numeric_limits<double>::infinity();
  const Mat& P = h.projection();
  for (const auto& U : samples) {
    if (!h.admissible(U)) continue;
    const Vec u = P * U;
    if (!h.simple_admissible(u)) continue;
    Vec V;
    try {
      V = h.maxwellian(u);
    } catch (const std::exception&) {
      continue;
    }
    const double dist2 = (U - V).squaredNorm();
    if (!(dist2 > 1e-20 * std::max(1.0, U.squaredNorm()))) continue;
    const double ratio = relative_dissipation(h, U, V) / dist2;
    ++est.used;
    if (ratio < est.nu) {
      est.nu = ratio;
      est.witness = U;
    }
  }
  if (est.used == 0) {
    throw DomainError(
        "coercivity estimate needs samples off the equilibrium manifold; all samples were "
        "equilibrium states or inadmissible");
  }
  if (!(est.nu > 0.0)) {
    throw DomainError("coercivity assumption violated: D(U|M(PU)) / |U - M(PU)|^2 = " +
                      std::to_string(est.nu) + " at state " + describe(est.witness));
  }
  return est;
}

CoercivityEstimate estimate_coercivity_nu(const ModelHierarchy& h, const ConvexStateSet& set,
                                          std::int64_t samples) {
  if (samples < 1) throw ConfigError("coercivity estimate needs at least one sample");
  set.validate();
  const std::int64_t total = set.grid_size();
  const std::int64_t stride = std::max<std::int64_t>(1, total / samples);
  std::vector<Vec> pts;
  for (std::int64_t i = 0; i < total && static_cast<std::int64_t>(pts.size()) < samples;
       i += stride) {
    pts.push_back(set.grid_point(i));
  }
  return estimate_coercivity_nu(h, pts);
}

HessianConstants compute_hessian_constants(const ModelHierarchy& h, const ConvexStateSet& set,
                                           int directions, std::uint64_t seed) {
  set.validate();
  const int M = h.complex_dim();
  const int m = h.simple_dim();
  const Mat& P = h.projection();

  std::vector<Vec> dirs;
  for (int k = 0; k < M; ++k) dirs.push_back(Vec::Unit(M, k));
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int d = 0; d < directions; ++d) {
    Vec v(M);
    for (int k = 0; k < M; ++k) v[k] = normal(rng);
    dirs.push_back(v.normalized());
  }

  HessianConstants c;
  c.C_H_lower = std::numeric_limits<double>::infinity();
  double C_h = 0.0;
  std::int64_t used = 0;
  const std::int64_t total = set.grid_size();
  std::vector<Mat> hessF(M), hessh(M), hessM(M);
  for (std::int64_t idx = 0; idx < total; ++idx) {
    const Vec U = set.grid_point(idx);
    if (!h.admissible(U)) {
      ++c.skipped;
      continue;
    }
    const Mat HH = h.entropy_hessian(U);
    Eigen::SelfAdjointEigenSolver<Mat> eig(HH, Eigen::EigenvaluesOnly);
    if (eig.info() != Eigen::Success || !HH.allFinite()) {
      ++c.skipped;
      continue;
    }
    ++used;
    c.C_H_lower = std::min(c.C_H_lower, eig.eigenvalues().minCoeff());
    c.C_H_upper = std::max(c.C_H_upper, eig.eigenvalues().maxCoeff());

    for (int i = 0; i < M; ++i) {
      hessF[i] = numeric::flux_component_hessian(h, U, i);
      hessh[i] = numeric::entropy_gradient_component_hessian(h, U, i);
    }
    const Vec u = P * U;
    bool have_maxwellian = h.simple_admissible(u);
    if (have_maxwellian) {
      try {
        for (int k = 0; k < M; ++k) hessM[k] = numeric::maxwellian_component_hessian(h, u, k);
      } catch (const std::exception&) {
        have_maxwellian = false;
      }
    }
    for (const auto& v : dirs) {
      double sF = 0.0, sh = 0.0;
      for (int i = 0; i < M; ++i) {
        const double a = v.dot(hessF[i] * v);
        const double b = v.dot(hessh[i] * v);
        sF += a * a;
        sh += b * b;
      }
      c.C_F = std::max(c.C_F, std::sqrt(sF));
      C_h = std::max(C_h, std::sqrt(sh));
      if (have_maxwellian) {
        const Vec pv = P * v;
        double sM = 0.0;
        for (int k = 0; k < M; ++k) {
          const double a = pv.dot(hessM[k] * pv);
          sM += a * a;
        }
        c.C_M = std::max(c.C_M, std::sqrt(sM));
      }
    }
  }
  (void)m;
  if (used == 0) throw DomainError("no admissible sample in the state set");
  if (!(c.C_H_lower > 0.0)) {
    throw DomainError("entropy is not strictly convex on the state set (min Hessian eigenvalue " +
                      std::to_string(c.C_H_lower) + ")");
  }
  c.C_H_upper = std::max(c.C_H_upper, C_h);
  return c;
}

}  // namespace madapt
