#include "madapt/dg_solver.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace madapt {

namespace {

constexpr int kSlots = 6;  // 3 Gauss nodes, 2 faces, mean
constexpr int kSlotLeft = 3;
constexpr int kSlotRight = 4;

double minmod(double a, double b, double c) {
  if (a > 0.0 && b > 0.0 && c > 0.0) return std::min({a, b, c});
  if (a < 0.0 && b < 0.0 && c < 0.0) return std::max({a, b, c});
  return 0.0;
}

std::string cell_context(const Mesh1D& mesh, int i) {
  std::ostringstream os;
  os << "cell " << i << " (x = " << mesh.centre(i) << ")";
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- mesh / field

Mesh1D::Mesh1D(double a_, double b_, int n, bool periodic_)
    : a(a_), b(b_), cells(n), periodic(periodic_) {
  if (!(b > a)) throw ConfigError("mesh: need b > a");
  if (n < 4) throw ConfigError("mesh: need at least 4 cells");
}

int Mesh1D::neighbour(int i, int offset) const {
  const int j = i + offset;
  if (j >= 0 && j < cells) return j;
  if (!periodic) return -1;
  return ((j % cells) + cells) % cells;
}

Vec CellPoly::value(double xi) const {
  Vec v = c[0];
  for (int j = 1; j < basis::kDofs; ++j) v += basis::phi(j, xi) * c[j];
  return v;
}

Vec CellPoly::dxi(double xi) const {
  Vec v = basis::dphi(1, xi) * c[1];
  for (int j = 2; j < basis::kDofs; ++j) v += basis::dphi(j, xi) * c[j];
  return v;
}

Vec CellPoly::at_node(int q) const {
  const auto& t = basis::tables();
  return c[0] + t.phi_q[1][q] * c[1] + t.phi_q[2][q] * c[2];
}

Vec CellPoly::left_trace() const {
  const auto& t = basis::tables();
  return c[0] + t.phi_left[1] * c[1] + t.phi_left[2] * c[2];
}

Vec CellPoly::right_trace() const {
  const auto& t = basis::tables();
  return c[0] + t.phi_right[1] * c[1] + t.phi_right[2] * c[2];
}

CellPoly CellPoly::constant(const Vec& v) {
  CellPoly p;
  p.c[0] = v;
  for (int j = 1; j < basis::kDofs; ++j) p.c[j] = Vec::Zero(v.size());
  return p;
}

void DGField::assign_combination(double a, const DGField& x, double b, const DGField& y) {
  const int n = x.size();
  cells.resize(n);
  model = x.model;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < basis::kDofs; ++j) {
      cells[i].c[j] = a * x.cells[i].c[j] + b * y.cells[i].c[j];
    }
  }
}

// ---------------------------------------------------------------- fluxes

Vec llf_flux(const Vec& UL, const Vec& UR, const std::function<Vec(const Vec&)>& flux_fn,
             double lambda) {
  return llf_flux(UL, UR, flux_fn(UL), flux_fn(UR), lambda);
}

CouplingFlux coupling_flux(const ModelHierarchy& h, const Vec& U_complex, const Vec& u_simple,
                           bool complex_on_left, const Vec* warm_start) {
  Vec lifted;
  try {
    lifted = h.maxwellian(u_simple, warm_start);
  } catch (const std::exception& e) {
    throw PhysicsError(std::string("Maxwellian failed at model interface: ") + e.what());
  }
  const double lambda = std::max(h.max_wave_speed(U_complex), h.max_wave_speed(lifted));
  CouplingFlux out;
  out.complex_side = complex_on_left
                         ? llf_flux(U_complex, lifted, h.flux(U_complex), h.flux(lifted), lambda)
                         : llf_flux(lifted, U_complex, h.flux(lifted), h.flux(U_complex), lambda);
  out.simple_side = h.projection() * out.complex_side;
  return out;
}

// ---------------------------------------------------------------- solver

DGSolver::DGSolver(const ModelHierarchy& h, Mesh1D mesh, DGOptions opt)
    : h_(&h), mesh_(mesh), opt_(opt) {
  if (mesh_.cells < 4) throw ConfigError("mesh: need at least 4 cells");
  if (opt_.tvb_M < 0.0) throw ConfigError("TVB constant must be nonnegative");
  warm_.assign(static_cast<std::size_t>(mesh_.cells) * kSlots, MaxwellianMemo{});
}

DGField DGSolver::zero_like(const DGField& f) const {
  DGField z;
  z.model = f.model;
  z.cells.resize(f.size());
  for (int i = 0; i < f.size(); ++i) {
    const int d = f.cells[i].dim();
    for (int j = 0; j < basis::kDofs; ++j) z.cells[i].c[j] = Vec::Zero(d);
  }
  return z;
}

DGField DGSolver::project(const std::function<Vec(double)>& U0,
                          const std::vector<Model>& model) const {
  if (static_cast<int>(model.size()) != mesh_.cells) {
    throw ConfigError("model map size does not match the mesh");
  }
  DGField f;
  f.model = model;
  f.cells.resize(mesh_.cells);
  const Mat& P = h_->projection();
  for (int i = 0; i < mesh_.cells; ++i) {
    CellPoly p = project_cell(mesh_, i, U0);
    if (model[i] == Model::simple) {
      for (int j = 0; j < basis::kDofs; ++j) p.c[j] = P * p.c[j];
    }
    f.cells[i] = std::move(p);
  }
  return f;
}

Vec DGSolver::lift(const Vec& u, int cell, int slot) const {
  ++maxwellian_calls_;
  if (slot < 0 || slot >= kSlots || cell < 0 || cell >= mesh_.cells) return h_->maxwellian(u);
  return warm_[static_cast<std::size_t>(cell) * kSlots + slot].lift(*h_, u);
}

Vec DGSolver::lifted_value(const DGField& f, int i, double xi) const {
  const Vec v = f.cells[i].value(xi);
  return f.is_complex(i) ? v : lift(v, i, -1);
}

Vec DGSolver::neighbour_mean_as(const DGField& f, int i, int nb) const {
  if (nb < 0) return f.cells[i].mean();
  const Vec& m = f.cells[nb].mean();
  if (f.model[nb] == f.model[i]) return m;
  if (f.is_complex(i)) return lift(m, nb, 5);
  return h_->projection() * m;
}

bool DGSolver::point_admissible(const DGField& f, int i, const Vec& v) const {
  return f.is_complex(i) ? h_->admissible(v) : h_->simple_admissible(v);
}

void DGSolver::rate(const DGField& f, DGField& out) const {
  const int n = mesh_.cells;
  const double hx = mesh_.h();
  const double inv_eps = 1.0 / h_->epsilon();
  const Mat& P = h_->projection();
  const auto& t = basis::tables();

  if (out.size() != n || out.model != f.model) out = zero_like(f);

  // Traces: own-model values, complex (lifted) values, fluxes in own model, speeds.
  struct Trace {
    Vec own, lifted, flux;
    double speed = 0.0;
  };
  std::vector<Trace> left(n), right(n);
  auto fill = [&](int i, Trace& tr, const Vec& v, int slot) {
    tr.own = v;
    if (f.is_complex(i)) {
      tr.lifted = v;
      tr.flux = h_->flux(v);
    } else {
      tr.lifted = lift(v, i, slot);
      tr.flux = P * h_->flux(tr.lifted);
    }
    tr.speed = h_->max_wave_speed(tr.lifted);
  };
  for (int i = 0; i < n; ++i) {
    try {
      fill(i, left[i], f.cells[i].left_trace(), kSlotLeft);
      fill(i, right[i], f.cells[i].right_trace(), kSlotRight);
    } catch (const PhysicsError&) {
      throw;
    } catch (const std::exception& e) {
      throw PhysicsError("trace evaluation failed in " + cell_context(mesh_, i) + ": " + e.what());
    }
  }

  // Face k separates cell k-1 (left) and cell k (right).
  const int faces = mesh_.periodic ? n : n + 1;
  std::vector<Vec> flux_into_left(faces), flux_into_right(faces);
  for (int k = 0; k < faces; ++k) {
    const int iL = mesh_.periodic ? (k + n - 1) % n : k - 1;
    const int iR = mesh_.periodic ? k : (k < n ? k : -1);
    // Transmissive boundary: the missing side copies the interior trace.
    const int cL = iL >= 0 ? iL : iR;
    const int cR = iR >= 0 ? iR : iL;
    const Trace& TL = iL >= 0 ? right[iL] : left[iR];
    const Trace& TR = iR >= 0 ? left[iR] : right[iL];
    const double lambda = std::max(TL.speed, TR.speed);
    const bool cxL = f.is_complex(cL), cxR = f.is_complex(cR);
    if (cxL == cxR) {
      const Vec F = llf_flux(TL.own, TR.own, TL.flux, TR.flux, lambda);
      flux_into_left[k] = F;
      flux_into_right[k] = F;
    } else {
      // Complex side uses the LLF flux against the lifted simple trace.
      const Vec& UL = TL.lifted;
      const Vec& UR = TR.lifted;
      const Vec FL = cxL ? TL.flux : h_->flux(UL);
      const Vec FR = cxR ? TR.flux : h_->flux(UR);
      const Vec F = llf_flux(UL, UR, FL, FR, lambda);
      const Vec PF = P * F;
      flux_into_left[k] = cxL ? F : PF;
      flux_into_right[k] = cxR ? F : PF;
    }
  }

  for (int i = 0; i < n; ++i) {
    const int fl = i;
    const int fr = mesh_.periodic ? (i + 1) % n : i + 1;
    const Vec& FL = flux_into_right[fl];
    const Vec& FR = flux_into_left[fr];
    auto& r = out.cells[i];
    const CellPoly& p = f.cells[i];
    for (int j = 0; j < basis::kDofs; ++j) {
      r.c[j] = -(t.phi_right[j] * FR - t.phi_left[j] * FL) / hx;
    }
    try {
      for (int q = 0; q < basis::kQuad; ++q) {
        const Vec v = p.at_node(q);
        Vec Fq;
        if (f.is_complex(i)) {
          Fq = h_->flux(v);
          const Vec S = h_->source(v);
          for (int j = 0; j < basis::kDofs; ++j) {
            r.c[j] += (0.5 * basis::kWeights[q] * t.phi_q[j][q] * inv_eps) * S;
          }
        } else {
          Fq = P * h_->flux(lift(v, i, q));
        }
        for (int j = 1; j < basis::kDofs; ++j) {
          r.c[j] += (basis::kWeights[q] * t.dphi_q[j][q] / hx) * Fq;
        }
      }
    } catch (const PhysicsError&) {
      throw;
    } catch (const std::exception& e) {
      throw PhysicsError("quadrature evaluation failed in " + cell_context(mesh_, i) + ": " +
                         e.what());
    }
  }
}

LimiterStats DGSolver::limit(DGField& f) const {
  LimiterStats stats;
  const int n = mesh_.cells;
  const double tvb = opt_.tvb_M * mesh_.h() * mesh_.h();
  auto mm = [&](double a, double b, double c) {
    return std::abs(a) <= tvb ? a : minmod(a, b, c);
  };

  if (opt_.limiter) {
    // Neighbour means from the unlimited field; means never change, so one pass suffices.
    std::vector<Vec> meanL(n), meanR(n);
    for (int i = 0; i < n; ++i) {
      meanL[i] = neighbour_mean_as(f, i, mesh_.neighbour(i, -1));
      meanR[i] = neighbour_mean_as(f, i, mesh_.neighbour(i, +1));
    }
    for (int i = 0; i < n; ++i) {
      auto& c = f.cells[i].c;
      bool touched = false;
      for (int k = 0; k < c[0].size(); ++k) {
        const double dp = meanR[i][k] - c[0][k];
        const double dm = c[0][k] - meanL[i][k];
        const double uR = basis::kSqrt3 * c[1][k] + basis::kSqrt5 * c[2][k];
        const double uL = basis::kSqrt3 * c[1][k] - basis::kSqrt5 * c[2][k];
        if (mm(uR, dp, dm) != uR || mm(uL, dp, dm) != uL) {
          c[1][k] = mm(basis::kSqrt3 * c[1][k], dp, dm) / basis::kSqrt3;
          c[2][k] = 0.0;
          touched = true;
        }
      }
      if (touched) ++stats.limited_cells;
    }
  }

  if (opt_.positivity_fallback) {
    for (int i = 0; i < n; ++i) {
      auto& p = f.cells[i];
      bool ok = point_admissible(f, i, p.left_trace()) && point_admissible(f, i, p.right_trace());
      for (int q = 0; ok && q < basis::kQuad; ++q) ok = point_admissible(f, i, p.at_node(q));
      if (ok) continue;
      if (!point_admissible(f, i, p.mean())) {
        throw PhysicsError("inadmissible cell mean in " + cell_context(mesh_, i));
      }
      p.c[1].setZero();
      p.c[2].setZero();
      ++stats.p0_fallbacks;
    }
  }
  return stats;
}

void DGSolver::ssp_rk3_step(DGField& f, double dt, const DGField* rate_at_start) const {
  DGField L = rate_at_start ? *rate_at_start : zero_like(f);
  if (!rate_at_start) rate(f, L);

  DGField u1;
  u1.assign_combination(1.0, f, dt, L);
  limit(u1);

  rate(u1, L);
  DGField tmp;
  tmp.assign_combination(1.0, u1, dt, L);
  DGField u2;
  u2.assign_combination(0.75, f, 0.25, tmp);
  limit(u2);

  rate(u2, L);
  tmp.assign_combination(1.0, u2, dt, L);
  f.assign_combination(1.0 / 3.0, f, 2.0 / 3.0, tmp);
  limit(f);
}

double DGSolver::max_wave_speed(const DGField& f) const {
  double s = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    const Vec& m = f.cells[i].mean();
    s = std::max(s, h_->max_wave_speed(f.is_complex(i) ? m : lift(m, i, 5)));
  }
  return s;
}

double DGSolver::source_spectral_radius(const DGField& f) const {
  double r = 0.0;
  const double inv_eps = 1.0 / h_->epsilon();
  for (int i = 0; i < f.size(); ++i) {
    if (!f.is_complex(i)) continue;
    const Mat J = h_->source_jacobian(f.cells[i].mean()) * inv_eps;
    Eigen::EigenSolver<Mat> es(J, false);
    if (es.info() != Eigen::Success) continue;
    r = std::max(r, es.eigenvalues().cwiseAbs().maxCoeff());
  }
  return r;
}

TimeStepChoice DGSolver::choose_dt(const DGField& f, double cfl) const {
  if (!(cfl > 0.0)) throw ConfigError("CFL number must be positive");
  TimeStepChoice c;
  c.max_speed = max_wave_speed(f);
  c.dt_cfl = c.max_speed > 0.0 ? cfl * mesh_.h() / (opt_.speed_safety * c.max_speed)
                               : std::numeric_limits<double>::infinity();
  c.source_radius = source_spectral_radius(f);
  c.dt_source = c.source_radius > 0.0 ? opt_.source_sigma / c.source_radius
                                      : std::numeric_limits<double>::infinity();
  c.source_cap_active = c.dt_source < c.dt_cfl;
  c.dt = std::min(c.dt_cfl, c.dt_source);
  if (!std::isfinite(c.dt)) throw ConfigError("cannot choose a time step: no wave speed and no source");
  return c;
}

}  // namespace madapt
