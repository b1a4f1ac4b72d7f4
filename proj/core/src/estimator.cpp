#include "madapt/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace madapt {

namespace {

constexpr std::array<double, 5> kG5x = {-0.90617984593866399, -0.53846931010568309, 0.0,
                                        0.53846931010568309, 0.90617984593866399};
constexpr std::array<double, 5> kG5w = {0.23692688505618909, 0.47862867049936647,
                                        0.56888888888888889, 0.47862867049936647,
                                        0.23692688505618909};

}  // namespace

// ---------------------------------------------------------------- accumulation

SlabAccumulator::SlabAccumulator(double t0, double dt, double h) : h_(h) {
  rec_.t0 = t0;
  rec_.dt = dt;
}

void SlabAccumulator::add_complex(const ModelHierarchy& hier,
                                  const std::array<ComplexResidual, kSlabPoints>& r) {
  const auto& pts = slab_points();
  const double eps = hier.epsilon();
  double sum = 0.0;
  for (int k = 0; k < kSlabPoints; ++k) {
    sum += pts[k].weight * (hier.entropy_hessian(r[k].U) * r[k].R_c).squaredNorm();
    rec_.sup_dxU = std::max(rec_.sup_dxU, r[k].dxU.norm());
    rec_.sup_source = std::max(rec_.sup_source, r[k].source.norm() / eps);
    rec_.sup_source_jac = std::max(rec_.sup_source_jac, hier.source_jacobian(r[k].U).norm() / eps);
  }
  rec_.D_c += 0.5 * sum * h_ * rec_.dt;
  rec_.has_complex = true;
}

void SlabAccumulator::add_simple(const ModelHierarchy& hier,
                                 const std::array<SimpleResidual, kSlabPoints>& r) {
  const auto& pts = slab_points();
  double d = 0.0, m = 0.0;
  for (int k = 0; k < kSlabPoints; ++k) {
    rec_.sup_dx_lifted = std::max(rec_.sup_dx_lifted, r[k].dx_lifted.norm());
    rec_.sup_R_eps = std::max(rec_.sup_R_eps, r[k].R_eps.norm());
    if (r[k].R_delta.isZero(0.0) && r[k].R_eps.isZero(0.0)) continue;
    const Mat H = hier.entropy_hessian(r[k].lifted);
    d += pts[k].weight * (H * r[k].R_delta).squaredNorm();
    m += pts[k].weight * (H * r[k].R_eps).squaredNorm();
  }
  rec_.D_s += 0.5 * d * h_ * rec_.dt;
  rec_.M_s_raw += m * h_ * rec_.dt;
  rec_.has_simple = true;
}

void SlabAccumulator::add_interface(double violation) {
  rec_.interface_violation = std::max(rec_.interface_violation, violation);
}

// ---------------------------------------------------------------- assembly

BoundReport assemble_bound(const EstimatorInputs& in, double t) {
  BoundReport b;
  b.t = t;
  b.I = in.I;
  b.constants = in.constants;
  b.nu = in.nu;
  const double tol = 1e-9 * std::max(t, 1e-300);
  double covered = 0.0;
  double sup_dxU = 0.0, sup_R = 0.0, sup_dR = 0.0, sup_dxM = 0.0, sup_Reps = 0.0;
  bool any_simple = false, any_complex = false;
  std::ostringstream gaps;
  for (const auto& s : in.slabs) {
    if (s.t0 + s.dt > t + tol) continue;
    if (s.t0 > covered + tol) gaps << " [" << covered << ", " << s.t0 << "]";
    covered = std::max(covered, s.t0 + s.dt);
    b.D_c += s.D_c;
    b.D_s += s.D_s;
    b.M_s += s.M_s_raw;
    sup_dxU = std::max(sup_dxU, s.sup_dxU);
    sup_R = std::max(sup_R, s.sup_source);
    sup_dR = std::max(sup_dR, s.sup_source_jac);
    sup_dxM = std::max(sup_dxM, s.sup_dx_lifted);
    sup_Reps = std::max(sup_Reps, s.sup_R_eps);
    any_simple = any_simple || s.has_simple;
    any_complex = any_complex || s.has_complex;
    b.interface_violation = std::max(b.interface_violation, s.interface_violation);
  }
  if (covered < t - tol) gaps << " [" << covered << ", " << t << "]";
  if (!gaps.str().empty()) {
    throw std::runtime_error("estimator: no stored residuals for" + gaps.str());
  }
  b.M_s *= in.eps_over_nu;
  const auto& C = in.constants;
  const double k = kSupInflation;
  b.G_c = 0.5;
  if (any_complex) b.G_c += C.C_F * C.C_H_upper * k * sup_dxU + C.C_H_upper * k * (sup_R + sup_dR);
  b.G_s = 0.5;
  if (any_simple) {
    b.G_s += C.C_F * C.C_H_upper * k * sup_dxM +
             C.C_H_upper * C.C_M * in.P_norm * in.P_norm * k * sup_Reps;
  }
  if (!(C.C_H_lower > 0.0)) throw std::runtime_error("estimator: C_H_lower must be positive");
  const double sum = b.I + b.D_c + b.D_s + b.M_s;
  b.rhs = sum == 0.0 ? 0.0 : sum / C.C_H_lower * std::exp(std::max(b.G_c, b.G_s) * t / C.C_H_lower);
  return b;
}

// ---------------------------------------------------------------- computable terms

Vec lifted_reconstruction(const ModelHierarchy& h, const std::vector<Model>& model,
                          const std::vector<CubicPoly>& recon, int i, double xi) {
  const Vec v = recon[i].value(xi);
  return model[i] == Model::complex ? v : h.maxwellian(v);
}

double initial_relative_entropy(const ModelHierarchy& h, const Mesh1D& mesh,
                                const std::vector<Model>& model,
                                const std::vector<CubicPoly>& recon,
                                const std::function<Vec(double)>& U0) {
  double sum = 0.0;
  for (int i = 0; i < mesh.cells; ++i) {
    double cell = 0.0;
    for (int q = 0; q < 5; ++q) {
      const Vec V = lifted_reconstruction(h, model, recon, i, kG5x[q]);
      cell += 0.5 * kG5w[q] * relative_entropy(h, U0(mesh.x(i, kG5x[q])), V);
    }
    sum += mesh.h() * cell;
  }
  return sum;
}

double reconstruction_gap_sq(const ModelHierarchy& h, const Mesh1D& mesh, const DGField& f,
                             const std::vector<CubicPoly>& recon) {
  double sum = 0.0;
  for (int i = 0; i < f.size(); ++i) {
    double cell = 0.0;
    for (int q = 0; q < 5; ++q) {
      const Vec a = lifted_reconstruction(h, f.model, recon, i, kG5x[q]);
      const Vec v = f.cells[i].value(kG5x[q]);
      const Vec b = f.is_complex(i) ? v : h.maxwellian(v);
      cell += 0.5 * kG5w[q] * (a - b).squaredNorm();
    }
    sum += mesh.h() * cell;
  }
  return sum;
}

double reference_error_sq(const ModelHierarchy& h, const Mesh1D& mesh,
                          const std::vector<Model>& model, const std::vector<CubicPoly>& recon,
                          const Mesh1D& ref_mesh, const DGField& ref, bool* nested) {
  if (nested) {
    const double ratio = mesh.h() / ref_mesh.h();
    *nested = std::abs(ratio - std::round(ratio)) < 1e-9 && std::abs(mesh.a - ref_mesh.a) < 1e-12;
  }
  double sum = 0.0;
  for (int j = 0; j < ref.size(); ++j) {
    double cell = 0.0;
    for (int q = 0; q < 5; ++q) {
      const double x = ref_mesh.x(j, kG5x[q]);
      const int i = std::clamp(static_cast<int>(std::floor((x - mesh.a) / mesh.h())), 0,
                               mesh.cells - 1);
      const double xi = 2.0 * (x - mesh.centre(i)) / mesh.h();
      const Vec a = lifted_reconstruction(h, model, recon, i, xi);
      const Vec v = ref.cells[j].value(kG5x[q]);
      const Vec b = ref.is_complex(j) ? v : h.maxwellian(v);
      cell += 0.5 * kG5w[q] * (a - b).squaredNorm();
    }
    sum += ref_mesh.h() * cell;
  }
  return sum;
}

// ---------------------------------------------------------------- output

void write_bound_csv(std::ostream& os, const std::vector<BoundReport>& rows) {
  os << "# madapt bound v1\n";
  os << "t,I,D_c,D_s,M_s,G_c,G_s,rhs,interface_violation,C_H_lower,C_H_upper,C_F,C_M,nu\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.t << ',' << r.I << ',' << r.D_c << ',' << r.D_s << ',' << r.M_s << ',' << r.G_c << ','
       << r.G_s << ',' << r.rhs << ',' << r.interface_violation << ',' << r.constants.C_H_lower
       << ',' << r.constants.C_H_upper << ',' << r.constants.C_F << ',' << r.constants.C_M << ','
       << r.nu << '\n';
  }
}

void write_splitting_csv(std::ostream& os, const std::vector<SplittingRow>& rows) {
  os << "# madapt error splitting v1\n";
  os << "t,bound_sq,gap_sq,combined_sq,measured_sq,measured_recon_sq,interpolated\n";
  os.precision(17);
  for (const auto& r : rows) {
    os << r.t << ',' << r.bound_sq << ',' << r.gap_sq << ',' << r.combined_sq << ','
       << r.measured_sq << ',' << r.measured_recon_sq << ',' << (r.interpolated ? 1 : 0) << '\n';
  }
}

void write_bound_summary(std::ostream& os, const std::vector<BoundReport>& rows) {
  if (rows.empty()) {
    os << "no bound rows\n";
    return;
  }
  const auto& r = rows.back();
  os.precision(6);
  os << "t = " << r.t << "\n"
     << "  I   = " << r.I << "\n"
     << "  D_c = " << r.D_c << "\n"
     << "  D_s = " << r.D_s << "\n"
     << "  M_s = " << r.M_s << "\n"
     << "  G_c = " << r.G_c << ", G_s = " << r.G_s << "\n"
     << "  C_H_lower = " << r.constants.C_H_lower << ", C_H_upper = " << r.constants.C_H_upper
     << ", C_F = " << r.constants.C_F << ", C_M = " << r.constants.C_M << ", nu = " << r.nu << "\n"
     << "  bound = " << r.rhs << (std::isfinite(r.rhs) ? "" : " (exponential factor overflows)")
     << "\n"
     << "  interface violation |U - M(u)| = " << r.interface_violation << "\n";
}

}  // namespace madapt
