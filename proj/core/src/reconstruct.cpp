#include "madapt/reconstruct.hpp"

#include <ostream>
#include <sstream>
#include <stdexcept>

namespace madapt {

namespace {

std::string where(const SlabReconstruction& r, int i, const SlabPoint& p) {
  std::ostringstream os;
  os << "cell " << i << ", xi = " << p.xi << ", t = " << r.t0 + p.tau * r.dt;
  return os.str();
}

bool same_subdomain(const DGField& f, int i, int j) { return j >= 0 && f.model[i] == f.model[j]; }

}  // namespace

Vec CubicPoly::value(double xi) const {
  Vec v = d[0];
  for (int j = 1; j < 4; ++j) v += basis::phi(j, xi) * d[j];
  return v;
}

Vec CubicPoly::dxi(double xi) const {
  Vec v = basis::dphi(1, xi) * d[1];
  for (int j = 2; j < 4; ++j) v += basis::dphi(j, xi) * d[j];
  return v;
}

std::vector<CubicPoly> reconstruct_space(const Mesh1D& mesh, const DGField& f) {
  const int n = f.size();
  std::vector<CubicPoly> out(n);
  for (int i = 0; i < n; ++i) {
    const CellPoly& p = f.cells[i];
    const int L = mesh.neighbour(i, -1);
    const int R = mesh.neighbour(i, +1);
    Vec aL = p.left_trace();
    Vec aR = p.right_trace();
    if (same_subdomain(f, i, L)) aL = 0.5 * (aL + f.cells[L].right_trace());
    if (same_subdomain(f, i, R)) aR = 0.5 * (aR + f.cells[R].left_trace());
    CubicPoly& c = out[i];
    c.d[0] = p.c[0];
    c.d[1] = p.c[1];
    c.d[2] = (aR + aL - 2.0 * p.c[0]) / (2.0 * basis::kSqrt5);
    c.d[3] = (aR - aL - 2.0 * basis::kSqrt3 * p.c[1]) / (2.0 * basis::kSqrt7);
  }
  return out;
}

Vec SlabReconstruction::value(int i, double xi, double tau) const {
  const Vec A = start[i].value(xi);
  const Vec B = end[i].value(xi);
  const Vec D = end_rate[i].value(xi);
  const Vec b = 2.0 * (B - A) - dt * D;
  const Vec c = dt * D - (B - A);
  return A + tau * b + tau * tau * c;
}

Vec SlabReconstruction::dx(int i, double xi, double tau) const {
  const Vec A = start[i].dxi(xi);
  const Vec B = end[i].dxi(xi);
  const Vec D = end_rate[i].dxi(xi);
  const Vec b = 2.0 * (B - A) - dt * D;
  const Vec c = dt * D - (B - A);
  return (2.0 / h) * (A + tau * b + tau * tau * c);
}

Vec SlabReconstruction::dt_value(int i, double xi, double tau) const {
  const Vec A = start[i].value(xi);
  const Vec B = end[i].value(xi);
  const Vec D = end_rate[i].value(xi);
  const Vec b = 2.0 * (B - A) - dt * D;
  const Vec c = dt * D - (B - A);
  return (b + 2.0 * tau * c) / dt;
}

SlabReconstruction::Point SlabReconstruction::eval(int i, double xi, double tau) const {
  const CubicPoly& s = start[i];
  const CubicPoly& e = end[i];
  const CubicPoly& r = end_rate[i];
  Point p;
  const Vec A = s.value(xi), B = e.value(xi), D = r.value(xi);
  const Vec b = 2.0 * (B - A) - dt * D;
  const Vec c = dt * D - (B - A);
  p.value = A + tau * b + tau * tau * c;
  p.dt = (b + 2.0 * tau * c) / dt;
  const Vec Ax = s.dxi(xi), Bx = e.dxi(xi), Dx = r.dxi(xi);
  p.dx = (2.0 / h) * (Ax + tau * (2.0 * (Bx - Ax) - dt * Dx) + tau * tau * (dt * Dx - (Bx - Ax)));
  return p;
}

SlabReconstruction reconstruct_time(std::vector<CubicPoly> start, std::vector<CubicPoly> end,
                                    std::vector<CubicPoly> end_rate, std::vector<Model> model,
                                    double t0, double dt, double h) {
  if (!(dt > 0.0)) throw std::invalid_argument("reconstruct_time: dt must be positive");
  if (start.size() != model.size() || end.size() != model.size() ||
      end_rate.size() != model.size()) {
    throw std::invalid_argument("reconstruct_time: size mismatch");
  }
  SlabReconstruction r;
  r.t0 = t0;
  r.dt = dt;
  r.h = h;
  r.model = std::move(model);
  r.start = std::move(start);
  r.end = std::move(end);
  r.end_rate = std::move(end_rate);
  return r;
}

SlabReconstruction reconstruct_time(const Mesh1D& mesh, const DGField& U_start,
                                    const DGField& U_end, const DGField& rate_end, double t0,
                                    double dt) {
  if (U_start.model != U_end.model || U_end.model != rate_end.model) {
    throw std::invalid_argument("reconstruct_time: fields must share the model map");
  }
  return reconstruct_time(reconstruct_space(mesh, U_start), reconstruct_space(mesh, U_end),
                          reconstruct_space(mesh, rate_end), U_end.model, t0, dt, mesh.h());
}

const std::array<SlabPoint, kSlabPoints>& slab_points() {
  static const std::array<SlabPoint, kSlabPoints> pts = [] {
    std::array<SlabPoint, kSlabPoints> p{};
    int k = 0;
    for (int qt = 0; qt < 2; ++qt) {
      for (int qx = 0; qx < basis::kQuad; ++qx) {
        p[k++] = {basis::kNodes[qx], basis::kTimeNodes[qt],
                  0.5 * basis::kWeights[qx] * basis::kTimeWeights[qt]};
      }
    }
    return p;
  }();
  return pts;
}

Vec complex_residual_at(const ModelHierarchy& h, const Vec& U, const Vec& dxU, const Vec& dtU) {
  return dtU + h.flux_jacobian(U) * dxU - h.source(U) / h.epsilon();
}

namespace {

SimpleResidual simple_parts(const ModelHierarchy& h, const Vec& u, const Vec& dxu, const Vec& dtu,
                            const Vec& lifted, const Mat& dM) {
  SimpleResidual r;
  r.u = u;
  r.lifted = lifted;
  r.dx_lifted = dM * dxu;
  const Vec dxF = h.flux_jacobian(r.lifted) * r.dx_lifted;
  r.r_s = dtu + h.projection() * dxF;
  r.R_s = dM * dtu + dxF;
  r.R_delta = dM * r.r_s;
  r.R_eps = r.R_s - r.R_delta;
  return r;
}

}  // namespace

SimpleResidual simple_residual_at(const ModelHierarchy& h, const Vec& u, const Vec& dxu,
                                  const Vec& dtu, const Vec* warm_start) {
  const Vec M = h.maxwellian(u, warm_start);
  return simple_parts(h, u, dxu, dtu, M, h.maxwellian_jacobian(u, M));
}

SimpleResidual simple_residual_at(const ModelHierarchy& h, const Vec& u, const Vec& dxu,
                                  const Vec& dtu, MaxwellianMemo& memo) {
  if (dxu.isZero(0.0) && dtu.isZero(0.0)) {
    const Vec z = Vec::Zero(h.complex_dim());
    return {u, memo.lift(h, u), z, Vec::Zero(u.size()), z, z, z};
  }
  const Mat& dM = memo.jacobian(h, u);
  return simple_parts(h, u, dxu, dtu, memo.M, dM);
}

std::array<ComplexResidual, kSlabPoints> residual_complex(const ModelHierarchy& h,
                                                          const SlabReconstruction& r, int i) {
  std::array<ComplexResidual, kSlabPoints> out;
  const auto& pts = slab_points();
  for (int k = 0; k < kSlabPoints; ++k) {
    const auto& p = pts[k];
    auto e = r.eval(i, p.xi, p.tau);
    if (!h.admissible(e.value)) {
      throw PhysicsError("inadmissible reconstruction at " + where(r, i, p));
    }
    out[k].source = h.source(e.value);
    out[k].R_c = e.dt + h.flux_jacobian(e.value) * e.dx - out[k].source / h.epsilon();
    out[k].U = std::move(e.value);
    out[k].dxU = std::move(e.dx);
  }
  return out;
}

std::array<SimpleResidual, kSlabPoints> residual_simple(const ModelHierarchy& h,
                                                        const SlabReconstruction& r, int i,
                                                        std::array<MaxwellianMemo, kSlabPoints>* memo) {
  std::array<SimpleResidual, kSlabPoints> out;
  const auto& pts = slab_points();
  for (int k = 0; k < kSlabPoints; ++k) {
    const auto& p = pts[k];
    const auto e = r.eval(i, p.xi, p.tau);
    try {
      out[k] = memo ? simple_residual_at(h, e.value, e.dx, e.dt, (*memo)[k])
                    : simple_residual_at(h, e.value, e.dx, e.dt);
    } catch (const PhysicsError&) {
      throw;
    } catch (const std::exception& e) {
      throw PhysicsError("Maxwellian failed at " + where(r, i, p) + ": " + e.what());
    }
  }
  return out;
}

void write_residual_csv(std::ostream& os, const ModelHierarchy& h, const Mesh1D& mesh,
                        const SlabReconstruction& r) {
  os << "# madapt residuals v1\n";
  os << "cell,x,t,theta,R_c,r_s,R_s,R_delta,R_eps\n";
  os.precision(10);
  const auto& pts = slab_points();
  for (int i = 0; i < r.size(); ++i) {
    if (r.model[i] == Model::complex) {
      const auto res = residual_complex(h, r, i);
      for (int k = 0; k < kSlabPoints; ++k) {
        os << i << ',' << mesh.x(i, pts[k].xi) << ',' << r.t0 + pts[k].tau * r.dt << ",1,"
           << res[k].R_c.norm() << ",,,,\n";
      }
    } else {
      const auto res = residual_simple(h, r, i);
      for (int k = 0; k < kSlabPoints; ++k) {
        os << i << ',' << mesh.x(i, pts[k].xi) << ',' << r.t0 + pts[k].tau * r.dt << ",0,,"
           << res[k].r_s.norm() << ',' << res[k].R_s.norm() << ',' << res[k].R_delta.norm()
           << ',' << res[k].R_eps.norm() << '\n';
      }
    }
  }
}

}  // namespace madapt
