#include "madapt/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace madapt {

std::string to_string(RunMode m) {
  switch (m) {
    case RunMode::adaptive: return "adaptive";
    case RunMode::complex_only: return "complex-only";
    case RunMode::simple_only: return "simple-only";
  }
  return "?";
}

RunMode parse_run_mode(const std::string& s) {
  if (s == "adaptive") return RunMode::adaptive;
  if (s == "complex-only" || s == "complex_only" || s == "complex") return RunMode::complex_only;
  if (s == "simple-only" || s == "simple_only" || s == "simple") return RunMode::simple_only;
  throw ConfigError("unknown mode '" + s + "' (adaptive, complex-only, simple-only)");
}

Simulation::Simulation(const ModelHierarchy& h, const Mesh1D& mesh,
                       std::function<Vec(double)> U0, SimulationOptions opt)
    : h_(&h), opt_(opt), solver_(h, mesh, opt.dg) {
  if (!(opt_.cfl > 0.0 && opt_.cfl <= 0.1 + 1e-12)) {
    throw ConfigError("cfl must lie in (0, 0.1]");
  }
  if (opt_.dt_update_interval < 1) throw ConfigError("dt_update_interval must be >= 1");
  opt_.adapt.validate();
  const Model initial = opt_.mode == RunMode::simple_only ? Model::simple : Model::complex;
  U_ = solver_.project(U0, std::vector<Model>(mesh.cells, initial));
  rate_ = solver_.zero_like(U_);
  map_ = ModelMap(mesh.cells, initial);
  I_ = madapt::initial_relative_entropy(h, mesh, U_.model, reconstruct_space(mesh, U_), U0);
  warm_simple_.resize(mesh.cells);
  warm_coarse_.resize(mesh.cells);
  warm_kappa_.resize(mesh.cells);
}

double Simulation::suggested_dt() {
  if (dt_cached_ <= 0.0 || dt_age_ >= opt_.dt_update_interval) {
    dt_choice_ = solver_.choose_dt(U_, opt_.cfl);
    dt_cached_ = dt_choice_.dt;
    dt_age_ = 0;
  }
  return dt_cached_;
}

std::vector<CubicPoly> Simulation::reconstruction() const {
  return reconstruct_space(mesh(), U_);
}

Vec Simulation::lifted_mean(int i) const {
  if (U_.is_complex(i)) return U_.cells[i].mean();
  return convert_to_complex(*h_, U_.cells[i]).mean();
}

void Simulation::evaluate_slab(const DGField& U_start, const DGField& rate_end, double t0,
                               double dt, std::vector<double>& indicator,
                               std::vector<double>& kappa) {
  const bool indicators = opt_.mode == RunMode::adaptive || opt_.indicators_always;
  const Mesh1D& m = mesh();
  const int n = m.cells;
  const SlabReconstruction slab = reconstruct_time(m, U_start, U_, rate_end, t0, dt);
  SlabReconstruction projected;
  const bool any_complex =
      std::find(U_.model.begin(), U_.model.end(), Model::complex) != U_.model.end();
  if (indicators && any_complex) {
    projected = reconstruct_time(m, project_to_simple(*h_, U_start), project_to_simple(*h_, U_),
                                 project_to_simple(*h_, rate_end), t0, dt);
  }
  SlabAccumulator acc(t0, dt, m.h());
  for (int i = 0; i < n; ++i) {
    if (!U_.is_complex(i)) {
      const auto res = residual_simple(*h_, slab, i, &warm_simple_[i]);
      if (indicators) indicator[i] = indicator_Ms(*h_, res, opt_.adapt.eps_over_nu);
      if (opt_.record_slabs) acc.add_simple(*h_, res);
      if (opt_.check_identities) {
        const Mat& P = h_->projection();
        for (const auto& r : res) {
          const double scale = std::max(r.R_s.cwiseAbs().maxCoeff(), r.r_s.cwiseAbs().maxCoeff());
          ++ids_.points;
          if (scale == 0.0) continue;
          ids_.max_split = std::max(
              ids_.max_split, (r.R_delta + r.R_eps - r.R_s).cwiseAbs().maxCoeff() / scale);
          ids_.max_P_R_eps =
              std::max(ids_.max_P_R_eps, (P * r.R_eps).cwiseAbs().maxCoeff() / scale);
          ids_.max_P_Rs_minus_rs =
              std::max(ids_.max_P_Rs_minus_rs, (P * r.R_s - r.r_s).cwiseAbs().maxCoeff() / scale);
        }
      }
      continue;
    }
    if (opt_.record_slabs) acc.add_complex(*h_, residual_complex(*h_, slab, i));
    if (indicators) {
      kappa[i] = coarsening_distance(*h_, U_.cells[i], dt, &warm_kappa_[i]);
      if (opt_.lazy_indicators && !(kappa[i] < opt_.adapt.tau_kappa)) {
        indicator[i] = kNotCoarsenable;
        continue;
      }
      try {
        indicator[i] = indicator_Mc(
            *h_, coarsening_residual(*h_, projected, i, &warm_coarse_[i]), opt_.adapt.eps_over_nu);
      } catch (const std::exception&) {
        indicator[i] = kNotCoarsenable;
      }
    }
  }
  if (opt_.record_slabs) {
    for (int i = 0; i < n; ++i) {
      const int R = m.neighbour(i, 1);
      if (R < 0 || U_.model[i] == U_.model[R]) continue;
      const bool complex_left = U_.is_complex(i);
      const Vec Uc = complex_left ? slab.end[i].value(1.0) : slab.end[R].value(-1.0);
      const Vec us = complex_left ? slab.end[R].value(-1.0) : slab.end[i].value(1.0);
      try {
        acc.add_interface((Uc - h_->maxwellian(us)).norm());
      } catch (const std::exception&) {
        acc.add_interface(kNotCoarsenable);
      }
    }
    slabs_.push_back(acc.record());
  }
}

StepInfo Simulation::step(double dt) {
  StepInfo info;
  info.step = steps_ + 1;
  info.dt = dt;
  const int n = mesh().cells;
  std::vector<double> indicator(n, 0.0), kappa(n, 0.0);
  try {
    if (!rate_valid_) solver_.rate(U_, rate_);
    const DGField U_start = U_;
    solver_.ssp_rk3_step(U_, dt, &rate_);
    solver_.rate(U_, rate_);
    rate_valid_ = true;
    const bool indicators = opt_.mode == RunMode::adaptive || opt_.indicators_always;
    if (indicators || opt_.record_slabs || opt_.check_identities) {
      evaluate_slab(U_start, rate_, t_, dt, indicator, kappa);
    }
  } catch (const PhysicsError& e) {
    std::ostringstream os;
    os << "step " << info.step << " (t = " << t_ << "): " << e.what();
    throw PhysicsError(os.str());
  }
  t_ += dt;
  ++steps_;
  ++dt_age_;
  info.t = t_;
  map_.indicator = indicator;
  map_.kappa = kappa;
  if (opt_.mode == RunMode::adaptive) {
    std::vector<Model> target = patch_postprocess(
        algorithm1_update(U_.model, indicator, kappa, opt_.adapt), opt_.adapt.min_patch,
        mesh().periodic);
    const auto rep = convert_models(*h_, U_, target, &map_.switches);
    info.to_simple = rep.to_simple;
    info.to_complex = rep.to_complex;
    info.failed_conversions = static_cast<int>(rep.failed.size());
    if (rep.to_simple + rep.to_complex > 0) rate_valid_ = false;
    if (rep.to_complex > 0) dt_age_ = opt_.dt_update_interval;
  }
  map_.theta = U_.model;
  return info;
}

void Simulation::advance_to(double t_end, const std::function<void(const StepInfo&)>& on_step) {
  const double tol = 1e-12 * std::max(1.0, std::abs(t_end));
  while (t_ < t_end - tol) {
    const double dt_max = suggested_dt();
    const double remaining = t_end - t_;
    double dt = dt_max;
    if (remaining <= dt_max) {
      dt = remaining;
    } else if (remaining < 2.0 * dt_max) {
      dt = 0.5 * remaining;
    }
    const StepInfo info = step(dt);
    if (on_step) on_step(info);
  }
  t_ = std::max(t_, t_end);
}

}  // namespace madapt
