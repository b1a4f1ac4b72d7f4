#include "madapt/run.hpp"

#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <ostream>

namespace madapt {

namespace {

constexpr double kDensityFloor = 1e-4;

nlohmann::json config_json(const RunConfig& c) {
  nlohmann::json j;
  j["mesh"] = {{"a", c.mesh.a}, {"b", c.mesh.b}, {"cells", c.mesh.cells},
               {"periodic", c.mesh.periodic}};
  j["t_final"] = c.t_final;
  j["cfl"] = c.sim.cfl;
  j["source_sigma"] = c.sim.dg.source_sigma;
  j["mode"] = to_string(c.sim.mode);
  j["adapt"] = {{"tau_r", c.sim.adapt.tau_r},
                {"tau_kappa", c.sim.adapt.tau_kappa},
                {"f_eps", c.sim.adapt.f_eps},
                {"min_patch", c.sim.adapt.min_patch}};
  j["preset"] = c.preset;
  j["initial"] = c.initial == InitialKind::shock_tube ? "shock_tube" : "constant";
  j["thermo_table"] = c.thermo_table.empty() ? "defaults" : c.thermo_table.string();
  return j;
}

std::ofstream open_out(const std::filesystem::path& p) {
  std::ofstream out(p);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  return out;
}

}  // namespace

ConvexStateSet shock_tube_box(const o2::O2Hierarchy& h, const RunConfig& c) {
  const auto [inner, outer] = shock_tube_states(h, c.shock);
  return ConvexStateSet::around(h, {inner, outer}, c.nu_box_factor, kDensityFloor,
                                c.nu_samples_per_axis);
}

CoercivityEstimate estimate_nu(const o2::O2Hierarchy& h, const RunConfig& c) {
  const ConvexStateSet box = shock_tube_box(h, c);
  return estimate_coercivity_nu(h, box, box.grid_size());
}

HessianConstants shock_tube_constants(const o2::O2Hierarchy& h, const RunConfig& c,
                                      int directions) {
  return compute_hessian_constants(h, shock_tube_box(h, c), directions);
}

double projection_norm(const ModelHierarchy& h) {
  Eigen::JacobiSVD<Mat> svd(h.projection());
  return svd.singularValues()(0);
}

void write_slab_csv(std::ostream& os, const std::vector<SlabRecord>& slabs) {
  const auto old = os.precision(17);
  os << "# madapt slabs v1\n";
  os << "t0,dt,D_c,D_s,M_s_raw,sup_dxU,sup_source,sup_source_jac,sup_dx_lifted,sup_R_eps,"
        "interface_violation,has_complex,has_simple\n";
  for (const auto& s : slabs) {
    os << s.t0 << ',' << s.dt << ',' << s.D_c << ',' << s.D_s << ',' << s.M_s_raw << ','
       << s.sup_dxU << ',' << s.sup_source << ',' << s.sup_source_jac << ',' << s.sup_dx_lifted
       << ',' << s.sup_R_eps << ',' << s.interface_violation << ',' << s.has_complex << ','
       << s.has_simple << '\n';
  }
  os.precision(old);
}

RunSummary execute_run(const RunConfig& c, bool write_files, const RunHooks& hooks) {
  c.validate();
  const o2::O2Hierarchy h(thermo_table(c));
  RunSummary sum;

  SimulationOptions opt = c.sim;
  if (c.eps_over_nu > 0.0) {
    opt.adapt.eps_over_nu = c.eps_over_nu;
  } else {
    const auto est = estimate_nu(h, c);
    sum.nu = est.nu;
    opt.adapt.eps_over_nu = h.epsilon() / est.nu;
    spdlog::info("nu = {:.6e} from {} samples", est.nu, est.used);
  }
  sum.eps_over_nu = opt.adapt.eps_over_nu;
  opt.record_slabs = opt.record_slabs && (c.write_slabs || c.write_bound);
  if (hooks.adjust) hooks.adjust(opt);

  if (write_files) std::filesystem::create_directories(c.out_dir);
  const auto path = [&](const std::string& name) { return c.out_dir / name; };
  if (write_files) {
    auto out = open_out(path("config.ini"));
    write_run_config(out, c);
  }

  Simulation sim(h, c.mesh, initial_data(h, c), opt);
  std::ofstream steps_log;
  if (write_files) {
    steps_log = open_out(path("steps.csv"));
    steps_log << "# madapt steps v1\nstep,t,dt,to_simple,to_complex,failed,simple_cells\n";
    steps_log.precision(17);
  }

  const auto t_start = std::chrono::steady_clock::now();
  sum.dt_min = INFINITY;
  auto on_step = [&](const StepInfo& s) {
    if (sum.dt_first == 0.0) sum.dt_first = s.dt;
    sum.dt_min = std::min(sum.dt_min, s.dt);
    sum.dt_max = std::max(sum.dt_max, s.dt);
    if (steps_log.is_open()) {
      steps_log << s.step << ',' << s.t << ',' << s.dt << ',' << s.to_simple << ','
                << s.to_complex << ',' << s.failed_conversions << ','
                << sim.model_map().simple_cells() << '\n';
    }
    if (hooks.on_step) hooks.on_step(sim, s);
  };

  auto emit = [&](int index) {
    Snapshot s = make_snapshot(sim);
    if (write_files) {
      write_snapshot_csv(path(snapshot_filename(index)), s);
      if (c.write_plots) {
        auto svg = path(snapshot_filename(index));
        svg.replace_extension(".svg");
        write_snapshot_svg(svg, s, &h);
      }
    }
    sum.snapshots.push_back(std::move(s));
  };

  auto finish = [&] {
    sum.steps = sim.steps();
    sum.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    for (int k : sim.model_map().switches) sum.max_switches = std::max(sum.max_switches, k);
    sum.identities = sim.identities();
    if (!std::isfinite(sum.dt_min)) sum.dt_min = 0.0;
    if (!write_files) return;
    if (c.write_slabs && opt.record_slabs) {
      auto out = open_out(path("slabs.csv"));
      write_slab_csv(out, sim.slabs());
    }
    if (!sum.bounds.empty()) {
      auto out = open_out(path("bound.csv"));
      write_bound_csv(out, sum.bounds);
      auto txt = open_out(path("bound.txt"));
      write_bound_summary(txt, sum.bounds);
    }
    nlohmann::json meta;
    meta["schema"] = "madapt run v1";
    meta["config"] = config_json(c);
    meta["nu"] = sum.nu;
    meta["eps_over_nu"] = sum.eps_over_nu;
    meta["steps"] = sum.steps;
    meta["wall_seconds"] = sum.wall_seconds;
    meta["dt"] = {{"first", sum.dt_first}, {"min", sum.dt_min}, {"max", sum.dt_max}};
    meta["max_switches"] = sum.max_switches;
    meta["final_time"] = sim.time();
    meta["simple_cells_final"] = sim.model_map().simple_cells();
    meta["maxwellian_calls"] = sim.solver().maxwellian_calls();
    nlohmann::json snaps = nlohmann::json::array();
    for (std::size_t i = 0; i < sum.snapshots.size(); ++i) {
      snaps.push_back({{"t", sum.snapshots[i].t}, {"file", snapshot_filename(static_cast<int>(i))}});
    }
    meta["snapshots"] = snaps;
    if (!sum.error.empty()) meta["error"] = sum.error;
    auto out = open_out(path("metadata.json"));
    out << meta.dump(2) << '\n';
  };

  EstimatorInputs est;
  if (c.write_bound) {
    est.constants = shock_tube_constants(h, c);
    est.eps_over_nu = sum.eps_over_nu;
    est.nu = sum.nu;
    est.P_norm = projection_norm(h);
    est.I = sim.initial_relative_entropy();
  }

  int index = 0;
  try {
    for (double t : c.snapshot_times()) {
      sim.advance_to(t, on_step);
      emit(index++);
      if (c.write_bound) {
        est.slabs = sim.slabs();
        sum.bounds.push_back(assemble_bound(est, sim.time()));
      }
      spdlog::info("t = {:.6e}: {} steps, {} simple cells", sim.time(), sim.steps(),
                   sim.model_map().simple_cells());
    }
  } catch (const PhysicsError& e) {
    sum.error = e.what();
    finish();
    throw;
  }
  finish();
  return sum;
}

}  // namespace madapt
