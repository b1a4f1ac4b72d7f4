#include "madapt/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace madapt {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"mesh", {"a", "b", "cells", "periodic"}},
      {"time", {"t_final", "cfl", "source_sigma", "dt_update_interval"}},
      {"adapt",
       {"mode", "tau_r", "tau_kappa", "f_eps", "min_patch", "eps_over_nu", "nu_samples_per_axis",
        "nu_box_factor", "lazy_indicators"}},
      {"dg", {"limiter", "tvb_M", "positivity_fallback"}},
      {"thermo", {"table", "cv_normalization"}},
      {"initial",
       {"type", "preset", "T", "v", "p_inner", "rho_O_inner", "p_outer", "rho_O_outer", "inner_a",
        "inner_b"}},
      {"output", {"dir", "snapshots", "slabs", "plots", "bound"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& where, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size() && std::isfinite(v)) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(where + ": not a finite number: '" + raw + "'");
}

int to_int(const std::string& where, const std::string& raw) {
  const std::string s = trim(raw);
  try {
    std::size_t pos = 0;
    const long v = std::stol(s, &pos);
    if (pos == s.size() && v >= -2147483647L && v <= 2147483647L) return static_cast<int>(v);
  } catch (const std::exception&) {
  }
  throw ConfigError(where + ": not an integer: '" + raw + "'");
}

bool to_bool(const std::string& where, const std::string& raw) {
  const std::string s = trim(raw);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(where + ": not a boolean: '" + raw + "'");
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  template <typename F>
  void with(const std::string& key, F&& f) const {
    if (!tree_) return;
    const auto it = tree_->find(key);
    if (it == tree_->not_found()) return;
    f(name_ + "." + key, it->second.data());
  }
  void num(const std::string& key, double& out) const {
    with(key, [&](const std::string& w, const std::string& v) { out = to_double(w, v); });
  }
  void integer(const std::string& key, int& out) const {
    with(key, [&](const std::string& w, const std::string& v) { out = to_int(w, v); });
  }
  void flag(const std::string& key, bool& out) const {
    with(key, [&](const std::string& w, const std::string& v) { out = to_bool(w, v); });
  }
  void text(const std::string& key, std::string& out) const {
    with(key, [&](const std::string&, const std::string& v) { out = trim(v); });
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
};

}  // namespace

std::vector<double> parse_time_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(to_double("snapshot time", item));
  }
  return out;
}

void RunConfig::validate() const {
  if (mesh.cells < 4) throw ConfigError("mesh.cells: need at least 4 cells");
  if (!(mesh.b > mesh.a)) throw ConfigError("mesh: need a < b");
  if (!(t_final > 0.0)) throw ConfigError("time.t_final must be positive");
  if (!(sim.cfl > 0.0 && sim.cfl <= 0.1)) throw ConfigError("time.cfl must lie in (0, 0.1]");
  if (!(sim.dg.source_sigma > 0.0)) throw ConfigError("time.source_sigma must be positive");
  if (sim.dt_update_interval < 1) throw ConfigError("time.dt_update_interval must be >= 1");
  if (sim.dg.tvb_M < 0.0) throw ConfigError("dg.tvb_M must be nonnegative");
  AdaptConfig a = sim.adapt;
  a.eps_over_nu = 1.0;
  a.validate();
  if (eps_over_nu >= 0.0 && !(eps_over_nu > 0.0)) {
    throw ConfigError("adapt.eps_over_nu must be positive or 'auto'");
  }
  if (nu_samples_per_axis < 2) throw ConfigError("adapt.nu_samples_per_axis must be >= 2");
  if (!(nu_box_factor >= 1.0)) throw ConfigError("adapt.nu_box_factor must be >= 1");
  if (preset != "default" && preset != "literal") {
    throw ConfigError("initial.preset must be 'default' or 'literal'");
  }
  if (!(shock.T > 0.0)) throw ConfigError("initial.T must be positive");
  if (!(shock.p_inner > 0.0 && shock.p_outer > 0.0)) {
    throw ConfigError("initial pressures must be positive");
  }
  if (!(shock.rho_O_inner > 0.0 && shock.rho_O_outer > 0.0)) {
    throw ConfigError("initial atomic-oxygen densities must be positive");
  }
  if (!(shock.inner_a < shock.inner_b)) throw ConfigError("initial: need inner_a < inner_b");
  for (double t : snapshots) {
    if (!(t >= 0.0 && t <= t_final)) {
      std::ostringstream os;
      os << "output.snapshots: time " << t << " outside [0, " << t_final << "]";
      throw ConfigError(os.str());
    }
  }
}

std::vector<double> RunConfig::snapshot_times() const {
  std::vector<double> t = snapshots;
  t.push_back(t_final);
  std::sort(t.begin(), t.end());
  t.erase(std::unique(t.begin(), t.end()), t.end());
  return t;
}

RunConfig default_shock_tube() {
  RunConfig c;
  c.sim.cfl = 0.1;
  c.sim.dg.source_sigma = 1.0;
  c.sim.adapt.tau_r = 0.16;
  c.sim.adapt.tau_kappa = 0.0016;
  c.sim.adapt.f_eps = 0.25;
  return c;
}

RunConfig literal_shock_tube() {
  RunConfig c = default_shock_tube();
  c.preset = "literal";
  c.mesh = Mesh1D(-1.0, 1.0, c.mesh.cells, true);
  c.shock.inner_a = -0.5;
  c.shock.inner_b = 0.5;
  return c;
}

RunConfig parse_run_config(std::istream& is, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, sec] : tree) {
    const auto it = known_keys().find(name);
    if (it == known_keys().end()) {
      if (sec.empty()) throw ConfigError("config: key '" + name + "' outside a section");
      throw ConfigError("config: unknown section [" + name + "]");
    }
    for (const auto& [key, _] : sec) {
      if (!it->second.count(key)) throw ConfigError("config: unknown key " + name + "." + key);
    }
  }
  auto sec = [&](const std::string& name) {
    const auto it = tree.find(name);
    return Section(it == tree.not_found() ? nullptr : &it->second, name);
  };

  // The preset picks the geometry first so that explicit keys override it.
  std::string preset = "default";
  sec("initial").text("preset", preset);
  RunConfig c;
  if (preset == "literal") {
    c = literal_shock_tube();
  } else if (preset == "default") {
    c = default_shock_tube();
  } else {
    throw ConfigError("initial.preset: expected default or literal, got '" + preset + "'");
  }

  const Section mesh = sec("mesh");
  mesh.num("a", c.mesh.a);
  mesh.num("b", c.mesh.b);
  mesh.integer("cells", c.mesh.cells);
  mesh.flag("periodic", c.mesh.periodic);

  const Section time = sec("time");
  time.num("t_final", c.t_final);
  time.num("cfl", c.sim.cfl);
  time.num("source_sigma", c.sim.dg.source_sigma);
  time.integer("dt_update_interval", c.sim.dt_update_interval);

  const Section adapt = sec("adapt");
  adapt.with("mode", [&](const std::string& w, const std::string& v) {
    try {
      c.sim.mode = parse_run_mode(trim(v));
    } catch (const ConfigError& e) {
      throw ConfigError(w + ": " + e.what());
    }
  });
  adapt.num("tau_r", c.sim.adapt.tau_r);
  adapt.num("tau_kappa", c.sim.adapt.tau_kappa);
  adapt.num("f_eps", c.sim.adapt.f_eps);
  adapt.integer("min_patch", c.sim.adapt.min_patch);
  adapt.with("eps_over_nu", [&](const std::string& w, const std::string& v) {
    c.eps_over_nu = trim(v) == "auto" ? -1.0 : to_double(w, v);
  });
  adapt.integer("nu_samples_per_axis", c.nu_samples_per_axis);
  adapt.num("nu_box_factor", c.nu_box_factor);
  adapt.flag("lazy_indicators", c.sim.lazy_indicators);

  const Section dg = sec("dg");
  dg.flag("limiter", c.sim.dg.limiter);
  dg.num("tvb_M", c.sim.dg.tvb_M);
  dg.flag("positivity_fallback", c.sim.dg.positivity_fallback);

  const Section thermo = sec("thermo");
  thermo.with("table", [&](const std::string&, const std::string& v) {
    std::filesystem::path p = trim(v);
    c.thermo_table = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
  });
  thermo.with("cv_normalization", [&](const std::string& w, const std::string& v) {
    const std::string s = trim(v);
    if (s == "species") {
      c.cv_normalization = o2::CvNormalization::species_mass;
    } else if (s == "literal") {
      c.cv_normalization = o2::CvNormalization::literal_table;
    } else {
      throw ConfigError(w + ": expected species or literal, got '" + s + "'");
    }
  });

  const Section init = sec("initial");
  init.with("type", [&](const std::string& w, const std::string& v) {
    const std::string s = trim(v);
    if (s == "shock_tube") {
      c.initial = InitialKind::shock_tube;
    } else if (s == "constant") {
      c.initial = InitialKind::constant;
    } else {
      throw ConfigError(w + ": expected shock_tube or constant, got '" + s + "'");
    }
  });
  init.num("T", c.shock.T);
  init.num("v", c.shock.v);
  init.num("p_inner", c.shock.p_inner);
  init.num("rho_O_inner", c.shock.rho_O_inner);
  init.num("p_outer", c.shock.p_outer);
  init.num("rho_O_outer", c.shock.rho_O_outer);
  init.num("inner_a", c.shock.inner_a);
  init.num("inner_b", c.shock.inner_b);

  const Section out = sec("output");
  out.with("dir", [&](const std::string&, const std::string& v) { c.out_dir = trim(v); });
  out.with("snapshots", [&](const std::string& w, const std::string& v) {
    try {
      c.snapshots = parse_time_list(v);
    } catch (const ConfigError& e) {
      throw ConfigError(w + ": " + e.what());
    }
  });
  out.flag("slabs", c.write_slabs);
  out.flag("plots", c.write_plots);
  out.flag("bound", c.write_bound);

  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  try {
    return parse_run_config(in, path.parent_path());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_run_config(std::ostream& os, const RunConfig& c) {
  const auto old = os.precision(17);
  auto b = [](bool v) { return v ? "true" : "false"; };
  os << "[mesh]\na = " << c.mesh.a << "\nb = " << c.mesh.b << "\ncells = " << c.mesh.cells
     << "\nperiodic = " << b(c.mesh.periodic) << "\n\n";
  os << "[time]\nt_final = " << c.t_final << "\ncfl = " << c.sim.cfl
     << "\nsource_sigma = " << c.sim.dg.source_sigma
     << "\ndt_update_interval = " << c.sim.dt_update_interval << "\n\n";
  os << "[adapt]\nmode = " << to_string(c.sim.mode) << "\ntau_r = " << c.sim.adapt.tau_r
     << "\ntau_kappa = " << c.sim.adapt.tau_kappa << "\nf_eps = " << c.sim.adapt.f_eps
     << "\nmin_patch = " << c.sim.adapt.min_patch << "\neps_over_nu = ";
  if (c.eps_over_nu < 0.0) {
    os << "auto";
  } else {
    os << c.eps_over_nu;
  }
  os << "\nnu_samples_per_axis = " << c.nu_samples_per_axis
     << "\nnu_box_factor = " << c.nu_box_factor
     << "\nlazy_indicators = " << b(c.sim.lazy_indicators) << "\n\n";
  os << "[dg]\nlimiter = " << b(c.sim.dg.limiter) << "\ntvb_M = " << c.sim.dg.tvb_M
     << "\npositivity_fallback = " << b(c.sim.dg.positivity_fallback) << "\n\n";
  os << "[thermo]\n";
  if (!c.thermo_table.empty()) os << "table = " << c.thermo_table.string() << "\n";
  os << "cv_normalization = "
     << (c.cv_normalization == o2::CvNormalization::species_mass ? "species" : "literal")
     << "\n\n";
  os << "[initial]\ntype = " << (c.initial == InitialKind::shock_tube ? "shock_tube" : "constant")
     << "\npreset = " << c.preset << "\nT = " << c.shock.T << "\nv = " << c.shock.v
     << "\np_inner = " << c.shock.p_inner << "\nrho_O_inner = " << c.shock.rho_O_inner
     << "\np_outer = " << c.shock.p_outer << "\nrho_O_outer = " << c.shock.rho_O_outer
     << "\ninner_a = " << c.shock.inner_a << "\ninner_b = " << c.shock.inner_b << "\n\n";
  os << "[output]\ndir = " << c.out_dir.string() << "\nsnapshots = ";
  for (std::size_t i = 0; i < c.snapshots.size(); ++i) os << (i ? ", " : "") << c.snapshots[i];
  os << "\nslabs = " << b(c.write_slabs) << "\nplots = " << b(c.write_plots)
     << "\nbound = " << b(c.write_bound) << "\n";
  os.precision(old);
}

o2::ThermoTable thermo_table(const RunConfig& c) {
  o2::ThermoTable t = c.thermo_table.empty() ? o2::ThermoTable::defaults(c.cv_normalization)
                                             : o2::ThermoTable::load(c.thermo_table);
  return t;
}

std::pair<Vec, Vec> shock_tube_states(const o2::O2Hierarchy& h, const ShockTubeSetup& s) {
  try {
    return {h.equilibrium_from_Tpv(s.T, s.p_inner, s.v, s.rho_O_inner),
            h.equilibrium_from_Tpv(s.T, s.p_outer, s.v, s.rho_O_outer)};
  } catch (const std::exception& e) {
    throw ConfigError(std::string("initial: cannot build the equilibrium states: ") + e.what());
  }
}

std::function<Vec(double)> initial_data(const o2::O2Hierarchy& h, const RunConfig& c) {
  const auto [inner, outer] = shock_tube_states(h, c.shock);
  if (c.initial == InitialKind::constant) {
    return [inner = inner](double) { return inner; };
  }
  const double a = c.shock.inner_a, b = c.shock.inner_b;
  const bool closed = c.preset == "literal";
  return [=, inner = inner, outer = outer](double x) {
    const bool in = closed ? (x >= a && x <= b) : (x > a && x < b);
    return in ? inner : outer;
  };
}

}  // namespace madapt
