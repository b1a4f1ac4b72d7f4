#include "madapt/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace madapt {

namespace {

constexpr double kTimeTol = 1e-12;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(item);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_number(const std::string& s, const std::string& where) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos == s.size()) return v;
  } catch (const std::exception&) {
    // inf and nan are written by the stream as "inf" / "nan"
    if (s == "inf") return INFINITY;
    if (s == "-inf") return -INFINITY;
    if (s == "nan" || s == "-nan") return NAN;
  }
  throw std::runtime_error(where + ": not a number: '" + s + "'");
}

bool same_time(double a, double b) {
  return std::abs(a - b) <= kTimeTol * std::max({1.0, std::abs(a), std::abs(b)});
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

}  // namespace

Snapshot make_snapshot(const Simulation& sim) {
  const ModelHierarchy& h = sim.hierarchy();
  const Mesh1D& m = sim.mesh();
  Snapshot s;
  s.t = sim.time();
  for (int k = 0; k < h.complex_dim(); ++k) {
    s.names.push_back(h.component_name(k));
    s.units.push_back(h.component_unit(k));
  }
  const auto& map = sim.model_map();
  for (int i = 0; i < m.cells; ++i) {
    s.x.push_back(m.centre(i));
    const Vec U = sim.lifted_mean(i);
    s.mean.push_back(U);
    s.theta.push_back(theta_of(map.theta[i]));
    s.indicator.push_back(map.indicator[i]);
    s.kappa.push_back(map.kappa[i]);
    double r = NAN;
    try {
      r = h.source(U).norm();
    } catch (const std::exception&) {
    }
    s.source_norm.push_back(r);
  }
  return s;
}

void write_snapshot_csv(std::ostream& os, const Snapshot& s) {
  const auto old = os.precision(17);
  os << kSnapshotSchema << "\n# t = " << s.t << "\n";
  os << "x[m]";
  for (int k = 0; k < s.dim(); ++k) os << ',' << s.names[k] << '[' << s.units[k] << ']';
  os << ",theta,indicator,kappa,source_norm\n";
  for (int i = 0; i < s.size(); ++i) {
    os << s.x[i];
    for (int k = 0; k < s.dim(); ++k) os << ',' << s.mean[i][k];
    os << ',' << s.theta[i] << ',' << s.indicator[i] << ',' << s.kappa[i] << ','
       << s.source_norm[i] << '\n';
  }
  os.precision(old);
}

void write_snapshot_csv(const std::filesystem::path& path, const Snapshot& s) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_snapshot_csv(out, s);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Snapshot read_snapshot_csv(std::istream& is, const std::string& name) {
  Snapshot s;
  std::string line;
  int lineno = 0;
  auto where = [&] { return name + ":" + std::to_string(lineno); };
  if (!std::getline(is, line) || (++lineno, line != kSnapshotSchema)) {
    throw std::runtime_error(name + ": not a snapshot file (expected '" +
                             std::string(kSnapshotSchema) + "')");
  }
  if (!std::getline(is, line) || (++lineno, line.rfind("# t = ", 0) != 0)) {
    throw std::runtime_error(where() + ": missing time line");
  }
  s.t = parse_number(line.substr(6), where());
  if (!std::getline(is, line)) throw std::runtime_error(name + ": missing header");
  ++lineno;
  const auto cols = split(line, ',');
  if (cols.size() < 6 || cols[0] != "x[m]") throw std::runtime_error(where() + ": bad header");
  const int M = static_cast<int>(cols.size()) - 5;
  if (M > kMaxStateDim) throw std::runtime_error(where() + ": too many components");
  const std::vector<std::string> tail = {"theta", "indicator", "kappa", "source_norm"};
  for (int j = 0; j < 4; ++j) {
    if (cols[1 + M + j] != tail[j]) throw std::runtime_error(where() + ": bad header");
  }
  for (int k = 0; k < M; ++k) {
    const std::string& c = cols[1 + k];
    const auto lb = c.find('[');
    if (lb == std::string::npos || c.back() != ']') {
      throw std::runtime_error(where() + ": column '" + c + "' has no unit");
    }
    s.names.push_back(c.substr(0, lb));
    s.units.push_back(c.substr(lb + 1, c.size() - lb - 2));
  }
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (static_cast<int>(f.size()) != M + 5) {
      throw std::runtime_error(where() + ": expected " + std::to_string(M + 5) + " fields");
    }
    s.x.push_back(parse_number(f[0], where()));
    Vec U(M);
    for (int k = 0; k < M; ++k) U[k] = parse_number(f[1 + k], where());
    s.mean.push_back(U);
    s.theta.push_back(static_cast<int>(parse_number(f[1 + M], where())));
    s.indicator.push_back(parse_number(f[2 + M], where()));
    s.kappa.push_back(parse_number(f[3 + M], where()));
    s.source_norm.push_back(parse_number(f[4 + M], where()));
  }
  return s;
}

Snapshot read_snapshot_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_snapshot_csv(in, path.string());
}

std::vector<std::pair<int, int>> simple_runs(const std::vector<int>& theta) {
  std::vector<std::pair<int, int>> runs;
  const int n = static_cast<int>(theta.size());
  for (int i = 0; i < n;) {
    if (theta[i] != 0) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < n && theta[j + 1] == 0) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }
  return runs;
}

// ---------------------------------------------------------------- plots

namespace {

struct Series {
  std::string label;
  std::vector<double> y;
};

struct Panel {
  std::string title;
  std::vector<Series> series;
  bool log = false;
};

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};

}  // namespace

void write_snapshot_svg(std::ostream& os, const Snapshot& s, const ModelHierarchy* h) {
  std::vector<Panel> panels;
  for (int k = 0; k < s.dim(); ++k) {
    if (h && !h->component_positive(k)) continue;
    Panel p{s.names[k] + " [" + s.units[k] + "]", {{s.names[k], {}}}, false};
    for (const auto& U : s.mean) p.series[0].y.push_back(U[k]);
    panels.push_back(std::move(p));
  }
  if (h) {
    std::map<std::string, Panel> diag;
    std::vector<std::string> order;
    for (int i = 0; i < s.size(); ++i) {
      const auto d = h->diagnostics(s.mean[i]);
      for (const auto& [name, value] : d) {
        if (!diag.count(name)) {
          order.push_back(name);
          diag[name] = Panel{name, {{name, std::vector<double>(s.size(), NAN)}}, false};
        }
        diag[name].series[0].y[i] = value;
      }
    }
    for (const auto& name : order) panels.push_back(diag[name]);
  }
  Panel ind{"indicators (log10)", {{"indicator", s.indicator}, {"kappa", s.kappa}}, true};
  panels.push_back(ind);

  const double W = 900, ph = 170, top = 40, left = 90, right = 20, gap = 30;
  const double pw = W - left - right;
  const double H = top + panels.size() * (ph + gap) + 20;
  const double x0 = s.x.empty() ? 0.0 : s.x.front(), x1 = s.x.empty() ? 1.0 : s.x.back();
  const double dx = s.size() > 1 ? (x1 - x0) / (s.size() - 1) : 1.0;
  const double xa = x0 - 0.5 * dx, xb = x1 + 0.5 * dx;
  auto X = [&](double x) { return left + (x - xa) / (xb - xa) * pw; };

  os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << left << "\" y=\"22\" font-size=\"15\">t = " << fmt(s.t)
     << " s; gray: simple model</text>\n";

  const auto runs = simple_runs(s.theta);
  for (std::size_t p = 0; p < panels.size(); ++p) {
    const Panel& P = panels[p];
    const double py = top + p * (ph + gap);
    double lo = INFINITY, hi = -INFINITY;
    auto tr = [&](double v) { return P.log ? (v > 0.0 ? std::log10(v) : NAN) : v; };
    for (const auto& S : P.series) {
      for (double v : S.y) {
        const double t = tr(v);
        if (std::isfinite(t)) {
          lo = std::min(lo, t);
          hi = std::max(hi, t);
        }
      }
    }
    if (!std::isfinite(lo)) lo = 0.0, hi = 1.0;
    if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
      const double pad = std::max(1e-12, 0.05 * std::abs(hi));
      lo -= pad;
      hi += pad;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto Y = [&](double v) { return py + ph - (v - lo) / (hi - lo) * ph; };

    os << "<g class=\"panel\">\n";
    for (const auto& [a, b] : runs) {
      const double xl = X(s.x[a] - 0.5 * dx), xr = X(s.x[b] + 0.5 * dx);
      os << "<rect class=\"simple-band\" data-first=\"" << a << "\" data-last=\"" << b
         << "\" x=\"" << xl << "\" y=\"" << py << "\" width=\"" << xr - xl << "\" height=\""
         << ph << "\" fill=\"#d0d0d0\"/>\n";
    }
    os << "<rect x=\"" << left << "\" y=\"" << py << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    os << "<text x=\"" << left + 6 << "\" y=\"" << py + 14 << "\">" << P.title << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py + 10
       << "\" text-anchor=\"end\">" << fmt(hi) << "</text>\n";
    os << "<text x=\"" << left - 6 << "\" y=\"" << py + ph
       << "\" text-anchor=\"end\">" << fmt(lo) << "</text>\n";
    for (std::size_t k = 0; k < P.series.size(); ++k) {
      os << "<polyline fill=\"none\" stroke-width=\"1.2\" stroke=\"" << kColors[k % 5]
         << "\" points=\"";
      for (int i = 0; i < s.size(); ++i) {
        const double t = tr(P.series[k].y[i]);
        if (std::isfinite(t)) os << X(s.x[i]) << ',' << Y(t) << ' ';
      }
      os << "\"/>\n";
      if (P.series.size() > 1) {
        os << "<text x=\"" << left + pw - 80 << "\" y=\"" << py + 14 + 14 * k << "\" fill=\""
           << kColors[k % 5] << "\">" << P.series[k].label << "</text>\n";
      }
    }
    os << "</g>\n";
  }
  const double ybot = top + panels.size() * (ph + gap) - gap + 16;
  os << "<text x=\"" << left << "\" y=\"" << ybot << "\">" << fmt(xa) << "</text>\n";
  os << "<text x=\"" << left + pw << "\" y=\"" << ybot << "\" text-anchor=\"end\">" << fmt(xb)
     << " (x [m])</text>\n";
  os << "</svg>\n";
}

void write_snapshot_svg(const std::filesystem::path& path, const Snapshot& s,
                        const ModelHierarchy* h) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_snapshot_svg(out, s, h);
}

// ---------------------------------------------------------------- comparison

SnapshotDiff compare_snapshots(const Snapshot& a, const Snapshot& b) {
  if (a.size() != b.size() || a.dim() != b.dim() || a.names != b.names) {
    throw std::runtime_error("compare: snapshots differ in mesh or components");
  }
  const int n = a.size(), M = a.dim();
  for (int i = 0; i < n; ++i) {
    if (std::abs(a.x[i] - b.x[i]) > 1e-9 * std::max(1.0, std::abs(a.x[i]))) {
      throw std::runtime_error("compare: cell centres differ");
    }
  }
  const double h = n > 1 ? (a.x.back() - a.x.front()) / (n - 1) : 1.0;
  SnapshotDiff d;
  d.t = a.t;
  d.L1.assign(M, 0.0);
  d.L2.assign(M, 0.0);
  d.Linf.assign(M, 0.0);
  d.rel_L1.assign(M, 0.0);
  std::vector<double> ref(M, 0.0);
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < M; ++k) {
      const double e = std::abs(a.mean[i][k] - b.mean[i][k]);
      d.L1[k] += h * e;
      d.L2[k] += h * e * e;
      d.Linf[k] = std::max(d.Linf[k], e);
      ref[k] += h * std::abs(b.mean[i][k]);
    }
  }
  for (int k = 0; k < M; ++k) {
    d.L2[k] = std::sqrt(d.L2[k]);
    // Components that vanish in the reference (momentum at rest) are scaled by the largest
    // reference norm among the others of the same unit, else left absolute.
    double scale = ref[k];
    if (scale == 0.0) {
      for (int j = 0; j < M; ++j) {
        if (a.units[j] == a.units[k]) scale = std::max(scale, ref[j]);
      }
    }
    d.rel_L1[k] = scale > 0.0 ? d.L1[k] / scale : d.L1[k];
    d.max_rel_L1 = std::max(d.max_rel_L1, d.rel_L1[k]);
  }
  return d;
}

CompareReport compare_runs(const std::vector<Snapshot>& a, const std::vector<Snapshot>& b) {
  std::ostringstream only_a, only_b;
  only_a.precision(17);
  only_b.precision(17);
  for (const auto& s : a) {
    if (std::none_of(b.begin(), b.end(), [&](const Snapshot& o) { return same_time(s.t, o.t); })) {
      only_a << ' ' << s.t;
    }
  }
  for (const auto& s : b) {
    if (std::none_of(a.begin(), a.end(), [&](const Snapshot& o) { return same_time(s.t, o.t); })) {
      only_b << ' ' << s.t;
    }
  }
  if (!only_a.str().empty() || !only_b.str().empty()) {
    throw std::runtime_error("compare: snapshot times differ; only in A:" +
                             (only_a.str().empty() ? std::string(" none") : only_a.str()) +
                             "; only in B:" +
                             (only_b.str().empty() ? std::string(" none") : only_b.str()));
  }
  CompareReport r;
  for (const auto& s : a) {
    const auto it =
        std::find_if(b.begin(), b.end(), [&](const Snapshot& o) { return same_time(s.t, o.t); });
    r.rows.push_back(compare_snapshots(s, *it));
  }
  return r;
}

std::string snapshot_filename(int index) {
  std::ostringstream os;
  os << "snapshot_";
  os.width(4);
  os.fill('0');
  os << index << ".csv";
  return os.str();
}

std::vector<Snapshot> read_run_snapshots(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw std::runtime_error("not a run directory: " + dir.string());
  }
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.rfind("snapshot_", 0) == 0 && e.path().extension() == ".csv") {
      files.push_back(e.path());
    }
  }
  std::sort(files.begin(), files.end());
  std::vector<Snapshot> out;
  for (const auto& f : files) out.push_back(read_snapshot_csv(f));
  std::sort(out.begin(), out.end(), [](const Snapshot& x, const Snapshot& y) { return x.t < y.t; });
  if (out.empty()) throw std::runtime_error("no snapshot files in " + dir.string());
  return out;
}

CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b) {
  return compare_runs(read_run_snapshots(a), read_run_snapshots(b));
}

void write_compare_csv(std::ostream& os, const CompareReport& r,
                       const std::vector<std::string>& names) {
  const auto old = os.precision(17);
  os << "# madapt compare v1\nt";
  for (const char* norm : {"L1", "L2", "Linf", "relL1"}) {
    for (const auto& n : names) os << ',' << norm << '_' << n;
  }
  os << ",max_relL1\n";
  for (const auto& d : r.rows) {
    os << d.t;
    for (const auto* v : {&d.L1, &d.L2, &d.Linf, &d.rel_L1}) {
      for (double x : *v) os << ',' << x;
    }
    os << ',' << d.max_rel_L1 << '\n';
  }
  os.precision(old);
}

}  // namespace madapt
