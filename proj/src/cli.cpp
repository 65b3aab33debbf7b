#include "loopfield/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "loopfield/bessel1d.hpp"
#include "loopfield/clusters.hpp"
#include "loopfield/fields.hpp"
#include "loopfield/gff_iso.hpp"
#include "loopfield/graph.hpp"
#include "loopfield/loopsoup.hpp"
#include "loopfield/special.hpp"

#ifndef LOOPFIELD_VERSION
#define LOOPFIELD_VERSION "0.0.0"
#endif

namespace loopfield::cli {

namespace {

using json = nlohmann::json;

std::string num(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string num(std::size_t v) { return std::to_string(v); }
std::string num(int v) { return std::to_string(v); }
std::string num(std::int64_t v) { return std::to_string(v); }

class Csv {
 public:
  explicit Csv(std::ostream& os) : os_(os) {}
  Csv& header(std::initializer_list<const char*> cols) {
    bool first = true;
    for (const char* c : cols) {
      if (!first) os_ << ',';
      os_ << csv_field(c);
      first = false;
    }
    os_ << '\n';
    return *this;
  }
  template <class... T>
  void row(const T&... values) {
    bool first = true;
    ((os_ << (first ? "" : ",") << csv_field(to_text(values)), first = false), ...);
    os_ << '\n';
  }

 private:
  static std::string to_text(const std::string& s) { return s; }
  static std::string to_text(const char* s) { return s; }
  template <std::size_t N>
  static std::string to_text(const char (&s)[N]) {
    return s;
  }
  template <class T>
  static std::string to_text(const T& v) {
    return num(v);
  }
  std::ostream& os_;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::vector<std::string>& tokens) {
  std::vector<double> out;
  for (const auto& t : tokens) {
    std::stringstream ss(t);
    std::string part;
    while (std::getline(ss, part, ','))
      if (!part.empty()) out.push_back(parse_scale(part));
  }
  return out;
}

std::pair<double, double> parse_point(const std::string& s) {
  const auto comma = s.find(',');
  if (comma == std::string::npos) throw UsageError("probe '" + s + "' must be x,y");
  return {parse_scale(s.substr(0, comma)), parse_scale(s.substr(comma + 1))};
}

Vertex probe_vertex(const LatticeDomain& domain, const std::string& spec) {
  const auto [x, y] = parse_point(spec);
  const Vertex v = domain.find(static_cast<int>(std::lround(x * domain.mesh())),
                               static_cast<int>(std::lround(y * domain.mesh())));
  if (v == kNoVertex) throw UsageError("probe " + spec + " lies outside the domain");
  return v;
}

// key = value lines, # comments.
std::vector<std::pair<std::string, std::string>> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read config file " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  const auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::string();
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key = value");
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

struct Common {
  std::uint64_t seed = 0;
  std::size_t replicas = 1000;
  std::size_t workers = 1;
  std::string out = "-";
  std::string config;

  mc::RunSpec run() const { return {seed, replicas, workers}; }
};

void add_common(CLI::App* sub, Common& c, bool replicas = true) {
  sub->add_option("--seed", c.seed, "Master seed (falls back to LOOPFIELD_SEED)");
  if (replicas) sub->add_option("--replicas", c.replicas, "Number of replicas")->check(CLI::PositiveNumber);
  sub->add_option("--workers", c.workers, "Worker threads")->check(CLI::PositiveNumber);
  sub->add_option("--out", c.out, "Output file, - for stdout");
  sub->add_option("--config", c.config, "File of key = value lines; flags override it");
}

// Canonical invocation: options in definition order, omitting the ones
// that do not change the result.
std::string canonical(const CLI::App* sub) {
  std::string s = "loopfield " + sub->get_name();
  for (const CLI::Option* opt : sub->get_options()) {
    const std::string name = opt->get_name();
    if (name == "--workers" || name == "--out" || name == "--config" || name == "--seed" || name == "--help")
      continue;
    if (opt->count() == 0) continue;
    s += " " + name;
    for (const auto& r : opt->results()) s += " " + r;
  }
  return s;
}

std::string seed_line(const CLI::App* sub, std::uint64_t seed) {
  return "# cmd: " + canonical(sub) + " seed=" + std::to_string(seed) + " version=" + LOOPFIELD_VERSION;
}

double fit_or_nan(const std::vector<double>& xs, const std::vector<double>& ys, const std::vector<double>& ws,
                  double mc::LineFit::*field) {
  if (xs.size() < 3) return std::nan("");
  try {
    return mc::fit_slope(xs, ys, ws).*field;
  } catch (const std::exception&) {
    return std::nan("");
  }
}

// Points with a positive estimate, log-log, weights 1/var(log estimate).
void loglog_points(const std::vector<double>& xs, const std::vector<mc::Estimate>& est, std::vector<double>& lx,
                   std::vector<double>& ly, std::vector<double>& w) {
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (!(est[i].mean > 0.0)) continue;
    lx.push_back(xs[i]);
    ly.push_back(std::log(est[i].mean));
    const double rel = est[i].se / est[i].mean;
    w.push_back(rel > 0.0 ? 1.0 / (rel * rel) : 1.0);
  }
}

}  // namespace

double parse_scale(const std::string& token) {
  std::string t = token;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char c) { return std::isspace(c); }), t.end());
  try {
    std::size_t used = 0;
    if (!t.empty() && (t[0] == 'e' || t[0] == 'E')) {
      std::string rest = t.substr(1);
      if (!rest.empty() && rest[0] == '^') rest.erase(0, 1);
      const double p = std::stod(rest, &used);
      if (used == rest.size()) return std::exp(p);
    } else {
      const double v = std::stod(t, &used);
      if (used == t.size()) return v;
    }
  } catch (const std::exception&) {
  }
  throw UsageError("cannot parse number '" + token + "'");
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

int dispatch(const std::vector<std::string>& args_in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Loop soup, occupation field and squared Bessel simulations", "loopfield"};
  app.require_subcommand(1);
  app.set_version_flag("--version", LOOPFIELD_VERSION);

  Common common;
  // Per-command parameters.
  double theta = 0.0, gamma = 0.0, r = 0.0, zr = 0.0, x = 0.0, y = 0.0, dt = 1e-3, horizon = 1.0;
  double laguerre_theta = 0.0;
  int mesh = 32, n = 1, m = 1;
  std::size_t zr_replicas = 2000;
  std::string domain_name = "disc", which, grid = "default", graph = "builtin:k2", functional = "exp";
  std::string probe_x = "0,0", probe_y = "0.125,0";
  std::vector<std::string> probes, r_list, gamma_list, probe_times, times;

  std::map<std::string, std::function<void(std::ostream&, const CLI::App*)>> actions;
  std::string check_failure;

  // Subcommands share the parameter variables, so defaults are set once the
  // subcommand is known.
  auto domain_opts = [&](CLI::App* sub, int default_mesh, bool shape) {
    sub->preparse_callback([&mesh, default_mesh](std::size_t) { mesh = default_mesh; });
    sub->add_option("--mesh", mesh, "Lattice mesh N (spacing 1/N)")->check(CLI::Range(8, 4096));
    if (shape) sub->add_option("--domain", domain_name, "disc or square")->check(CLI::IsMember({"disc", "square"}));
  };
  auto make_domain = [&]() { return build_domain(parse_shape(domain_name), mesh); };

  // sample-occupation
  {
    auto* sub = app.add_subcommand("sample-occupation", "Occupation field of the theta-soup at probe points");
    sub->add_option("--theta", theta, "Soup intensity")->required();
    domain_opts(sub, 32, true);
    sub->add_option("--probe", probes, "Probe point x,y (repeatable)");
    add_common(sub, common);
    actions["sample-occupation"] = [&](std::ostream& os, const CLI::App* s) {
      const auto domain = make_domain();
      if (probes.empty()) probes.push_back("0,0");
      std::vector<Vertex> vs;
      for (const auto& p : probes) vs.push_back(probe_vertex(domain, p));
      const GreenTable green(domain);
      const LoopSoupSampler sampler(domain);
      auto rows = mc::run_replicas(common.run(), [&](std::size_t, mc::Rng& rng) {
        const auto soup = sampler.sample(theta, rng);
        std::vector<double> out;
        for (Vertex v : vs) out.push_back(soup.occupation[static_cast<std::size_t>(v)]);
        return out;
      });
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"replica", "probe_index", "occupation", "occupation_over_G"});
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < vs.size(); ++k)
          csv.row(i, k, rows[i][k], rows[i][k] / green.diagonal(vs[k]));
    };
  }

  // crossing
  {
    auto* sub = app.add_subcommand("crossing", "Z_r: a cluster joins the disc of radius r to the circle of radius 1/e");
    sub->add_option("--theta", theta, "Soup intensity")->required();
    domain_opts(sub, 64, false);
    sub->add_option("--r-list", r_list, "Radii, e.g. e-2,e-3,e-4");
    add_common(sub, common);
    actions["crossing"] = [&](std::ostream& os, const CLI::App* s) {
      if (r_list.empty()) r_list = {"e-2,e-3,e-4"};
      const auto radii = parse_list(r_list);
      const auto domain = build_domain(Shape::UnitDisc, mesh);
      const auto curve = estimate_Zr_curve(domain, theta, radii, common.run());
      std::vector<double> lx, ly, w, loglog;
      for (double rad : radii) loglog.push_back(std::log(std::log(1.0 / rad)));
      loglog_points(loglog, curve.estimates, lx, ly, w);
      const double slope = fit_or_nan(lx, ly, w, &mc::LineFit::slope);
      const double slope_se = fit_or_nan(lx, ly, w, &mc::LineFit::slope_se_weights);
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"r", "estimate", "se", "n", "fit_slope", "fit_slope_se"});
      for (std::size_t i = 0; i < radii.size(); ++i) {
        const auto& e = curve.estimates[i];
        csv.row(radii[i], e.mean, e.se, e.n, slope, slope_se);
      }
    };
  }

  // zgamma
  {
    auto* sub = app.add_subcommand("zgamma", "Z_gamma: the origin's thick loop joins the circle of radius 1/e");
    sub->add_option("--theta", theta, "Soup intensity")->required();
    domain_opts(sub, 64, false);
    sub->add_option("--gamma-list", gamma_list, "Values of gamma, e.g. 0.2,0.4,0.8");
    add_common(sub, common);
    actions["zgamma"] = [&](std::ostream& os, const CLI::App* s) {
      if (gamma_list.empty()) gamma_list = {"0.2,0.4,0.8"};
      const auto gammas = parse_list(gamma_list);
      const auto domain = build_domain(Shape::UnitDisc, mesh);
      const auto curve = estimate_Zgamma_curve(domain, theta, gammas, common.run());
      std::vector<double> lg, lx, ly, w;
      std::vector<mc::Estimate> est;
      for (const auto& z : curve) {
        lg.push_back(std::log(z.gamma));
        est.push_back(z.conditioned);
      }
      loglog_points(lg, est, lx, ly, w);
      const double slope = fit_or_nan(lx, ly, w, &mc::LineFit::slope);
      const double slope_se = fit_or_nan(lx, ly, w, &mc::LineFit::slope_se_weights);
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"gamma", "estimate", "se", "n", "frequency", "frequency_se", "nonempty", "nonempty_se", "union_bound",
                  "union_bound_se", "fit_slope", "fit_slope_se"});
      for (const auto& z : curve)
        csv.row(z.gamma, z.conditioned.mean, z.conditioned.se, z.conditioned.n, z.connected.mean, z.connected.se,
                z.nonempty.mean, z.nonempty.se, z.union_bound.mean, z.union_bound.se, slope, slope_se);
    };
  }

  // field
  {
    auto* sub = app.add_subcommand("field", "Signed field h, thick points and the m_gamma density at probes");
    sub->add_option("--theta", theta, "Soup intensity in (0, 1/2]")->required();
    sub->add_option("--gamma", gamma, "Chaos parameter in (0, sqrt 2)")->required();
    domain_opts(sub, 64, false);
    sub->add_option("--probe", probes, "Probe point x,y (repeatable)");
    add_common(sub, common);
    actions["field"] = [&](std::ostream& os, const CLI::App* s) {
      const auto domain = build_domain(Shape::UnitDisc, mesh);
      if (probes.empty()) probes.push_back("0,0");
      std::vector<Vertex> vs;
      for (const auto& p : probes) vs.push_back(probe_vertex(domain, p));
      // Validate parameters before simulating.
      (void)m_gamma_density(1.0, 1, gamma, theta, 1.0);
      const double a = gamma * gamma / 2.0;
      const GreenTable green(domain);
      std::vector<double> gdiag;
      for (Vertex v : vs) gdiag.push_back(green.diagonal(v));
      const LoopSoupSampler sampler(domain);
      const OrphanResolver resolver(domain);
      struct Probe {
        double ell = 0.0, h = 0.0, m = 0.0, weight = 0.0;
        int spin = 0;
        bool thick = false, orphan = false;
      };
      auto rows = mc::run_replicas(common.run(), [&](std::size_t, mc::Rng& rng) {
        const auto soup = sampler.sample(theta, rng);
        auto partition = build_clusters(soup);
        assign_spins(partition, rng);
        const auto assignment = resolver.resolve(partition);
        const auto field = discrete_field(soup.occupation, partition, assignment, theta);
        const auto measure = thick_point_measure(domain, soup.occupation, a, theta);
        std::vector<Probe> out;
        for (std::size_t k = 0; k < vs.size(); ++k) {
          const auto v = static_cast<std::size_t>(vs[k]);
          Probe p;
          p.ell = soup.occupation[v];
          p.h = field.values[v];
          p.spin = p.h > 0 ? 1 : -1;
          p.m = m_gamma_density(p.ell, p.spin, gamma, theta, gdiag[k]);
          p.orphan = assignment.orphan[v] != 0;
          for (const auto& [atom, w] : measure.atoms)
            if (static_cast<std::size_t>(atom) == v) {
              p.thick = true;
              p.weight = w;
            }
          out.push_back(p);
        }
        return out;
      });
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"replica", "probe", "ell", "spin", "h_value", "m_gamma_density", "thick", "weight", "orphan"});
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t k = 0; k < vs.size(); ++k) {
          const auto& p = rows[i][k];
          csv.row(i, k, p.ell, p.spin, p.h, p.m, int(p.thick), p.weight, int(p.orphan));
        }
    };
  }

  // wick-cov
  {
    auto* sub = app.add_subcommand("wick-cov", "Covariance of Wick powers of the occupation field");
    sub->add_option("--theta", theta, "Soup intensity")->required();
    sub->add_option("--n", n, "Wick power at z")->check(CLI::Range(0, 3));
    sub->add_option("--m", m, "Wick power at w")->check(CLI::Range(0, 3));
    domain_opts(sub, 32, true);
    sub->add_option("--z", probe_x, "Point z as x,y");
    sub->add_option("--w", probe_y, "Point w as x,y");
    add_common(sub, common);
    actions["wick-cov"] = [&](std::ostream& os, const CLI::App* s) {
      const auto domain = make_domain();
      const Vertex z = probe_vertex(domain, probe_x), w = probe_vertex(domain, probe_y);
      const auto result = special::estimate_wick_covariance(domain, theta, n, m, z, w, common.run());
      const GreenTable green(domain);
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"theta", "n", "m", "green_zw", "estimate", "se", "replicas", "predicted"});
      csv.row(theta, n, m, green(z, w), result.estimate.mean, result.estimate.se, result.estimate.n, result.predicted);
    };
  }

  // identity-check
  {
    auto* sub = app.add_subcommand("identity-check", "Deterministic special-function identities over a grid");
    sub->add_option("--which", which, "laguerre-bessel, hermite-laguerre, hermite-exp or m-gamma")
        ->required()
        ->check(CLI::IsMember({"laguerre-bessel", "hermite-laguerre", "hermite-exp", "m-gamma"}));
    sub->add_option("--grid", grid, "Grid (only 'default')")->check(CLI::IsMember({"default"}));
    add_common(sub, common, false);
    actions["identity-check"] = [&](std::ostream& os, const CLI::App* s) {
      const auto report = which == "m-gamma" ? m_gamma_identity_grid() : special::identity_grid(which);
      json j;
      j["cmd"] = canonical(s);
      j["version"] = LOOPFIELD_VERSION;
      j["which"] = report.which;
      j["grid"] = grid;
      j["tolerance"] = report.tolerance;
      j["max_residual"] = report.max_residual();
      j["pass"] = report.max_residual() < report.tolerance;
      j["points"] = json::array();
      for (const auto& p : report.points) {
        json params = json::object();
        for (const auto& [k, v] : p.parameters) params[k] = v;
        j["points"].push_back({{"parameters", params}, {"residual", p.residual}});
      }
      os << j.dump(2) << '\n';
      if (!(report.max_residual() < report.tolerance))
        check_failure = "identity " + which + " exceeds tolerance: max residual " + num(report.max_residual());
    };
  }

  // gff-iso
  {
    auto* sub = app.add_subcommand("gff-iso", "Occupation field at theta = 1/2 against half the squared GFF");
    domain_opts(sub, 32, true);
    sub->add_option("--x", probe_x, "First probe x,y");
    sub->add_option("--y", probe_y, "Second probe x,y");
    add_common(sub, common);
    actions["gff-iso"] = [&](std::ostream& os, const CLI::App* s) {
      if (mesh > 48) throw UsageError("gff-iso: --mesh must be at most 48");
      const auto domain = make_domain();
      const auto rep = lejan_check(domain, probe_vertex(domain, probe_x), probe_vertex(domain, probe_y), common.run());
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"quantity", "value", "se", "reference"});
      const double nan = std::nan("");
      csv.row("ks_two_sample", rep.ks_two_sample, nan, 0.0);
      csv.row("ks_soup_gamma", rep.ks_soup, nan, 0.0);
      csv.row("ks_gff_gamma", rep.ks_gff, nan, 0.0);
      csv.row("soup_wick_cov", rep.soup_cov.mean, rep.soup_cov.se, rep.predicted);
      csv.row("gff_wick_cov", rep.gff_cov.mean, rep.gff_cov.se, rep.predicted);
      csv.row("green_xx", rep.green_xx, nan, nan);
      csv.row("green_xy", rep.green_xy, nan, nan);
    };
  }

  // bfs-dynkin
  {
    auto* sub = app.add_subcommand("bfs-dynkin", "BFS-Dynkin identity on a tiny graph");
    sub->add_option("--graph", graph, "builtin:k2 or builtin:path3");
    sub->add_option("--functional", functional, "exp (F = exp(-total occupation)) or one")
        ->check(CLI::IsMember({"exp", "one"}));
    sub->add_option("--x", n, "Source vertex");
    sub->add_option("--y", m, "Target vertex");
    add_common(sub, common);
    actions["bfs-dynkin"] = [&](std::ostream& os, const CLI::App* s) {
      const auto g = TinyGraph::builtin(graph);
      const auto rep = bfs_dynkin_check(g, n, m, common.run(), functional == "one" ? Functional::One : Functional::ExpTotal);
      const auto chi = geometric_returns_test(g, n, m, common.run());
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"quantity", "value", "se", "reference"});
      csv.row("lhs", rep.lhs.mean, rep.lhs.se, rep.closed_form);
      csv.row("rhs", rep.rhs.mean, rep.rhs.se, rep.closed_form);
      csv.row("difference", rep.difference.mean, rep.difference.se, 0.0);
      csv.row("green_xy", rep.green_xy, 0.0, rep.green_xy);
      csv.row("returns_chi2", chi.statistic, std::nan(""), static_cast<double>(chi.dof));
      csv.row("returns_p_value", chi.p_value, std::nan(""), std::nan(""));
    };
    // -x/-y are vertex indices here; defaults 0 and 1.
    sub->preparse_callback([&](std::size_t) {
      n = 0;
      m = 1;
    });
  }

  // besq
  {
    auto* sub = app.add_subcommand("besq", "Squared Bessel paths of dimension 2 theta");
    sub->add_option("--theta", theta, "Half the dimension, in (0, 1)")->required();
    sub->add_option("--horizon", horizon, "Time horizon");
    sub->add_option("--dt", dt, "Grid step");
    sub->add_option("--probe-times", probe_times, "Times to report, e.g. 0.5,1");
    add_common(sub, common);
    actions["besq"] = [&](std::ostream& os, const CLI::App* s) {
      if (!(theta > 0.0 && theta < 1.0)) throw UsageError("--theta must lie in (0, 1)");
      if (!(horizon > 0.0 && dt > 0.0 && dt <= horizon / 50.0))
        throw UsageError("--dt must be positive and at most horizon/50");
      if (probe_times.empty()) probe_times = {"0.5,1"};
      const auto ts = parse_list(probe_times);
      std::vector<std::size_t> idx;
      for (double t : ts) {
        if (!(t >= 0.0 && t <= horizon)) throw UsageError("probe time " + num(t) + " outside [0, horizon]");
        idx.push_back(static_cast<std::size_t>(std::llround(t / dt)));
      }
      struct Point {
        double t = 0.0, r = 0.0, h = 0.0;
        std::int32_t id = 0;
      };
      auto rows = mc::run_replicas(common.run(), [&](std::size_t, mc::Rng& rng) {
        auto path = sample_besq(theta, horizon, dt, rng);
        const auto h = signed_field(path, rng);
        std::vector<Point> out;
        for (std::size_t k : idx) out.push_back({path.times[k], path.values[k], h[k], path.excursion_id[k]});
        return out;
      });
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"replica", "t", "R", "h", "excursion_id"});
      for (std::size_t i = 0; i < rows.size(); ++i)
        for (const auto& p : rows[i]) csv.row(i, p.t, p.r, p.h, static_cast<std::int64_t>(p.id));
    };
  }

  // duality1d
  {
    auto* sub = app.add_subcommand("duality1d", "Two-point function of the signed 1D field against the dual moment");
    sub->add_option("--theta", theta, "Half the dimension, in (0, 1)")->required();
    sub->add_option("--x", x, "First time")->required();
    sub->add_option("--y", y, "Second time")->required();
    sub->add_option("--dt", dt, "Grid step");
    add_common(sub, common);
    actions["duality1d"] = [&](std::ostream& os, const CLI::App* s) {
      const auto rep = check_duality(theta, x, y, dt, common.run());
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"theta", "x", "y", "dt", "zero_threshold", "lhs", "lhs_se", "lhs_bridge", "lhs_bridge_se", "rhs",
                  "rel_error", "rel_error_bridge"});
      csv.row(theta, x, y, rep.dt, rep.zero_threshold, rep.lhs.mean, rep.lhs.se, rep.lhs_bridge.mean,
              rep.lhs_bridge.se, rep.rhs, std::abs(rep.lhs.mean - rep.rhs) / rep.rhs,
              std::abs(rep.lhs_bridge.mean - rep.rhs) / rep.rhs);
    };
  }

  // martingale1d
  {
    auto* sub = app.add_subcommand("martingale1d", "Laguerre martingales of the squared Bessel process");
    sub->add_option("--theta", theta, "Half the dimension, in (0, 1)")->required();
    sub->add_option("--n", n, "Degree")->check(CLI::Range(1, 3));
    sub->add_option("--times", times, "Times, e.g. 0.5,1,2");
    sub->add_option("--laguerre-theta", laguerre_theta, "Laguerre parameter (defaults to theta)");
    add_common(sub, common);
    actions["martingale1d"] = [&](std::ostream& os, const CLI::App* s) {
      if (times.empty()) times = {"0.5,1,2"};
      const auto ts = parse_list(times);
      const auto est = check_martingale(theta, n, ts, common.run(), laguerre_theta);
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"t", "n", "mean", "se", "replicas"});
      for (std::size_t i = 0; i < ts.size(); ++i) csv.row(ts[i], n, est[i].mean, est[i].se, est[i].n);
    };
  }

  // minkowski
  {
    auto* sub = app.add_subcommand("minkowski", "Finite-r Minkowski estimator of the largest cluster");
    sub->add_option("--theta", theta, "Soup intensity")->required();
    sub->add_option("--r", r, "Neighbourhood radius")->required();
    sub->add_option("--zr", zr, "Z_r; estimated from --zr-replicas soups when omitted");
    sub->add_option("--zr-replicas", zr_replicas, "Replicas for estimating Z_r");
    domain_opts(sub, 64, false);
    add_common(sub, common);
    actions["minkowski"] = [&](std::ostream& os, const CLI::App* s) {
      const auto domain = build_domain(Shape::UnitDisc, mesh);
      double z = zr;
      if (!(z > 0.0)) {
        // Independent stream for Z_r so the per-replica samples do not depend on it.
        const mc::RunSpec zrun{common.seed ^ 0x5a5a5a5a5a5a5a5aULL, zr_replicas, common.workers};
        z = estimate_Zr(domain, theta, r, zrun).mean;
        if (!(z > 0.0)) throw std::runtime_error("minkowski: estimated Z_r is zero; pass --zr or more --zr-replicas");
      }
      const LoopSoupSampler sampler(domain);
      struct Row {
        std::int32_t id = -1;
        std::size_t size = 0;
        double mu = 0.0;
      };
      auto rows = mc::run_replicas(common.run(), [&](std::size_t, mc::Rng& rng) {
        const auto soup = sampler.sample(theta, rng);
        const auto partition = build_clusters(soup);
        Row row;
        for (std::size_t c = 0; c < partition.size(); ++c)
          if (partition.cluster_vertices[c].size() > row.size) {
            row.size = partition.cluster_vertices[c].size();
            row.id = static_cast<std::int32_t>(c);
          }
        if (row.id >= 0) row.mu = minkowski_estimate(domain, partition, row.id, r, z);
        return row;
      });
      os << seed_line(s, common.seed) << '\n';
      Csv csv(os);
      csv.header({"replica", "cluster_id", "cluster_size", "r", "zr", "mu"});
      for (std::size_t i = 0; i < rows.size(); ++i)
        csv.row(i, static_cast<std::int64_t>(rows[i].id), rows[i].size, r, z, rows[i].mu);
    };
  }

  // Merge --config before parsing; explicit flags win.
  std::vector<std::string> args = args_in;
  try {
    for (std::size_t i = 2; i < args.size(); ++i) {
      std::string path;
      if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
      else if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
      if (path.empty()) continue;
      const std::string subname = args.size() > 1 ? args[1] : "";
      CLI::App* sub = nullptr;
      try {
        sub = app.get_subcommand(subname);
      } catch (const CLI::OptionNotFound&) {
        break;
      }
      std::vector<std::string> injected;
      for (const auto& [key, value] : read_config(path)) {
        const std::string flag = "--" + key;
        if (sub->get_option_no_throw(flag) == nullptr || key == "config")
          throw UsageError("unknown config key '" + key + "' in " + path);
        const bool explicit_flag = std::any_of(args.begin() + 2, args.end(), [&](const std::string& a) {
          return a == flag || a.rfind(flag + "=", 0) == 0;
        });
        if (!explicit_flag) {
          injected.push_back(flag);
          injected.push_back(value);
        }
      }
      args.insert(args.begin() + 2, injected.begin(), injected.end());
      break;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << LOOPFIELD_VERSION << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  }

  const CLI::App* sub = app.get_subcommands().front();
  if (sub->get_option_no_throw("--seed") && sub->get_option("--seed")->count() == 0) {
    if (const char* env = std::getenv("LOOPFIELD_SEED")) {
      try {
        std::size_t used = 0;
        common.seed = std::stoull(env, &used);
        if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
      } catch (const std::exception&) {
        err << "error: LOOPFIELD_SEED must be an unsigned integer\n";
        return kExitUsage;
      }
    }
  }

  try {
    std::ostringstream buffer;
    actions.at(sub->get_name())(buffer, sub);
    if (common.out.empty() || common.out == "-") {
      out << buffer.str();
    } else {
      std::ofstream file(common.out, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open " + common.out + " for writing");
      file << buffer.str();
      if (!file) throw std::runtime_error("failed writing " + common.out);
    }
    if (!check_failure.empty()) {
      err << "error: " << check_failure << '\n';
      return kExitRuntime;
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace loopfield::cli
