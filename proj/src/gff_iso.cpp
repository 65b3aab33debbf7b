#include "loopfield/gff_iso.hpp"

#include <cmath>
#include <stdexcept>

#include "loopfield/loopsoup.hpp"

namespace loopfield {

namespace {

constexpr int kHitAttempts = 1'000'000;

// One jump of the embedded chain; -1 when killed.
int jump(const TinyGraph& g, int v, mc::Rng& rng) {
  double u = rng.uniform() * g.rate(v);
  const auto& row = g.weights[static_cast<std::size_t>(v)];
  for (std::size_t w = 0; w < row.size(); ++w) {
    if (u < row[w]) return static_cast<int>(w);
    u -= row[w];
  }
  return -1;
}

}  // namespace

TinyGraph TinyGraph::builtin(const std::string& name) {
  TinyGraph g;
  if (name == "k2" || name == "builtin:k2") {
    g.weights = {{0.0, 1.0}, {1.0, 0.0}};
    g.killing = {2.0, 2.0};
  } else if (name == "path3" || name == "builtin:path3") {
    g.weights = {{0.0, 1.0, 0.0}, {1.0, 0.0, 1.0}, {0.0, 1.0, 0.0}};
    g.killing = {1.0, 0.5, 1.0};
  } else {
    throw std::invalid_argument("unknown graph '" + name + "' (expected builtin:k2 or builtin:path3)");
  }
  g.validate();
  return g;
}

double TinyGraph::rate(int v) const {
  double r = killing[static_cast<std::size_t>(v)];
  for (double w : weights[static_cast<std::size_t>(v)]) r += w;
  return r;
}

void TinyGraph::validate() const {
  const std::size_t n = size();
  if (n == 0 || n > 6) throw std::invalid_argument("TinyGraph: between 1 and 6 vertices required");
  if (weights.size() != n) throw std::invalid_argument("TinyGraph: weight matrix size mismatch");
  for (std::size_t v = 0; v < n; ++v) {
    if (weights[v].size() != n) throw std::invalid_argument("TinyGraph: weight matrix must be square");
    if (killing[v] < 0.0) throw std::invalid_argument("TinyGraph: killing rates must be nonnegative");
    for (std::size_t w = 0; w < n; ++w)
      if (weights[v][w] < 0.0 || weights[v][w] != weights[w][v] || (v == w && weights[v][w] != 0.0))
        throw std::invalid_argument("TinyGraph: weights must be symmetric, nonnegative, loop-free");
  }
  Eigen::MatrixXd p(n, n);
  for (std::size_t v = 0; v < n; ++v) {
    const double lambda = rate(static_cast<int>(v));
    if (!(lambda > 0.0)) throw std::invalid_argument("TinyGraph: isolated vertex without killing");
    for (std::size_t w = 0; w < n; ++w)
      p(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(w)) = weights[v][w] / lambda;
  }
  const double radius = p.eigenvalues().cwiseAbs().maxCoeff();
  if (!(radius < 1.0 - 1e-12)) throw std::invalid_argument("TinyGraph: walk is not transient");
}

Eigen::MatrixXd TinyGraph::green() const {
  const auto n = static_cast<Eigen::Index>(size());
  Eigen::MatrixXd q(n, n);
  for (Eigen::Index v = 0; v < n; ++v)
    for (Eigen::Index w = 0; w < n; ++w)
      q(v, w) = (v == w ? rate(static_cast<int>(v)) : 0.0) -
                weights[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)];
  return q.inverse();
}

double TinyGraph::return_probability(int y) const { return 1.0 - 1.0 / (rate(y) * green()(y, y)); }

TinyPath sample_tiny_path(const TinyGraph& graph, int x, int y, mc::Rng& rng) {
  TinyPath path;
  bool hit = false;
  for (int attempt = 0; attempt < kHitAttempts && !hit; ++attempt) {
    path.visits.assign(1, x);
    for (int v = x;;) {
      v = jump(graph, v, rng);
      if (v < 0) break;
      path.visits.push_back(v);
      if (v == y) {
        hit = true;
        break;
      }
    }
  }
  if (!hit) throw std::runtime_error("sample_tiny_path: target is not reachable");

  std::vector<int> pending;
  for (int v = y;;) {
    v = jump(graph, v, rng);
    if (v < 0) break;
    pending.push_back(v);
    if (v == y) {
      path.visits.insert(path.visits.end(), pending.begin(), pending.end());
      pending.clear();
      ++path.returns_to_target;
    }
  }
  path.holding.resize(path.visits.size());
  for (std::size_t k = 0; k < path.visits.size(); ++k)
    path.holding[k] = rng.exponential(1.0 / graph.rate(path.visits[k]));
  return path;
}

double bfs_dynkin_closed_form(const TinyGraph& graph, int x, int y) {
  const Eigen::MatrixXd g = graph.green();
  const auto n = g.rows();
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  const Eigen::MatrixXd inner = (g.inverse() + id).inverse();
  return inner(x, y) / std::sqrt((id + g).determinant());
}

BfsDynkinReport bfs_dynkin_check(const TinyGraph& graph, int x, int y, const mc::RunSpec& run, Functional f) {
  graph.validate();
  const int n = static_cast<int>(graph.size());
  if (x < 0 || y < 0 || x >= n || y >= n) throw std::invalid_argument("bfs_dynkin_check: vertex out of range");
  if (x == y) throw std::invalid_argument("bfs_dynkin_check: x and y must differ");
  const Eigen::MatrixXd g = graph.green();
  if (!(g(x, y) > 0.0)) throw std::invalid_argument("bfs_dynkin_check: x and y are disconnected");
  const Eigen::MatrixXd chol = g.llt().matrixL();

  struct Record {
    double lhs = 0.0, rhs = 0.0;
  };
  auto records = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    Eigen::VectorXd z(n);
    for (int i = 0; i < n; ++i) z[i] = rng.normal();
    const Eigen::VectorXd phi = chol * z;
    const TinyPath path = sample_tiny_path(graph, x, y, rng);
    double path_time = 0.0;
    for (double h : path.holding) path_time += h;
    const double half_sq = 0.5 * phi.squaredNorm();
    Record r;
    if (f == Functional::One) {
      r.lhs = phi[x] * phi[y];
      r.rhs = g(x, y);
    } else {
      r.lhs = phi[x] * phi[y] * std::exp(-half_sq);
      r.rhs = g(x, y) * std::exp(-half_sq - path_time);
    }
    return r;
  });
  std::vector<double> lhs(records.size()), rhs(records.size()), diff(records.size());
  for (std::size_t k = 0; k < records.size(); ++k) {
    lhs[k] = records[k].lhs;
    rhs[k] = records[k].rhs;
    diff[k] = lhs[k] - rhs[k];
  }
  BfsDynkinReport report;
  report.lhs = mc::mean_se(lhs);
  report.rhs = mc::mean_se(rhs);
  report.difference = mc::mean_se(diff);
  report.closed_form = f == Functional::One ? g(x, y) : bfs_dynkin_closed_form(graph, x, y);
  report.green_xy = g(x, y);
  return report;
}

ChiSquared geometric_returns_test(const TinyGraph& graph, int x, int y, const mc::RunSpec& run) {
  graph.validate();
  const double r = graph.return_probability(y);
  auto counts = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    return sample_tiny_path(graph, x, y, rng).returns_to_target;
  });
  const double total = static_cast<double>(counts.size());
  // Bins 0..last-1 exact, last bin the tail; keep expected counts >= 5.
  int last = 0;
  while (total * (1.0 - r) * std::pow(r, last + 1) >= 5.0) ++last;
  if (last < 1) throw std::invalid_argument("geometric_returns_test: too few replicas for a chi-squared test");
  std::vector<double> observed(static_cast<std::size_t>(last) + 1, 0.0);
  for (int k : counts) observed[static_cast<std::size_t>(std::min(k, last))] += 1.0;
  ChiSquared out;
  for (int k = 0; k <= last; ++k) {
    const double p = k < last ? (1.0 - r) * std::pow(r, k) : std::pow(r, last);
    const double e = total * p;
    const double d = observed[static_cast<std::size_t>(k)] - e;
    out.statistic += d * d / e;
  }
  out.dof = last;
  out.p_value = 1.0 - mc::gamma_cdf(out.dof / 2.0, out.statistic / 2.0);
  return out;
}

LeJanReport lejan_check(const LatticeDomain& domain, Vertex x, Vertex y, const mc::RunSpec& run, double theta) {
  if (theta != 0.5) throw std::invalid_argument("lejan_check: only theta = 1/2 is supported");
  const auto n = static_cast<Vertex>(domain.size());
  if (x < 0 || y < 0 || x >= n || y >= n || x == y)
    throw std::invalid_argument("lejan_check: probes must be two distinct vertices of the domain");
  const GreenTable green(domain);
  const Eigen::VectorXd gx = green.column(x);
  const double gxx = gx[x], gxy = gx[y], gyy = green.diagonal(y);
  const LoopSoupSampler soup(domain);
  const GffSampler gff(domain);

  struct Record {
    double lx = 0.0, ly = 0.0, px = 0.0, py = 0.0;
  };
  auto records = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    const auto s = soup.sample(theta, rng);
    const auto phi = gff.sample(rng);
    return Record{s.occupation[static_cast<std::size_t>(x)], s.occupation[static_cast<std::size_t>(y)],
                  phi[static_cast<std::size_t>(x)], phi[static_cast<std::size_t>(y)]};
  });

  const std::size_t m = records.size();
  std::vector<double> ell(m), half_sq(m), ell_scaled(m), gff_scaled(m), soup_prod(m), gff_prod(m);
  for (std::size_t k = 0; k < m; ++k) {
    const auto& r = records[k];
    ell[k] = r.lx;
    half_sq[k] = 0.5 * r.px * r.px;
    ell_scaled[k] = r.lx / gxx;
    gff_scaled[k] = half_sq[k] / gxx;
    soup_prod[k] = (r.lx - theta * gxx) * (r.ly - theta * gyy);
    gff_prod[k] = 0.25 * (r.px * r.px - gxx) * (r.py * r.py - gyy);
  }
  const auto cdf = [theta](double v) { return mc::gamma_cdf(theta, v); };
  LeJanReport report;
  report.x = x;
  report.y = y;
  report.green_xx = gxx;
  report.green_xy = gxy;
  report.ks_two_sample = mc::ks_two_sample(ell, half_sq);
  report.ks_soup = mc::ks_statistic(ell_scaled, cdf);
  report.ks_gff = mc::ks_statistic(gff_scaled, cdf);
  report.soup_cov = mc::mean_se(soup_prod);
  report.gff_cov = mc::mean_se(gff_prod);
  report.predicted = 0.5 * gxy * gxy;
  return report;
}

}  // namespace loopfield
