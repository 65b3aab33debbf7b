#include "loopfield/loopsoup.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

namespace loopfield {

namespace {

constexpr std::uint64_t kStepCap = 10'000'000;      // steps per excursion attempt
constexpr std::uint64_t kAttemptCap = 100'000'000;  // attempts per accepted excursion
constexpr double kHoldingMean = 0.25;

std::string starvation(Vertex root, const char* what) {
  return std::string("excursion sampler starved at vertex ") + std::to_string(root) + ": " + what;
}

// Logarithmic distribution P(k) = r^k / (k L), L = -log(1-r), by inversion.
int sample_logarithmic(double r, double log_mass, mc::Rng& rng) {
  double u = rng.uniform();
  double p = r / log_mass;
  int k = 1;
  while (u > p && k < 1'000'000) {
    u -= p;
    p *= r * k / (k + 1.0);
    ++k;
  }
  return k;
}

}  // namespace

double ThickLoop::radius(const LatticeDomain& domain) const {
  double r = 0.0;
  const auto& b = domain.point(base);
  for (const auto& bridge : bridges)
    for (Vertex v : bridge) {
      const auto& p = domain.point(v);
      r = std::max(r, std::hypot(p.i - b.i, p.j - b.j));
    }
  return r / domain.mesh();
}

bool try_excursion(const LatticeDomain& domain, Vertex root, Vertex min_allowed, mc::Rng& rng,
                   std::vector<Vertex>& out) {
  const std::size_t start = out.size();
  Vertex v = root;
  std::uint64_t bits = 0;
  int bits_left = 0;
  for (std::uint64_t step = 0; step < kStepCap; ++step) {
    if (bits_left == 0) {
      bits = rng();
      bits_left = 32;
    }
    const Vertex w = domain.neighbors(v)[bits & 3u];
    bits >>= 2;
    --bits_left;
    // kNoVertex is negative, so one comparison covers killing and the
    // removed vertices x_1..x_{i-1}.
    if (w < min_allowed) {
      out.resize(start);
      return false;
    }
    out.push_back(w);
    if (w == root) return true;
    v = w;
  }
  throw std::runtime_error(starvation(root, "step cap exceeded"));
}

void sample_excursion(const LatticeDomain& domain, Vertex root, Vertex min_allowed, mc::Rng& rng,
                      std::vector<Vertex>& out) {
  for (std::uint64_t attempt = 0; attempt < kAttemptCap; ++attempt)
    if (try_excursion(domain, root, min_allowed, rng, out)) return;
  throw std::runtime_error(starvation(root, "return probability numerically zero"));
}

LoopSoupSampler::LoopSoupSampler(const LatticeDomain& domain) : domain_(&domain) {
  const auto n = static_cast<Eigen::Index>(domain.size());
  // Laplacian in reverse vertex order: pivot k of the LDL^T factorization is
  // 1 / [(L restricted to x_{n-k}..x_n)^{-1}]_{kk}, i.e. 4 (1 - r).
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(5 * domain.size());
  for (Eigen::Index v = 0; v < n; ++v) {
    const Eigen::Index rv = n - 1 - v;
    entries.emplace_back(rv, rv, 4.0);
    for (Vertex w : domain.neighbors(static_cast<Vertex>(v)))
      if (w != kNoVertex) entries.emplace_back(rv, n - 1 - w, -1.0);
  }
  Eigen::SparseMatrix<double> reversed(n, n);
  reversed.setFromTriplets(entries.begin(), entries.end());
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::NaturalOrdering<int>> ldlt(reversed);
  if (ldlt.info() != Eigen::Success) throw std::runtime_error("LoopSoupSampler: Laplacian factorization failed");
  const Eigen::VectorXd pivots = ldlt.vectorD();

  return_prob_.resize(domain.size());
  log_mass_.resize(domain.size());
  for (Eigen::Index v = 0; v < n; ++v) {
    const double r = std::clamp(1.0 - pivots[n - 1 - v] / 4.0, 0.0, 1.0);
    return_prob_[static_cast<std::size_t>(v)] = r;
    log_mass_[static_cast<std::size_t>(v)] = -std::log1p(-r);
  }
}

LoopSoupSample LoopSoupSampler::sample(double theta, mc::Rng& rng) const {
  if (!(theta > 0.0)) throw std::invalid_argument("sample_loop_soup: theta must be positive");
  const LatticeDomain& domain = *domain_;
  const std::size_t n = domain.size();

  LoopSoupSample s;
  s.theta = theta;
  s.occupation.assign(n, 0.0);
  s.trivial_field.resize(n);

  for (std::size_t i = 0; i < n; ++i) {
    const double r = return_prob_[i];
    if (r <= 0.0) continue;
    const auto count = rng.poisson(theta * log_mass_[i]);
    for (std::uint64_t c = 0; c < count; ++c) {
      DiscreteLoop loop;
      loop.root = static_cast<Vertex>(i);
      loop.returns = sample_logarithmic(r, log_mass_[i], rng);
      loop.visits.push_back(loop.root);
      for (int k = 0; k < loop.returns; ++k) sample_excursion(domain, loop.root, loop.root, rng, loop.visits);
      s.loops.push_back(std::move(loop));
    }
  }

  for (auto& loop : s.loops) {
    loop.holding.resize(loop.visits.size() - 1);
    for (std::size_t k = 0; k + 1 < loop.visits.size(); ++k) {
      loop.holding[k] = rng.exponential(kHoldingMean);
      s.occupation[static_cast<std::size_t>(loop.visits[k])] += loop.holding[k];
    }
  }
  for (std::size_t v = 0; v < n; ++v) {
    s.trivial_field[v] = rng.gamma(theta, kHoldingMean);
    s.occupation[v] += s.trivial_field[v];
  }
  return s;
}

LoopSoupSample sample_loop_soup(const LatticeDomain& domain, double theta, mc::Rng& rng) {
  return LoopSoupSampler(domain).sample(theta, rng);
}

double full_return_probability(const GreenTable& green, Vertex x) {
  return 1.0 - 1.0 / (4.0 * green.diagonal(x));
}

namespace {

void check_thick_args(const LatticeDomain& domain, Vertex x, double a, double return_prob) {
  if (!(a > 0.0)) throw std::invalid_argument("sample_thick_loop: a must be positive");
  if (x < 0 || static_cast<std::size_t>(x) >= domain.size())
    throw std::invalid_argument("sample_thick_loop: base vertex not in domain");
  if (!(return_prob >= 0.0 && return_prob < 1.0))
    throw std::invalid_argument("sample_thick_loop: return probability must lie in [0, 1)");
}

ThickLoop thick_loop_with(const LatticeDomain& domain, Vertex x, double a, double return_prob, std::uint64_t count,
                          mc::Rng& rng) {
  ThickLoop loop;
  loop.base = x;
  loop.a = a;
  for (std::uint64_t b = 0; b < count; ++b) {
    std::vector<Vertex> bridge{x};
    do {
      sample_excursion(domain, x, 0, rng, bridge);
    } while (rng.uniform() < return_prob);
    loop.bridges.push_back(std::move(bridge));
  }
  return loop;
}

}  // namespace

ThickLoop sample_thick_loop(const LatticeDomain& domain, Vertex x, double a, double return_prob,
                            mc::Rng& rng) {
  check_thick_args(domain, x, a, return_prob);
  if (return_prob == 0.0) return thick_loop_with(domain, x, a, return_prob, 0, rng);
  const auto count = rng.poisson(a * return_prob / (1.0 - return_prob));
  return thick_loop_with(domain, x, a, return_prob, count, rng);
}

double thick_loop_nonempty_probability(double a, double return_prob) {
  return -std::expm1(-a * return_prob / (1.0 - return_prob));
}

ThickLoop sample_thick_loop_nonempty(const LatticeDomain& domain, Vertex x, double a, double return_prob,
                                     mc::Rng& rng) {
  check_thick_args(domain, x, a, return_prob);
  if (return_prob == 0.0) throw std::invalid_argument("sample_thick_loop_nonempty: the thick loop is always empty");
  // Zero-truncated Poisson by inversion.
  const double lambda = a * return_prob / (1.0 - return_prob);
  double u = rng.uniform() * thick_loop_nonempty_probability(a, return_prob);
  double p = lambda * std::exp(-lambda);
  std::uint64_t k = 1;
  while (u > p && k < 1'000'000) {
    u -= p;
    ++k;
    p *= lambda / static_cast<double>(k);
  }
  return thick_loop_with(domain, x, a, return_prob, k, rng);
}

std::vector<double> recompute_occupation(const LoopSoupSample& sample) {
  std::vector<double> occ(sample.trivial_field.size(), 0.0);
  for (const auto& loop : sample.loops)
    for (std::size_t k = 0; k < loop.holding.size(); ++k)
      occ[static_cast<std::size_t>(loop.visits[k])] += loop.holding[k];
  for (std::size_t v = 0; v < occ.size(); ++v) occ[v] += sample.trivial_field[v];
  return occ;
}

std::vector<double> occupation_field(const LoopSoupSample& sample) {
  auto occ = recompute_occupation(sample);
  if (occ != sample.occupation) throw std::logic_error("occupation_field: stored occupation is inconsistent");
  return occ;
}

}  // namespace loopfield
