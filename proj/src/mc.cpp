#include "loopfield/mc.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <vector>

namespace loopfield::mc {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Rng::Rng(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Rng::result_type Rng::operator()() {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

double Rng::uniform() {
  // 53 random bits, shifted by half an ulp so the result is never 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Rng::exponential(double mean) { return -mean * std::log(uniform()); }

double Rng::normal() { return normal_(*this); }

double Rng::gamma(double shape, double scale) {
  return std::gamma_distribution<double>(shape, scale)(*this);
}

std::uint64_t Rng::poisson(double mean) {
  if (!(mean > 0.0)) return 0;
  return static_cast<std::uint64_t>(std::poisson_distribution<long long>(mean)(*this));
}

int Rng::sign() { return ((*this)() >> 63) ? 1 : -1; }

Rng replica_rng(std::uint64_t master_seed, std::uint64_t index) {
  std::uint64_t state = index;
  const std::uint64_t mixed_index = splitmix64(state);
  state = master_seed;
  const std::uint64_t mixed_master = splitmix64(state);
  return Rng(mixed_master ^ std::rotl(mixed_index, 17));
}

Estimate mean_se(std::span<const double> xs) {
  Estimate e;
  e.n = xs.size();
  if (xs.empty()) return e;
  // Welford
  double mean = 0.0, m2 = 0.0;
  std::size_t k = 0;
  for (double x : xs) {
    ++k;
    const double d = x - mean;
    mean += d / static_cast<double>(k);
    m2 += d * (x - mean);
  }
  e.mean = mean;
  if (k > 1) e.se = std::sqrt(m2 / static_cast<double>(k - 1) / static_cast<double>(k));
  return e;
}

Estimate binomial(std::size_t successes, std::size_t trials) {
  if (trials == 0) throw std::invalid_argument("binomial: zero trials");
  const double p = static_cast<double>(successes) / static_cast<double>(trials);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(trials)), trials};
}

Estimate covariance_se(std::span<const double> xs, std::span<const double> ys) {
  if (xs.size() != ys.size() || xs.size() < 2)
    throw std::invalid_argument("covariance_se: need two equally sized samples of length >= 2");
  const double mx = mean_se(xs).mean;
  const double my = mean_se(ys).mean;
  std::vector<double> products(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) products[i] = (xs[i] - mx) * (ys[i] - my);
  Estimate e = mean_se(products);
  const double n = static_cast<double>(xs.size());
  e.mean *= n / (n - 1.0);
  return e;
}

double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf) {
  if (samples.empty()) throw std::invalid_argument("ks_statistic: empty sample");
  std::vector<double> sorted(samples.begin(), samples.end());
  std::sort(sorted.begin(), sorted.end());
  const double n = static_cast<double>(sorted.size());
  double d = 0.0;
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double f = cdf(sorted[i]);
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

double ks_two_sample(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_two_sample: empty sample");
  std::vector<double> sa(a.begin(), a.end()), sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size()), nb = static_cast<double>(sb.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double x = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= x) ++i;
    while (j < sb.size() && sb[j] <= x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

namespace {

double gamma_series(double a, double x) {
  double term = 1.0 / a;
  double sum = term;
  for (int n = 1; n < 10000; ++n) {
    term *= x / (a + n);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Upper tail Q(a, x) by the modified Lentz continued fraction.
double gamma_continued_fraction(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_cdf(double shape, double x) {
  if (!(shape > 0.0)) throw std::invalid_argument("gamma_cdf: shape must be positive");
  if (x <= 0.0) return 0.0;
  if (x < shape + 1.0) return std::min(1.0, gamma_series(shape, x));
  return std::max(0.0, 1.0 - gamma_continued_fraction(shape, x));
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

LineFit fit_slope(std::span<const double> xs, std::span<const double> ys,
                  std::span<const double> weights) {
  if (xs.size() != ys.size() || xs.size() != weights.size())
    throw std::invalid_argument("fit_slope: mismatched input lengths");
  if (xs.size() < 3) throw std::invalid_argument("fit_slope: need at least 3 points");
  double s = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double w = weights[i];
    if (!(w > 0.0) || !std::isfinite(w)) throw std::invalid_argument("fit_slope: weights must be positive");
    s += w;
    sx += w * xs[i];
    sy += w * ys[i];
    sxx += w * xs[i] * xs[i];
    sxy += w * xs[i] * ys[i];
  }
  const double delta = s * sxx - sx * sx;
  if (!(std::abs(delta) > 1e-300 * s * sxx) || delta <= 0.0)
    throw std::invalid_argument("fit_slope: degenerate abscissae");
  LineFit fit;
  fit.slope = (s * sxy - sx * sy) / delta;
  fit.intercept = (sxx * sy - sx * sxy) / delta;
  double chi2 = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double r = ys[i] - fit.intercept - fit.slope * xs[i];
    chi2 += weights[i] * r * r;
  }
  const double dof = static_cast<double>(xs.size()) - 2.0;
  fit.slope_se = std::sqrt(chi2 / dof * s / delta);
  fit.slope_se_weights = std::sqrt(s / delta);
  return fit;
}

}  // namespace loopfield::mc
