#include "loopfield/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "loopfield/loopsoup.hpp"

namespace loopfield::special {

namespace {

void check_degree(int n, int cap, const char* who) {
  if (n < 0 || n > cap)
    throw std::invalid_argument(std::string(who) + ": degree must lie in [0, " + std::to_string(cap) + "]");
}

// c_n = 1, c_{i-1} = -c_i i (theta + i - 1) / (n - i + 1).
std::vector<double> laguerre_coeffs_unchecked(int n, double theta) {
  std::vector<double> c(static_cast<std::size_t>(n) + 1);
  c[static_cast<std::size_t>(n)] = 1.0;
  for (int i = n; i >= 1; --i)
    c[static_cast<std::size_t>(i - 1)] = -c[static_cast<std::size_t>(i)] * i * (theta + i - 1.0) / (n - i + 1.0);
  return c;
}

double horner(const std::vector<double>& c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double laguerre_unchecked(int n, double theta, double u) { return horner(laguerre_coeffs_unchecked(n, theta), u); }

}  // namespace

std::vector<double> laguerre_coefficients(int n, double theta) {
  check_degree(n, kMaxDegree, "laguerre");
  if (!(theta > 0.0)) throw std::invalid_argument("laguerre: theta must be positive");
  return laguerre_coeffs_unchecked(n, theta);
}

double laguerre(int n, double theta, double u) { return horner(laguerre_coefficients(n, theta), u); }

std::vector<double> hermite_coefficients(int n) {
  check_degree(n, kMaxDegree, "hermite");
  // (-1)^i n! / (i! (n-2i)! 2^i) on X^{n-2i}.
  std::vector<double> c(static_cast<std::size_t>(n) + 1, 0.0);
  double coeff = 1.0;
  for (int i = 0; 2 * i <= n; ++i) {
    c[static_cast<std::size_t>(n - 2 * i)] = coeff;
    coeff *= -static_cast<double>(n - 2 * i) * (n - 2 * i - 1) / (2.0 * (i + 1));
  }
  return c;
}

double hermite(int n, double x) { return horner(hermite_coefficients(n), x); }

namespace {

constexpr double kAsymptoticSwitch = 650.0;

// sqrt(2 pi z) e^{-z} I_nu(z) for large z, first terms of the expansion.
double asymptotic_factor(double nu, double z) {
  const double mu = 4.0 * nu * nu;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(mu - (2.0 * k - 1.0) * (2.0 * k - 1.0)) / (k * 8.0 * z);
    sum += term;
  }
  return sum;
}

double bessel_series(double nu, double z) {
  const double half = z / 2.0;
  const double q = half * half;
  double term = std::exp(nu * std::log(half) - std::lgamma(nu + 1.0));
  double sum = term;
  for (int k = 1; k < 100000; ++k) {
    term *= q / (k * (k + nu));
    sum += term;
    if (k > half && term < 1e-17 * sum) break;
  }
  return sum;
}

void check_bessel_args(double nu, double z) {
  if (!(nu > -1.0)) throw std::invalid_argument("bessel_i: order must exceed -1");
  if (!(z >= 0.0)) throw std::invalid_argument("bessel_i: argument must be nonnegative");
}

}  // namespace

double bessel_i(double nu, double z) {
  check_bessel_args(nu, z);
  if (z == 0.0) {
    if (nu == 0.0) return 1.0;
    return nu > 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  if (z > kAsymptoticSwitch) return std::exp(z) / std::sqrt(2.0 * std::numbers::pi * z) * asymptotic_factor(nu, z);
  return bessel_series(nu, z);
}

double bessel_i_scaled(double nu, double z) {
  check_bessel_args(nu, z);
  if (z == 0.0) return bessel_i(nu, z);
  if (z > kAsymptoticSwitch) return asymptotic_factor(nu, z) / std::sqrt(2.0 * std::numbers::pi * z);
  return bessel_series(nu, z) * std::exp(-z);
}

double gamma_fn(double x) {
  if (!(x > 0.0)) throw std::invalid_argument("gamma_fn: argument must be positive");
  return std::tgamma(x);
}

double wick_local(double ell, double green, int n, double theta) {
  if (!(green > 0.0)) throw std::invalid_argument("wick_local: G must be positive");
  return std::pow(green, n) * laguerre(n, theta, ell / green);
}

double wick_gff(double phi, double green, int n) {
  if (!(green > 0.0)) throw std::invalid_argument("wick_gff: G must be positive");
  return std::pow(green, n / 2.0) * hermite(n, phi / std::sqrt(green));
}

double wick_mixed(double h, double ell, double green, int n, double theta) {
  if (!(green > 0.0)) throw std::invalid_argument("wick_mixed: G must be positive");
  if (!(theta > 0.0 && theta <= 0.5)) throw std::invalid_argument("wick_mixed: theta must lie in (0, 1/2]");
  return h * std::pow(green, n) * laguerre(n, 2.0 - theta, ell / green);
}

double identity_laguerre_bessel(double t, double u, double gamma, double theta) {
  if (!(t > 0.0 && u > 0.0 && gamma > 0.0 && theta > 0.0))
    throw std::invalid_argument("identity_laguerre_bessel: arguments must be positive");
  const double rate = gamma * gamma * t / 2.0;
  if (rate > 30.0) throw std::invalid_argument("identity_laguerre_bessel: gamma^2 t/2 exceeds the series budget 30");
  const double x = u * u / (2.0 * t);
  double factor = 1.0 / std::tgamma(theta);  // rate^n / (n! Gamma(theta+n))
  double lhs = 0.0;
  for (int n = 0; n <= 80; ++n) {
    lhs += factor * laguerre_unchecked(n, theta, x);
    factor *= rate / ((n + 1.0) * (theta + n));
  }
  const double rhs = std::exp(-rate) * std::pow(gamma * gamma * u * u / 4.0, (1.0 - theta) / 2.0) *
                     bessel_i(theta - 1.0, gamma * u);
  return std::abs(lhs - rhs);
}

double identity_hermite_laguerre(double h, double green, int n) {
  if (!(green > 0.0)) throw std::invalid_argument("identity_hermite_laguerre: G must be positive");
  check_degree(2 * n + 1, kMaxDegree, "identity_hermite_laguerre");
  const double lhs = std::pow(green, (2.0 * n + 1.0) / 2.0) * hermite(2 * n + 1, h / std::sqrt(green)) / std::pow(2.0, n);
  const double rhs = h * std::pow(green, n) * laguerre(n, 1.5, h * h / (2.0 * green));
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(rhs));
}

double identity_hermite_exp(double gamma, double t, double u) {
  if (!(t > 0.0)) throw std::invalid_argument("identity_hermite_exp: t must be positive");
  const double x = u / std::sqrt(t);
  double factor = 1.0;  // gamma^n t^{n/2} / n!
  double lhs = 0.0;
  for (int n = 0; n <= 40; ++n) {
    lhs += factor * hermite(n, x);
    factor *= gamma * std::sqrt(t) / (n + 1.0);
  }
  return std::abs(lhs - std::exp(gamma * u - gamma * gamma * t / 2.0));
}

double IdentityReport::max_residual() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.residual);
  return m;
}

IdentityReport identity_grid(const std::string& which) {
  IdentityReport report;
  report.which = which;
  report.tolerance = 1e-10;
  if (which == "laguerre-bessel") {
    for (double theta : {0.25, 0.5, 0.9})
      for (double t : {0.5, 1.0, 2.0})
        for (double u : {0.5, 1.0, 2.0})
          for (double g : {0.5, 1.0, 2.0})
            report.points.push_back({{{"theta", theta}, {"t", t}, {"u", u}, {"gamma", g}},
                                     identity_laguerre_bessel(t, u, g, theta)});
  } else if (which == "hermite-laguerre") {
    for (double h : {-2.0, -0.7, 0.3, 1.1, 2.5})
      for (double g : {0.5, 1.0, 2.0})
        for (int n = 0; n <= 10; ++n)
          report.points.push_back(
              {{{"h", h}, {"G", g}, {"n", static_cast<double>(n)}}, identity_hermite_laguerre(h, g, n)});
  } else if (which == "hermite-exp") {
    for (double g : {0.25, 0.5, 1.0})
      for (double t : {0.5, 1.0, 2.0})
        for (double u : {-2.0, -0.5, 0.0, 1.0, 2.0})
          report.points.push_back({{{"gamma", g}, {"t", t}, {"u", u}}, identity_hermite_exp(g, t, u)});
  } else {
    throw std::invalid_argument("identity_grid: unknown identity '" + which + "'");
  }
  return report;
}

double predicted_wick_covariance(double theta, int n, int m, double g) {
  if (n != m) return 0.0;
  return std::exp(std::lgamma(theta + n) + std::lgamma(n + 1.0) - std::lgamma(theta)) * std::pow(g, 2.0 * n);
}

WickCovariance estimate_wick_covariance(const LatticeDomain& domain, double theta, int n, int m, Vertex z, Vertex w,
                                        const mc::RunSpec& run) {
  if (z == w) throw std::invalid_argument("estimate_wick_covariance: z and w must differ");
  if (n < 0 || m < 0 || n > 3 || m > 3) throw std::invalid_argument("estimate_wick_covariance: n, m must lie in [0, 3]");
  const auto size = static_cast<Vertex>(domain.size());
  if (z < 0 || w < 0 || z >= size || w >= size) throw std::invalid_argument("estimate_wick_covariance: vertex out of range");
  const GreenTable green(domain);
  const Eigen::VectorXd gz = green.column(z);
  const double gzz = gz[z], gzw = gz[w], gww = green.diagonal(w);
  const LoopSoupSampler sampler(domain);
  auto products = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    const auto soup = sampler.sample(theta, rng);
    return wick_local(soup.occupation[static_cast<std::size_t>(z)], gzz, n, theta) *
           wick_local(soup.occupation[static_cast<std::size_t>(w)], gww, m, theta);
  });
  return {mc::mean_se(products), predicted_wick_covariance(theta, n, m, gzw)};
}

}  // namespace loopfield::special
