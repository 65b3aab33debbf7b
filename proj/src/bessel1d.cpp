#include "loopfield/bessel1d.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "loopfield/special.hpp"

namespace loopfield {

std::int32_t BesqPath::excursions() const {
  return excursion_id.empty() ? 0 : *std::max_element(excursion_id.begin(), excursion_id.end());
}

double besq_transition(double v, double theta, double dt, mc::Rng& rng) {
  const auto k = rng.poisson(v / (2.0 * dt));
  return 2.0 * dt * rng.gamma(theta + static_cast<double>(k), 1.0);
}

BesqPath sample_besq(double theta, double horizon, double dt, mc::Rng& rng) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("sample_besq: theta must lie in (0, 1)");
  if (!(horizon > 0.0 && dt > 0.0)) throw std::invalid_argument("sample_besq: horizon and dt must be positive");
  if (dt > horizon / 50.0) throw std::invalid_argument("sample_besq: dt must not exceed horizon/50");
  const auto steps = static_cast<std::size_t>(std::llround(horizon / dt));

  BesqPath p;
  p.theta = theta;
  p.dt = dt;
  p.zero_threshold = std::pow(dt, 0.9);
  p.times.resize(steps + 1);
  p.values.resize(steps + 1);
  p.excursion_id.resize(steps + 1);
  p.values[0] = 0.0;
  for (std::size_t k = 1; k <= steps; ++k) p.values[k] = besq_transition(p.values[k - 1], theta, dt, rng);

  std::int32_t current = 0;
  bool inside = false;
  for (std::size_t k = 0; k <= steps; ++k) {
    p.times[k] = static_cast<double>(k) * dt;
    if (p.values[k] < p.zero_threshold) {
      inside = false;
      p.excursion_id[k] = 0;
      continue;
    }
    if (!inside) {
      inside = true;
      ++current;
    }
    p.excursion_id[k] = current;
  }
  return p;
}

std::vector<double> signed_field(BesqPath& path, mc::Rng& rng) {
  path.spins.resize(static_cast<std::size_t>(path.excursions()));
  for (int& s : path.spins) s = rng.sign();
  std::vector<double> h(path.values.size());
  for (std::size_t k = 0; k < h.size(); ++k) {
    const std::int32_t id = path.excursion_id[k];
    const int s = id > 0 ? path.spins[static_cast<std::size_t>(id - 1)] : rng.sign();
    h[k] = s * std::pow(path.values[k], 1.0 - path.theta);
  }
  return h;
}

std::vector<mc::Estimate> check_martingale(double theta, int n, const std::vector<double>& times,
                                           const mc::RunSpec& run, double laguerre_theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("check_martingale: theta must lie in (0, 1)");
  if (n < 1 || n > 3) throw std::invalid_argument("check_martingale: n must lie in {1, 2, 3}");
  if (times.empty()) throw std::invalid_argument("check_martingale: no times");
  for (std::size_t i = 0; i < times.size(); ++i)
    if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1])))
      throw std::invalid_argument("check_martingale: times must be positive and increasing");
  const double p = laguerre_theta > 0.0 ? laguerre_theta : theta;

  auto rows = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    std::vector<double> out(times.size());
    double r = 0.0, t = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
      r = besq_transition(r, theta, times[i] - t, rng);
      t = times[i];
      out[i] = std::pow(2.0 * t, n) * special::laguerre(n, p, r / (2.0 * t));
    }
    return out;
  });
  std::vector<mc::Estimate> result;
  std::vector<double> column(rows.size());
  for (std::size_t i = 0; i < times.size(); ++i) {
    for (std::size_t k = 0; k < rows.size(); ++k) column[k] = rows[k][i];
    result.push_back(mc::mean_se(column));
  }
  return result;
}

double no_zero_bridge_probability(double v, double w, double theta, double dt) {
  if (v <= 0.0 || w <= 0.0) return 0.0;
  const double z = std::sqrt(v * w) / dt;
  // I_{theta-1} - I_{1-theta} = (2/pi) sin(pi theta) K_{1-theta}, and
  // K / I ~ pi e^{-2z} once z is large.
  if (z > 30.0) return 1.0 - 2.0 * std::sin(std::numbers::pi * theta) * std::exp(-2.0 * z);
  return special::bessel_i(1.0 - theta, z) / special::bessel_i(theta - 1.0, z);
}

namespace {

// Paths on [x, y] with grid step dt, R_x drawn exactly from 0. Each stride
// s reads the same paths on the coarser grid s dt.
std::vector<DualityReport> duality_reports(double theta, double x, double y, double dt,
                                           const std::vector<std::size_t>& strides, const mc::RunSpec& run) {
  if (!(x > 0.0)) throw std::invalid_argument("check_duality: x must be positive");
  if (x > y) throw std::invalid_argument("check_duality: x must not exceed y");
  if (!(theta > 0.0 && theta < 1.0)) throw std::invalid_argument("check_duality: theta must lie in (0, 1)");
  if (!(dt > 0.0)) throw std::invalid_argument("check_duality: dt must be positive");
  const std::size_t coarsest = *std::max_element(strides.begin(), strides.end());
  const auto steps = static_cast<std::size_t>(std::llround((y - x) / (dt * static_cast<double>(coarsest)))) * coarsest;
  const double power = 1.0 - theta;
  const std::size_t levels = strides.size();
  std::vector<double> thresholds;
  for (std::size_t s : strides) thresholds.push_back(std::pow(dt * static_cast<double>(s), 0.9));

  auto records = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    std::vector<double> path(steps + 1);
    path[0] = besq_transition(0.0, theta, x, rng);
    for (std::size_t k = 1; k <= steps; ++k) path[k] = besq_transition(path[k - 1], theta, dt, rng);
    const double base = std::pow(path[0], power) * std::pow(path[steps], power);
    std::vector<double> out(2 * levels);
    for (std::size_t l = 0; l < levels; ++l) {
      const std::size_t s = strides[l];
      const double h = dt * static_cast<double>(s);
      bool alive = true;
      double survive = 1.0;
      for (std::size_t k = 0; k <= steps; k += s) {
        if (path[k] < thresholds[l]) alive = false;
        if (k > 0) survive *= no_zero_bridge_probability(path[k - s], path[k], theta, h);
      }
      out[2 * l] = alive ? base : 0.0;
      out[2 * l + 1] = base * survive;
    }
    return out;
  });

  const double rhs = std::exp(std::lgamma(2.0 - theta) - std::lgamma(theta)) * std::pow(2.0 * x, 2.0 * power);
  std::vector<DualityReport> reports(levels);
  std::vector<double> a(records.size()), b(records.size());
  for (std::size_t l = 0; l < levels; ++l) {
    for (std::size_t k = 0; k < records.size(); ++k) {
      a[k] = records[k][2 * l];
      b[k] = records[k][2 * l + 1];
    }
    reports[l].lhs = mc::mean_se(a);
    reports[l].lhs_bridge = mc::mean_se(b);
    reports[l].rhs = rhs;
    reports[l].dt = dt * static_cast<double>(strides[l]);
    reports[l].zero_threshold = thresholds[l];
  }
  return reports;
}

}  // namespace

DualityReport check_duality(double theta, double x, double y, double dt, const mc::RunSpec& run) {
  return duality_reports(theta, x, y, dt, {1}, run).front();
}

std::pair<DualityReport, DualityReport> check_duality_coupled(double theta, double x, double y, double dt,
                                                              const mc::RunSpec& run) {
  auto r = duality_reports(theta, x, y, dt, {2, 1}, run);
  return {r[0], r[1]};
}

}  // namespace loopfield
