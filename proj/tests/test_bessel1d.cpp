#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "loopfield/bessel1d.hpp"

using namespace loopfield;

namespace {

double duality_rhs(double theta, double x) {
  return std::tgamma(2.0 - theta) / std::tgamma(theta) * std::pow(2.0 * x, 2.0 * (1.0 - theta));
}

}  // namespace

TEST_CASE("transition from zero is 2t Gamma(theta)") {
  for (double theta : {0.25, 0.6}) {
    mc::Rng rng(static_cast<std::uint64_t>(theta * 1000));
    const double t = 0.7;
    std::vector<double> s(8000);
    for (double& x : s) x = besq_transition(0.0, theta, t, rng);
    CHECK(mc::ks_statistic(s, [&](double x) { return mc::gamma_cdf(theta, x / (2 * t)); }) < 1.63 / std::sqrt(8000.0));
  }
}

TEST_CASE("transition moments") {
  const double theta = 0.4, v = 1.3, dt = 0.05;
  mc::Rng rng(2);
  std::vector<double> s(100000);
  for (double& x : s) x = besq_transition(v, theta, dt, rng);
  const auto m = mc::mean_se(s);
  CHECK(std::abs(m.mean - (v + 2 * theta * dt)) < 4.0 * m.se);
  const auto var = mc::covariance_se(s, s);
  CHECK(std::abs(var.mean - (4 * v * dt + 4 * theta * dt * dt)) < 4.0 * var.se);
}

TEST_CASE("squared Bessel processes add") {
  const double dt = 0.3;
  mc::Rng rng(3);
  const int n = 8000;
  std::vector<double> sum(n), joint(n);
  for (int k = 0; k < n; ++k) {
    sum[k] = besq_transition(0.5, 0.2, dt, rng) + besq_transition(0.8, 0.35, dt, rng);
    joint[k] = besq_transition(1.3, 0.55, dt, rng);
  }
  CHECK(mc::ks_two_sample(sum, joint) < 1.63 * std::sqrt(2.0 / n));
}

TEST_CASE("sampled paths") {
  mc::Rng rng(4);
  const double theta = 0.3, horizon = 1.0, dt = 1e-3;
  std::vector<double> end(3000);
  for (double& e : end) {
    auto path = sample_besq(theta, horizon, dt, rng);
    REQUIRE(path.values.size() == 1001);
    CHECK(path.times.back() == doctest::Approx(horizon));
    CHECK(path.values.front() == 0.0);
    CHECK(path.zero_threshold == doctest::Approx(std::pow(dt, 0.9)));
    std::int32_t last = 0;
    for (std::size_t k = 0; k < path.values.size(); ++k) {
      const bool zero = path.values[k] < path.zero_threshold;
      CHECK((path.excursion_id[k] == 0) == zero);
      if (!zero && (k == 0 || path.excursion_id[k - 1] == 0)) CHECK(path.excursion_id[k] == ++last);
      if (!zero && k > 0 && path.excursion_id[k - 1] != 0) CHECK(path.excursion_id[k] == path.excursion_id[k - 1]);
    }
    CHECK(path.excursions() == last);
    const auto h = signed_field(path, rng);
    CHECK(path.spins.size() == static_cast<std::size_t>(last));
    for (std::size_t k = 0; k < h.size(); ++k) {
      CHECK(std::abs(h[k]) == doctest::Approx(std::pow(path.values[k], 1 - theta)));
      const auto id = path.excursion_id[k];
      if (id > 0 && h[k] != 0.0) CHECK((h[k] > 0) == (path.spins[static_cast<std::size_t>(id - 1)] > 0));
    }
    e = path.values.back();
  }
  CHECK(mc::ks_statistic(end, [&](double x) { return mc::gamma_cdf(theta, x / (2 * horizon)); }) <
        1.63 / std::sqrt(3000.0));
  CHECK_THROWS(sample_besq(1.0, 1.0, 1e-3, rng));
  CHECK_THROWS(sample_besq(0.5, 1.0, 0.05, rng));
}

TEST_CASE("Laguerre martingales have zero mean and a mismatched parameter does not") {
  const std::vector<double> times{0.25, 0.5, 1.0, 2.0};
  for (int n : {1, 2, 3}) {
    const auto est = check_martingale(0.35, n, times, mc::RunSpec{static_cast<std::uint64_t>(n), 20000, 1});
    REQUIRE(est.size() == times.size());
    for (const auto& e : est) CHECK(std::abs(e.mean) < 4.0 * e.se);
  }
  const auto control = check_martingale(0.35, 1, times, mc::RunSpec{9, 20000, 1}, 0.65);
  for (std::size_t i = 0; i < times.size(); ++i) {
    // E[(2t)(R/2t - p)] = 2t (theta - p).
    CHECK(control[i].mean == doctest::Approx(2 * times[i] * (0.35 - 0.65)).epsilon(0.05));
    CHECK(std::abs(control[i].mean) > 10.0 * control[i].se);
  }
  CHECK_THROWS(check_martingale(0.35, 4, times, mc::RunSpec{1, 10, 1}));
  CHECK_THROWS(check_martingale(0.35, 1, {0.5, 0.25}, mc::RunSpec{1, 10, 1}));
}

TEST_CASE("no-zero bridge probability") {
  // At theta = 1/2 the ratio I_{1/2}/I_{-1/2} is tanh.
  for (double z : {0.1, 1.0, 5.0, 29.0, 31.0, 80.0})
    CHECK(no_zero_bridge_probability(z * z, 1.0, 0.5, 1.0) == doctest::Approx(std::tanh(z)).epsilon(1e-12));
  CHECK(no_zero_bridge_probability(0.0, 1.0, 0.3, 0.1) == 0.0);
  double prev = 0.0;
  for (double v = 0.001; v < 5.0; v *= 1.5) {
    const double p = no_zero_bridge_probability(v, 0.4, 0.3, 0.01);
    CHECK(p >= prev - 1e-14);
    CHECK(p < 1.0 + 1e-15);
    prev = p;
  }
  // Both sides of the large-argument switch agree.
  for (double theta : {0.1, 0.3, 0.45}) {
    const double below = no_zero_bridge_probability(30.0 * 30.0 - 1e-6, 1.0, theta, 1.0);
    const double above = no_zero_bridge_probability(30.0 * 30.0 + 1e-6, 1.0, theta, 1.0);
    CHECK(1.0 - below == doctest::Approx(1.0 - above).epsilon(1e-3));
  }
}

TEST_CASE("duality moment") {
  // With x = y there is no interval to survive and the identity is a Gamma moment.
  const auto same = check_duality(0.3, 0.5, 0.5, 1e-3, mc::RunSpec{1, 40000, 1});
  CHECK(same.rhs == doctest::Approx(duality_rhs(0.3, 0.5)));
  CHECK(std::abs(same.lhs.mean - same.rhs) < 4.0 * same.lhs.se);

  const auto r = check_duality(0.3, 0.5, 1.0, 2e-3, mc::RunSpec{2, 4000, 1});
  CHECK(std::abs(r.lhs.mean - r.rhs) < 0.1 * r.rhs);
  CHECK(std::abs(r.lhs_bridge.mean - r.rhs) < 0.1 * r.rhs);
  CHECK(r.lhs.mean < same.lhs.mean * std::pow(2.0, 1.4));

  // The fine level of the coupled pair reads exactly the paths of the plain check.
  const auto [coarse, fine] = check_duality_coupled(0.3, 0.5, 1.0, 2e-3, mc::RunSpec{2, 4000, 1});
  CHECK(coarse.dt == doctest::Approx(4e-3));
  CHECK(fine.dt == doctest::Approx(2e-3));
  CHECK(fine.lhs.mean == r.lhs.mean);
  CHECK(fine.lhs_bridge.mean == r.lhs_bridge.mean);
  CHECK(std::abs(coarse.lhs.mean - r.rhs) < 0.1 * r.rhs);
  CHECK_THROWS(check_duality(0.3, 1.0, 0.5, 1e-3, mc::RunSpec{1, 10, 1}));
  CHECK_THROWS(check_duality(0.3, 0.0, 0.5, 1e-3, mc::RunSpec{1, 10, 1}));
}
