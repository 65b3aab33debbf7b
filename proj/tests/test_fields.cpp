#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "loopfield/clusters.hpp"
#include "loopfield/fields.hpp"
#include "loopfield/loopsoup.hpp"

using namespace loopfield;

TEST_CASE("field constant") {
  CHECK(field_constant(0.5) == doctest::Approx(std::numbers::sqrt2).epsilon(1e-14));
  CHECK(field_constant(1.0) == doctest::Approx(1.0));
  CHECK(field_constant(0.25) == doctest::Approx(std::pow(2.0, -0.75) * std::tgamma(0.25) / std::tgamma(1.75)));
}

TEST_CASE("chaos normalisation and threshold") {
  const double a = 0.5, theta = 0.25;
  CHECK(chaos_normalization(a, theta) ==
        doctest::Approx(std::pow(2.0 * std::sqrt(2.0), a) * std::exp(a * 0.5772156649015329) /
                        (2.0 * std::pow(a, 0.75) * std::tgamma(theta))));
  CHECK(thick_threshold(1.0, 64) == doctest::Approx(std::log(64.0) * std::log(64.0) / (2 * std::numbers::pi)));
}

TEST_CASE("m_gamma reduces to the Gaussian exponential at theta = 1/2") {
  // With 4 pi ell = 2 pi phi^2 the density is exp(gamma sqrt(2 pi) |phi| sigma - gamma^2 2 pi G / 2).
  for (double gamma : {0.3, 0.9, 1.3})
    for (double ell : {0.01, 0.3, 2.0})
      for (int s : {1, -1}) {
        const double g = 0.7;
        const double expected = std::exp(s * gamma * std::sqrt(4 * std::numbers::pi * ell) - std::numbers::pi * gamma * gamma * g);
        CHECK(m_gamma_density(ell, s, gamma, 0.5, g) == doctest::Approx(expected).epsilon(1e-12));
      }
}

TEST_CASE("m_gamma closed form against the double series") {
  const auto report = m_gamma_identity_grid();
  CHECK(report.points.size() == 3 * 3 * 4 * 3 * 2);
  CHECK(report.max_residual() < report.tolerance);
  CHECK(report.tolerance == 1e-8);
  // Off the default grid.
  for (double ell : {0.02, 0.7, 3.0})
    CHECK(std::abs(m_gamma_density(ell, 1, 1.1, 0.3, 0.45) - m_gamma_series(ell, 1, 1.1, 0.3, 0.45)) < 1e-9);
}

TEST_CASE("m_gamma is positive, decays for negative spin, and has mean one") {
  const double gamma = 0.6, theta = 0.3, g = 0.4;
  CHECK(m_gamma_density(5.0, -1, gamma, theta, g) > 0.0);
  CHECK(m_gamma_density(5.0, -1, gamma, theta, g) < m_gamma_density(1.0, -1, gamma, theta, g));
  CHECK(m_gamma_density(5.0, 1, gamma, theta, g) > m_gamma_density(1.0, 1, gamma, theta, g));
  // E m_gamma = 1 for ell ~ Gamma(theta, G) and a fair spin; every Wick term
  // beyond the constant has mean zero.
  mc::Rng rng(17);
  const int n = 200000;
  std::vector<double> m(n);
  for (int k = 0; k < n; ++k) m[k] = m_gamma_density(rng.gamma(theta, g), rng.sign(), gamma, theta, g);
  const auto e = mc::mean_se(m);
  CHECK(std::abs(e.mean - 1.0) < 4.0 * e.se);
  CHECK_THROWS(m_gamma_density(1.0, 1, 1.5, theta, g));
  CHECK_THROWS(m_gamma_density(1.0, 1, gamma, 0.7, g));
  CHECK_THROWS(m_gamma_density(1.0, 0, gamma, theta, g));
  CHECK_THROWS(m_gamma_density(0.0, 1, gamma, theta, g));
}

TEST_CASE("thick-point measure on a synthetic occupation field") {
  const auto d = build_domain(Shape::UnitDisc, 16);
  const double a = 0.5, theta = 0.5;
  const double level = thick_threshold(a, 16);
  std::vector<double> occ(d.size(), 0.0);
  const Vertex p = d.find(4, 0), q = d.find(0, 12);
  occ[static_cast<std::size_t>(p)] = level;
  occ[static_cast<std::size_t>(q)] = 10 * level;
  occ[static_cast<std::size_t>(d.origin())] = 0.99 * level;
  const auto m = thick_point_measure(d, occ, a, theta);
  REQUIRE(m.atoms.size() == 2);
  const double base = std::pow(std::log(16.0), 1 - theta) / std::pow(16.0, 2 - a) / chaos_normalization(a, theta);
  for (const auto& [v, w] : m.atoms) {
    const double r = d.norm(v);
    CHECK(w == doctest::Approx(base * std::pow(1 - r * r, -a)));
  }
  CHECK(m.total_mass() == doctest::Approx(m.atoms[0].second + m.atoms[1].second));
  CHECK_THROWS(thick_point_measure(d, occ, 2.0, theta));
  CHECK_THROWS(thick_point_measure(build_domain(Shape::UnitSquare, 16), std::vector<double>(15 * 15 * 4 + 1), a, theta));
  CHECK_THROWS(thick_point_measure(d, std::vector<double>(3), a, theta));
}

TEST_CASE("spin restriction, signed field and the h_gamma functional") {
  const auto d = build_domain(Shape::UnitDisc, 12);
  mc::Rng rng(23);
  const auto soup = sample_loop_soup(d, 0.5, rng);
  auto partition = build_clusters(soup);
  const OrphanResolver resolver(d);
  const auto assignment = resolver.resolve(partition);
  CHECK_THROWS(discrete_field(soup.occupation, partition, assignment, 0.5));
  assign_spins(partition, rng);

  const auto field = discrete_field(soup.occupation, partition, assignment, 0.5);
  for (std::size_t v = 0; v < d.size(); ++v) {
    const int s = partition.spins[static_cast<std::size_t>(assignment.cluster[v])];
    CHECK(field.values[v] == doctest::Approx(s * std::numbers::sqrt2 * std::sqrt(2 * std::numbers::pi * soup.occupation[v])));
  }
  CHECK(field.orphan == assignment.orphan);
  CHECK_THROWS(discrete_field(soup.occupation, partition, assignment, 1.5));

  // A low thickness so that several vertices qualify.
  const auto m = thick_point_measure(d, soup.occupation, 0.05, 0.5);
  const auto plus = restrict_positive(m, partition, assignment, +1);
  const auto minus = restrict_positive(m, partition, assignment, -1);
  CHECK(plus.atoms.size() + minus.atoms.size() == m.atoms.size());
  CHECK(plus.total_mass() + minus.total_mass() == doctest::Approx(m.total_mass()));

  // h_gamma is linear in f.
  std::vector<double> f(d.size(), 1.0), f2(d.size(), 2.0);
  const double one = h_gamma_functional(d, plus, f, 0.5);
  CHECK(h_gamma_functional(d, plus, f2, 0.5) == doctest::Approx(2.0 * one));
  const double lebesgue = static_cast<double>(d.size()) / (12.0 * 12.0);
  CHECK(one == doctest::Approx((plus.total_mass() - lebesgue) / 0.5));
}

TEST_CASE("flipping every spin flips the field") {
  const auto d = build_domain(Shape::UnitDisc, 10);
  mc::Rng rng(29);
  const auto soup = sample_loop_soup(d, 0.25, rng);
  auto partition = build_clusters(soup);
  const auto assignment = OrphanResolver(d).resolve(partition);
  assign_spins(partition, rng);
  const auto h = discrete_field(soup.occupation, partition, assignment, 0.25);
  for (int& s : partition.spins) s = -s;
  const auto flipped = discrete_field(soup.occupation, partition, assignment, 0.25);
  for (std::size_t v = 0; v < d.size(); ++v) CHECK(flipped.values[v] == -h.values[v]);
}
