#include "loopfield/fields.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace loopfield {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

int spin_of(const ClusterPartition& partition, const OrphanResolver::Result& assignment, std::size_t v) {
  const std::int32_t c = assignment.cluster[v];
  if (c < 0 || static_cast<std::size_t>(c) >= partition.spins.size())
    throw std::runtime_error("vertex " + std::to_string(v) + " has no cluster spin");
  return partition.spins[static_cast<std::size_t>(c)];
}

}  // namespace

double ChaosMeasure::total_mass() const {
  double m = 0.0;
  for (const auto& [v, w] : atoms) m += w;
  return m;
}

double chaos_normalization(double a, double theta) {
  return std::pow(2.0 * std::numbers::sqrt2, a) * std::exp(a * std::numbers::egamma) /
         (2.0 * std::pow(a, 1.0 - theta) * std::tgamma(theta));
}

double thick_threshold(double a, int mesh) {
  const double l = std::log(static_cast<double>(mesh));
  return a * l * l / kTwoPi;
}

ChaosMeasure thick_point_measure(const LatticeDomain& domain, std::span<const double> occupation, double a,
                                 double theta) {
  if (!(a > 0.0 && a < 2.0)) throw std::invalid_argument("thick_point_measure: a must lie in (0, 2)");
  if (!(theta > 0.0)) throw std::invalid_argument("thick_point_measure: theta must be positive");
  if (domain.shape() != Shape::UnitDisc)
    throw std::invalid_argument("thick_point_measure: conformal radius only available on the unit disc");
  if (occupation.size() != domain.size()) throw std::invalid_argument("thick_point_measure: occupation size mismatch");

  ChaosMeasure m;
  m.a = a;
  m.theta = theta;
  m.normalization_constant = chaos_normalization(a, theta);
  const double n = domain.mesh();
  const double scale = std::pow(std::log(n), 1.0 - theta) / std::pow(n, 2.0 - a) / m.normalization_constant;
  const double level = thick_threshold(a, domain.mesh());
  for (std::size_t v = 0; v < occupation.size(); ++v) {
    if (occupation[v] < level) continue;
    const double r = domain.norm(static_cast<Vertex>(v));
    m.atoms.emplace_back(static_cast<Vertex>(v), scale * std::pow(1.0 - r * r, -a));
  }
  return m;
}

ChaosMeasure restrict_positive(const ChaosMeasure& measure, const ClusterPartition& partition,
                               const OrphanResolver::Result& assignment, int sign) {
  if (partition.spins.size() != partition.size())
    throw std::invalid_argument("restrict_positive: partition carries no spins");
  ChaosMeasure out;
  out.a = measure.a;
  out.theta = measure.theta;
  out.normalization_constant = measure.normalization_constant;
  for (const auto& atom : measure.atoms) {
    const auto v = static_cast<std::size_t>(atom.first);
    if (spin_of(partition, assignment, v) != sign) continue;
    out.atoms.push_back(atom);
    if (assignment.orphan[v]) ++out.orphan_atoms;
  }
  return out;
}

double field_constant(double theta) {
  return std::pow(2.0, theta - 1.0) * std::tgamma(theta) / std::tgamma(2.0 - theta);
}

DiscreteField discrete_field(std::span<const double> occupation, const ClusterPartition& partition,
                             const OrphanResolver::Result& assignment, double theta) {
  if (!(theta > 0.0 && theta <= 1.0)) throw std::invalid_argument("discrete_field: theta must lie in (0, 1]");
  if (partition.spins.size() != partition.size())
    throw std::invalid_argument("discrete_field: partition carries no spins");
  DiscreteField f;
  f.theta = theta;
  f.c_theta = field_constant(theta);
  f.values.resize(occupation.size());
  f.orphan = assignment.orphan;
  for (std::size_t v = 0; v < occupation.size(); ++v)
    f.values[v] = f.c_theta * spin_of(partition, assignment, v) * std::pow(kTwoPi * occupation[v], 1.0 - theta);
  return f;
}

double m_gamma_density(double ell, int spin, double gamma, double theta, double green) {
  if (!(gamma > 0.0 && gamma < std::numbers::sqrt2)) throw std::invalid_argument("m_gamma_density: gamma must lie in (0, sqrt 2)");
  if (!(theta > 0.0 && theta <= 0.5)) throw std::invalid_argument("m_gamma_density: theta must lie in (0, 1/2]");
  if (!(ell > 0.0)) throw std::invalid_argument("m_gamma_density: occupation must be positive");
  if (spin != 1 && spin != -1) throw std::invalid_argument("m_gamma_density: spin must be +1 or -1");
  const double half_g2 = gamma * gamma / 2.0;
  const double z = gamma * std::sqrt(2.0 * kTwoPi * ell);
  return std::tgamma(theta) * std::pow(half_g2 * kTwoPi * ell, (1.0 - theta) / 2.0) *
         std::exp(-half_g2 * kTwoPi * green) *
         (special::bessel_i(theta - 1.0, z) + spin * special::bessel_i(1.0 - theta, z));
}

double m_gamma_series(double ell, int spin, double gamma, double theta, double green, int terms) {
  if (terms < 1 || terms > special::kMaxDegree + 1) throw std::invalid_argument("m_gamma_series: bad term count");
  const double theta_star = 2.0 - theta;
  const double h = field_constant(theta) * spin * std::pow(kTwoPi * ell, 1.0 - theta);
  const double step = gamma * gamma / 2.0 * kTwoPi;
  double even = 0.0, odd = 0.0;
  double fe = 1.0, fo = 1.0;  // step^k Gamma(theta) / (k! Gamma(k+theta)), same with theta*
  for (int k = 0; k < terms; ++k) {
    even += fe * special::wick_local(ell, green, k, theta);
    odd += fo * special::wick_mixed(h, ell, green, k, theta);
    fe *= step / ((k + 1.0) * (k + theta));
    fo *= step / ((k + 1.0) * (k + theta_star));
  }
  return even + std::pow(gamma, 2.0 * (1.0 - theta)) * odd;
}

special::IdentityReport m_gamma_identity_grid() {
  special::IdentityReport report;
  report.which = "m-gamma";
  report.tolerance = 1e-8;
  for (double gamma : {0.3, 0.8, 1.3})
    for (double theta : {0.25, 0.4, 0.5})
      for (double ell : {0.05, 0.4, 1.5, 4.0})
        for (double g : {0.3, 0.6, 1.0})
          for (int spin : {1, -1}) {
            const double closed = m_gamma_density(ell, spin, gamma, theta, g);
            const double series = m_gamma_series(ell, spin, gamma, theta, g);
            report.points.push_back({{{"gamma", gamma}, {"theta", theta}, {"ell", ell}, {"G", g},
                                      {"spin", static_cast<double>(spin)}},
                                     std::abs(closed - series) / std::max(1.0, std::abs(closed))});
          }
  return report;
}

double h_gamma_functional(const LatticeDomain& domain, const ChaosMeasure& measure_plus, std::span<const double> f,
                          double zgamma) {
  if (!(zgamma > 0.0)) throw std::invalid_argument("h_gamma_functional: Z_gamma must be positive");
  if (f.size() != domain.size()) throw std::invalid_argument("h_gamma_functional: test function size mismatch");
  double atoms = 0.0;
  for (const auto& [v, w] : measure_plus.atoms) atoms += f[static_cast<std::size_t>(v)] * w;
  double lebesgue = 0.0;
  for (double fx : f) lebesgue += fx;
  const double n = domain.mesh();
  return (atoms - lebesgue / (n * n)) / zgamma;
}

}  // namespace loopfield
