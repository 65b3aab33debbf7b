#pragma once

// Thick-point chaos measures, the signed discrete field h_{theta,N} and the
// density m_{gamma,N} with its Bessel closed form.

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "loopfield/clusters.hpp"
#include "loopfield/graph.hpp"
#include "loopfield/special.hpp"

namespace loopfield {

struct ChaosMeasure {
  std::vector<std::pair<Vertex, double>> atoms;
  double a = 0.0;
  double theta = 0.0;
  double normalization_constant = 0.0;
  /// Atoms whose spin came from a neighbouring cluster (vertex visited by no loop).
  std::size_t orphan_atoms = 0;

  double total_mass() const;
};

/// c_*(a) = (2 sqrt 2)^a e^{a gamma_EM} / (2 a^{1-theta} Gamma(theta)).
double chaos_normalization(double a, double theta);

/// Level (1/2pi) a (log N)^2 above which a vertex is a-thick.
double thick_threshold(double a, int mesh);

/// Uniform measure on the a-thick points of the unit-disc domain, weighted
/// by CR(x)^{-a} = (1 - |x|^2)^{-a}.
ChaosMeasure thick_point_measure(const LatticeDomain& domain, std::span<const double> occupation, double a,
                                 double theta);

/// Atoms whose cluster carries spin `sign` (default +1). `assignment` comes
/// from an OrphanResolver applied to the same partition, which must carry spins.
ChaosMeasure restrict_positive(const ChaosMeasure& measure, const ClusterPartition& partition,
                               const OrphanResolver::Result& assignment, int sign = +1);

struct DiscreteField {
  std::vector<double> values;
  double theta = 0.0;
  double c_theta = 0.0;
  std::vector<char> orphan;
};

/// c_theta = 2^{theta-1} Gamma(theta) / Gamma(2 - theta).
double field_constant(double theta);

/// h(x) = c_theta sigma_x (2 pi ell_x)^{1-theta}.
DiscreteField discrete_field(std::span<const double> occupation, const ClusterPartition& partition,
                             const OrphanResolver::Result& assignment, double theta);

/// Closed form Gamma(theta) ((gamma^2/2) 2 pi ell)^{(1-theta)/2} e^{-(gamma^2/2) 2 pi G}
///   [I_{theta-1}(z) + sigma I_{1-theta}(z)],  z = gamma sqrt(2 * 2 pi ell).
double m_gamma_density(double ell, int spin, double gamma, double theta, double green);

/// The defining double series truncated after `terms` terms in each sum.
double m_gamma_series(double ell, int spin, double gamma, double theta, double green, int terms = 60);

/// Relative residuals |closed form - series| / max(1, |closed form|) over the
/// default (gamma, theta, ell, G, sigma) grid.
special::IdentityReport m_gamma_identity_grid();

/// (1/Z_gamma) [sum_atoms f(x) w(x) - (1/N^2) sum_x f(x)].
double h_gamma_functional(const LatticeDomain& domain, const ChaosMeasure& measure_plus, std::span<const double> f,
                          double zgamma);

}  // namespace loopfield
