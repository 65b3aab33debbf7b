#pragma once

// Squared Bessel processes of dimension 2 theta started at 0, the signed
// one-dimensional field and its martingale and duality checks.

#include <cstdint>
#include <utility>
#include <vector>

#include "loopfield/mc.hpp"

namespace loopfield {

struct BesqPath {
  double theta = 0.0;
  double dt = 0.0;
  /// Grid points with values below this level count as zeros.
  double zero_threshold = 0.0;
  std::vector<double> times;
  std::vector<double> values;
  /// 0 at zeros, k >= 1 on the k-th excursion.
  std::vector<std::int32_t> excursion_id;
  /// Spin of excursion k at index k - 1; empty until signed_field is called.
  std::vector<int> spins;

  std::int32_t excursions() const;
};

/// One exact step of length dt from value v: 2 dt Gamma(theta + K, 1) with
/// K ~ Poisson(v / (2 dt)).
double besq_transition(double v, double theta, double dt, mc::Rng& rng);

/// Path on the grid k dt, k = 0..round(T/dt), from R_0 = 0. Requires
/// theta in (0, 1) and dt <= T/50.
BesqPath sample_besq(double theta, double horizon, double dt, mc::Rng& rng);

/// h(t) = sigma R_t^{1-theta} with one fair spin per excursion. Grid zeros
/// draw their own spin. Fills path.spins.
std::vector<double> signed_field(BesqPath& path, mc::Rng& rng);

/// Per time, the Monte Carlo mean of (2t)^n L_n^{(p-1)}(R_t / 2t) with
/// p = laguerre_theta (theta unless a mismatched control is wanted). Values at
/// the requested times are sampled by exact transitions.
std::vector<mc::Estimate> check_martingale(double theta, int n, const std::vector<double>& times,
                                           const mc::RunSpec& run, double laguerre_theta = 0.0);

struct DualityReport {
  mc::Estimate lhs;          // zero set read from the grid threshold
  mc::Estimate lhs_bridge;   // grid crossings weighted by the exact no-zero bridge probability
  double rhs = 0.0;
  double dt = 0.0;
  double zero_threshold = 0.0;
};

/// E[R_x^{1-theta} R_y^{1-theta} 1{no zero in [x, y]}] against
/// (Gamma(2-theta)/Gamma(theta)) (2x)^{2(1-theta)}.
DualityReport check_duality(double theta, double x, double y, double dt, const mc::RunSpec& run);

/// The same paths read at step 2 dt (first) and dt (second), so the two
/// estimates differ only through the discretisation.
std::pair<DualityReport, DualityReport> check_duality_coupled(double theta, double x, double y, double dt,
                                                              const mc::RunSpec& run);

/// P(no zero on [0, dt] | R_0 = v, R_dt = w) = I_{1-theta}(z) / I_{theta-1}(z), z = sqrt(vw)/dt.
double no_zero_bridge_probability(double v, double w, double theta, double dt);

}  // namespace loopfield
