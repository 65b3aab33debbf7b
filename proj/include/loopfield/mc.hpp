#pragma once

// Reproducible Monte Carlo harness: generators, replica orchestration,
// estimators and goodness-of-fit statistics.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <type_traits>
#include <vector>

namespace loopfield::mc {

/// SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state);

/// xoshiro256** generator. Satisfies UniformRandomBitGenerator so the
/// standard <random> distributions can draw from it.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double mean);
  double normal();
  double gamma(double shape, double scale);
  std::uint64_t poisson(double mean);
  /// +1 or -1 with probability 1/2 each.
  int sign();

 private:
  std::uint64_t s_[4];
  std::normal_distribution<double> normal_;
};

/// Generator for replica `index` of a run seeded by `master_seed`.
Rng replica_rng(std::uint64_t master_seed, std::uint64_t index);

struct RunSpec {
  std::uint64_t master_seed = 0;
  std::size_t replicas = 1;
  std::size_t workers = 1;
};

/// Raised when a replica task throws; carries the failing replica index.
class ReplicaError : public std::runtime_error {
 public:
  ReplicaError(std::size_t replica, const std::string& what)
      : std::runtime_error("replica " + std::to_string(replica) + ": " + what), replica_(replica) {}
  std::size_t replica() const { return replica_; }

 private:
  std::size_t replica_;
};

/// Runs `task(index, rng)` for every replica and returns the records in
/// replica order. Each replica draws from replica_rng(master_seed, index),
/// so the output does not depend on the number of workers.
template <class Task>
auto run_replicas(const RunSpec& spec, Task&& task)
    -> std::vector<std::invoke_result_t<Task&, std::size_t, Rng&>> {
  using Record = std::invoke_result_t<Task&, std::size_t, Rng&>;
  if (spec.replicas == 0) throw std::invalid_argument("run_replicas: replicas must be >= 1");
  const std::size_t workers = std::max<std::size_t>(1, std::min(spec.workers, spec.replicas));

  std::vector<Record> records(spec.replicas);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::size_t failed_index = spec.replicas;
  std::string failed_what;

  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= spec.replicas) return;
      try {
        Rng rng = replica_rng(spec.master_seed, i);
        records[i] = task(i, rng);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (i < failed_index) {
          failed_index = i;
          failed_what = e.what();
        }
      }
    }
  };

  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failed_index < spec.replicas) throw ReplicaError(failed_index, failed_what);
  return records;
}

/// Mean with its standard error.
struct Estimate {
  double mean = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

/// Sample mean and SD/sqrt(n).
Estimate mean_se(std::span<const double> xs);
/// Frequency of successes with binomial standard error.
Estimate binomial(std::size_t successes, std::size_t trials);
/// Sample covariance of (xs, ys) with the SE of the mean of the centred products.
Estimate covariance_se(std::span<const double> xs, std::span<const double> ys);

/// One-sample Kolmogorov-Smirnov statistic sup |F_n - F|.
double ks_statistic(std::span<const double> samples, const std::function<double(double)>& cdf);
/// Two-sample Kolmogorov-Smirnov statistic.
double ks_two_sample(std::span<const double> a, std::span<const double> b);

/// Regularized lower incomplete gamma function P(shape, x).
double gamma_cdf(double shape, double x);
double normal_cdf(double z);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_se = 0.0;
  /// Standard error when the weights are inverse variances of the ys.
  double slope_se_weights = 0.0;
};

/// Weighted least squares fit of ys against xs. The slope standard error is
/// scaled by the weighted residual variance chi^2/(n-2), so an exact line
/// reports zero.
LineFit fit_slope(std::span<const double> xs, std::span<const double> ys,
                  std::span<const double> weights);

}  // namespace loopfield::mc
