#pragma once

// Random walk loop soup on a lattice domain, its continuous-time occupation
// field, and thick loops rooted at a vertex.

#include <cstdint>
#include <vector>

#include "loopfield/graph.hpp"
#include "loopfield/mc.hpp"

namespace loopfield {

/// A closed nearest-neighbour walk. `visits` starts and ends at `root`, the
/// smallest vertex index on the loop. The closing visit is the starting one,
/// so `holding` has one entry per visit except the last.
struct DiscreteLoop {
  Vertex root = kNoVertex;
  int returns = 0;
  std::vector<Vertex> visits;
  std::vector<double> holding;
};

struct LoopSoupSample {
  double theta = 0.0;
  std::vector<DiscreteLoop> loops;
  /// Occupation contributed by loops that never jump.
  std::vector<double> trivial_field;
  std::vector<double> occupation;
};

/// Concatenation at `base` of Poisson many random walk bridges from `base`
/// to itself.
struct ThickLoop {
  Vertex base = kNoVertex;
  double a = 0.0;
  std::vector<std::vector<Vertex>> bridges;

  bool empty() const { return bridges.empty(); }
  /// Largest Euclidean distance from the base to a visited vertex.
  double radius(const LatticeDomain& domain) const;
};

/// Rejection sampler for a first-return excursion at `root` of simple random
/// walk killed on exit and on stepping to any vertex with index below
/// `min_allowed`. On success the excursion (excluding the starting root,
/// including the final return) is appended to `out`.
bool try_excursion(const LatticeDomain& domain, Vertex root, Vertex min_allowed, mc::Rng& rng,
                   std::vector<Vertex>& out);

/// Samples an accepted excursion, retrying up to the starvation cap.
void sample_excursion(const LatticeDomain& domain, Vertex root, Vertex min_allowed, mc::Rng& rng,
                      std::vector<Vertex>& out);

/// Loop soup sampler by minimal-vertex decomposition. For each vertex x_i
/// (lexicographic order) with r_i the probability of returning to x_i before
/// leaving D minus {x_1..x_{i-1}}, the loops rooted at x_i with k returns are
/// Poisson(theta r_i^k / k). The r_i are the pivots of an LDL^T
/// factorization of the Laplacian taken in reverse vertex order.
///
/// The domain must outlive the sampler.
class LoopSoupSampler {
 public:
  explicit LoopSoupSampler(const LatticeDomain& domain);

  const LatticeDomain& domain() const { return *domain_; }
  /// Return probability of x_i in the domain with x_1..x_{i-1} removed.
  double return_probability(Vertex v) const { return return_prob_[static_cast<std::size_t>(v)]; }

  LoopSoupSample sample(double theta, mc::Rng& rng) const;

 private:
  const LatticeDomain* domain_;
  std::vector<double> return_prob_;
  std::vector<double> log_mass_;  // -log(1 - r_i)
};

/// Convenience wrapper; builds a LoopSoupSampler on every call.
LoopSoupSample sample_loop_soup(const LatticeDomain& domain, double theta, mc::Rng& rng);

/// Probability that simple random walk from x returns to x before exiting.
double full_return_probability(const GreenTable& green, Vertex x);

/// Thick loop at x with thickness a: Poisson(a r/(1-r)) bridges, each made
/// of a Geometric number K >= 1 of first-return excursions,
/// P(K = k) = (1-r) r^{k-1}, with r the full-domain return probability.
ThickLoop sample_thick_loop(const LatticeDomain& domain, Vertex x, double a, double return_prob,
                            mc::Rng& rng);

/// Probability that the thick loop has at least one bridge, 1 - e^{-a r/(1-r)}.
double thick_loop_nonempty_probability(double a, double return_prob);

/// Thick loop conditioned to have at least one bridge.
ThickLoop sample_thick_loop_nonempty(const LatticeDomain& domain, Vertex x, double a, double return_prob,
                                     mc::Rng& rng);

/// Recomputes the occupation field from loops and the trivial field, and
/// checks it against the stored one.
std::vector<double> occupation_field(const LoopSoupSample& sample);

/// Per-vertex occupation recomputed without checking.
std::vector<double> recompute_occupation(const LoopSoupSample& sample);

}  // namespace loopfield
