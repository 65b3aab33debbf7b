#pragma once

// Loop clusters: union-find partition of loops, spins, crossing events,
// crossing-probability normalisations and finite-r Minkowski masses.

#include <cstdint>
#include <span>
#include <vector>

#include "loopfield/graph.hpp"
#include "loopfield/loopsoup.hpp"
#include "loopfield/mc.hpp"

namespace loopfield {

/// Weighted quick-union with path halving.
class UnionFind {
 public:
  explicit UnionFind(std::size_t size = 0);
  std::size_t add();
  std::size_t find(std::size_t i);
  void unite(std::size_t a, std::size_t b);
  std::size_t size() const { return parent_.size(); }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::uint32_t> rank_;
};

struct ClusterPartition {
  std::vector<std::int32_t> loop_to_cluster;
  /// Sorted vertex set of each cluster.
  std::vector<std::vector<Vertex>> cluster_vertices;
  /// +1 / -1 per cluster; empty until assign_spins is called.
  std::vector<int> spins;
  /// Cluster of each vertex, -1 for vertices no loop visits.
  std::vector<std::int32_t> vertex_cluster;

  std::size_t size() const { return cluster_vertices.size(); }
};

/// Two loops share a cluster iff a chain of loops with pairwise common
/// vertices joins them. Cluster ids follow the first loop of each cluster.
ClusterPartition build_clusters(std::span<const std::vector<Vertex>> loops, std::size_t num_vertices);

/// Clusters of the non-trivial loops of a soup.
ClusterPartition build_clusters(const LoopSoupSample& sample);

/// I.i.d. fair spins, one per cluster.
void assign_spins(ClusterPartition& partition, mc::Rng& rng);

/// True iff some cluster intersects both A and B.
bool crossing_event(const ClusterPartition& partition, std::span<const Vertex> a, std::span<const Vertex> b);

/// Vertices with |x| <= radius.
std::vector<Vertex> disc_vertices(const LatticeDomain& domain, double radius);
/// Vertices within 1/N of the circle |x| = radius.
std::vector<Vertex> circle_vertices(const LatticeDomain& domain, double radius);

/// Per-vertex cluster assignment in which vertices visited by no loop take
/// the cluster of the nearest loop-visited vertex (Euclidean distance, ties
/// to the lowest index). Such vertices are reported as orphans.
class OrphanResolver {
 public:
  explicit OrphanResolver(const LatticeDomain& domain);

  struct Result {
    std::vector<std::int32_t> cluster;
    std::vector<char> orphan;
  };
  Result resolve(const ClusterPartition& partition) const;

 private:
  const LatticeDomain* domain_;
  std::vector<std::pair<int, int>> offsets_;  // sorted by squared length
  std::vector<int> offset_norm2_;
};

struct CrossingCurve {
  std::vector<double> radii;
  std::vector<mc::Estimate> estimates;
};

/// Probability that a cluster of the theta-soup joins the disc of radius r
/// to the circle of radius 1/e, for each r (soups shared across radii).
CrossingCurve estimate_Zr_curve(const LatticeDomain& domain, double theta, std::span<const double> radii,
                                const mc::RunSpec& run);
mc::Estimate estimate_Zr(const LatticeDomain& domain, double theta, double r, const mc::RunSpec& run);

struct ZgammaEstimate {
  double gamma = 0.0;
  mc::Estimate connected;   // Z_gamma
  mc::Estimate nonempty;    // P(thick loop has a bridge)
  mc::Estimate union_bound; // frequency of the dominating event built from the thick-loop radius
  /// Z_gamma as the exact P(nonempty) times the connection frequency of a
  /// thick loop drawn conditionally on being nonempty (same soups).
  mc::Estimate conditioned;
};

/// Probability that the origin connects to the circle of radius 1/e in the
/// soup augmented by an a-thick loop at the origin, a = gamma^2/2.
std::vector<ZgammaEstimate> estimate_Zgamma_curve(const LatticeDomain& domain, double theta,
                                                  std::span<const double> gammas, const mc::RunSpec& run);
ZgammaEstimate estimate_Zgamma(const LatticeDomain& domain, double theta, double gamma, const mc::RunSpec& run);

/// Number of vertices within Euclidean distance r of a cluster.
std::size_t neighborhood_count(const LatticeDomain& domain, std::span<const Vertex> cluster, double r);

/// (1/Zr) (1/N^2) #{vertices within distance r of cluster k}.
double minkowski_estimate(const LatticeDomain& domain, const ClusterPartition& partition, std::int32_t cluster_id,
                          double r, double zr);

}  // namespace loopfield
