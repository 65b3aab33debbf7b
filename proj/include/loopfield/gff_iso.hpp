#pragma once

// Isomorphism checks: Le Jan's occupation field versus half the squared GFF
// on lattice domains, and the BFS-Dynkin identity on tiny weighted graphs.

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "loopfield/graph.hpp"
#include "loopfield/mc.hpp"

namespace loopfield {

/// Continuous-time walk on at most six vertices: jump rate weights[v][w]
/// from v to w, killing rate killing[v]. Each visit to v lasts Exp(rate
/// lambda_v), lambda_v = sum_w weights[v][w] + killing[v].
struct TinyGraph {
  std::vector<std::vector<double>> weights;
  std::vector<double> killing;

  /// builtin:k2 (two vertices, strong killing) or builtin:path3.
  static TinyGraph builtin(const std::string& name);

  std::size_t size() const { return killing.size(); }
  double rate(int v) const;
  /// Throws unless the graph is symmetric, small, and transient.
  void validate() const;
  /// G = (diag(lambda) - W)^{-1}.
  Eigen::MatrixXd green() const;
  /// Probability of returning to y before being killed.
  double return_probability(int y) const;
};

/// A sample from mu^{x,y} / G(x,y): vertices visited and the time spent at each.
struct TinyPath {
  std::vector<int> visits;
  std::vector<double> holding;
  int returns_to_target = 0;
};

/// Walk from x conditioned to hit y, then the returns to y of an unconditioned
/// walk up to its last visit to y.
TinyPath sample_tiny_path(const TinyGraph& graph, int x, int y, mc::Rng& rng);

enum class Functional { ExpTotal, One };

struct BfsDynkinReport {
  mc::Estimate lhs;         // E[phi_x phi_y F(phi^2/2)]
  mc::Estimate rhs;         // G(x,y) E[F(phi^2/2 + ell_path)]
  mc::Estimate difference;  // paired lhs - rhs
  double closed_form = 0.0; // exact value of both sides
  double green_xy = 0.0;
};

/// F = exp(-sum_v ell_v) or F = 1.
BfsDynkinReport bfs_dynkin_check(const TinyGraph& graph, int x, int y, const mc::RunSpec& run,
                                 Functional f = Functional::ExpTotal);

/// det(I + G)^{-1/2} ((G^{-1} + I)^{-1})_{xy}.
double bfs_dynkin_closed_form(const TinyGraph& graph, int x, int y);

struct ChiSquared {
  double statistic = 0.0;
  int dof = 0;
  double p_value = 0.0;
};

/// Pearson test of the returns to y in sample_tiny_path against
/// Geometric: P(K = k) = (1 - r_y) r_y^k.
ChiSquared geometric_returns_test(const TinyGraph& graph, int x, int y, const mc::RunSpec& run);

struct LeJanReport {
  Vertex x = kNoVertex;
  Vertex y = kNoVertex;
  double green_xx = 0.0;
  double green_xy = 0.0;
  double ks_two_sample = 0.0;  // ell_x against phi_x^2 / 2
  double ks_soup = 0.0;        // ell_x / G(x,x) against Gamma(1/2, 1)
  double ks_gff = 0.0;         // phi_x^2 / (2 G(x,x)) against Gamma(1/2, 1)
  mc::Estimate soup_cov;       // E[:ell_x: :ell_y:]
  mc::Estimate gff_cov;        // E[(1/2):phi_x^2: (1/2):phi_y^2:]
  double predicted = 0.0;      // G(x,y)^2 / 2
};

/// Soup at theta = 1/2 against an independent GFF on the same domain, probed
/// at x and y. Any other theta is rejected.
LeJanReport lejan_check(const LatticeDomain& domain, Vertex x, Vertex y, const mc::RunSpec& run,
                        double theta = 0.5);

}  // namespace loopfield
