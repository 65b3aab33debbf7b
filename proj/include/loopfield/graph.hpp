#pragma once

// Lattice approximations of planar domains, their discrete Green function
// and the discrete Gaussian free field.

#include <array>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include "loopfield/mc.hpp"

namespace loopfield {

using Vertex = std::int32_t;
inline constexpr Vertex kNoVertex = -1;

enum class Shape { UnitDisc, UnitSquare };

Shape parse_shape(const std::string& name);
std::string to_string(Shape shape);

struct LatticePoint {
  int i = 0;
  int j = 0;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;
};

/// Vertex set of a domain approximated in (1/N)Z^2. Vertices are indexed in
/// lexicographic order of their integer coordinates (i, then j).
class LatticeDomain {
 public:
  /// Builds a domain from an explicit point set; points need not be sorted.
  /// Throws if the set is empty or not connected.
  static LatticeDomain from_points(std::vector<LatticePoint> points, int mesh,
                                   Shape shape = Shape::UnitSquare);

  int mesh() const { return mesh_; }
  Shape shape() const { return shape_; }
  std::size_t size() const { return points_.size(); }
  Vertex origin() const { return origin_; }

  const LatticePoint& point(Vertex v) const { return points_[static_cast<std::size_t>(v)]; }
  double x(Vertex v) const { return point(v).i / static_cast<double>(mesh_); }
  double y(Vertex v) const { return point(v).j / static_cast<double>(mesh_); }
  double norm(Vertex v) const;

  /// Index of the lattice point (i, j), or kNoVertex when it is not in the domain.
  Vertex find(int i, int j) const;

  /// The four lattice neighbours (+i, -i, +j, -j); kNoVertex marks a killed step.
  const std::array<Vertex, 4>& neighbors(Vertex v) const { return adjacency_[static_cast<std::size_t>(v)]; }
  int exit_degree(Vertex v) const;

  /// Graph Laplacian 4I - A restricted to the domain (the inverse Green function).
  Eigen::SparseMatrix<double> laplacian() const;

 private:
  LatticeDomain() = default;
  void index();

  int mesh_ = 0;
  Shape shape_ = Shape::UnitSquare;
  std::vector<LatticePoint> points_;
  std::vector<std::array<Vertex, 4>> adjacency_;
  int box_min_i_ = 0, box_min_j_ = 0, box_w_ = 0, box_h_ = 0;
  std::vector<Vertex> lookup_;
  Vertex origin_ = kNoVertex;
};

/// Connected component of the origin among the points of (1/N)Z^2 whose
/// distance to the boundary of the shape is at least 1/N.
LatticeDomain build_domain(Shape shape, int mesh);

/// Discrete Green function G = (4I - A)^{-1}, i.e. one quarter of the
/// expected number of visits to y of simple random walk started at x and
/// killed on leaving the domain. Backed by a sparse factorization; entries
/// are produced column by column.
class GreenTable {
 public:
  explicit GreenTable(const LatticeDomain& domain);
  ~GreenTable();
  GreenTable(GreenTable&&) noexcept;
  GreenTable& operator=(GreenTable&&) noexcept;

  std::size_t size() const { return size_; }
  Eigen::VectorXd column(Vertex y) const;
  double operator()(Vertex x, Vertex y) const;
  double diagonal(Vertex x) const { return (*this)(x, x); }

  /// Full matrix; only for domains with at most kDenseLimit vertices.
  Eigen::MatrixXd dense() const;
  static constexpr std::size_t kDenseLimit = 4096;

 private:
  struct Factor;
  std::size_t size_ = 0;
  std::unique_ptr<Factor> factor_;
};

/// Samples the centred Gaussian vector with covariance G. Uses a sparse
/// Cholesky factor of the precision matrix 4I - A = G^{-1}.
class GffSampler {
 public:
  explicit GffSampler(const LatticeDomain& domain);
  ~GffSampler();
  GffSampler(GffSampler&&) noexcept;
  GffSampler& operator=(GffSampler&&) noexcept;

  std::vector<double> sample(mc::Rng& rng) const;

 private:
  struct Factor;
  std::size_t size_ = 0;
  std::unique_ptr<Factor> factor_;
};

}  // namespace loopfield
