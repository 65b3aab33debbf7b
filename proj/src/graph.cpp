#include "loopfield/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <stdexcept>

#include <Eigen/SparseCholesky>

namespace loopfield {

Shape parse_shape(const std::string& name) {
  if (name == "disc") return Shape::UnitDisc;
  if (name == "square") return Shape::UnitSquare;
  throw std::invalid_argument("unknown domain shape '" + name + "' (expected disc|square)");
}

std::string to_string(Shape shape) { return shape == Shape::UnitDisc ? "disc" : "square"; }

double LatticeDomain::norm(Vertex v) const { return std::hypot(x(v), y(v)); }

Vertex LatticeDomain::find(int i, int j) const {
  const int a = i - box_min_i_, b = j - box_min_j_;
  if (a < 0 || b < 0 || a >= box_w_ || b >= box_h_) return kNoVertex;
  return lookup_[static_cast<std::size_t>(a) * static_cast<std::size_t>(box_h_) + static_cast<std::size_t>(b)];
}

int LatticeDomain::exit_degree(Vertex v) const {
  const auto& nb = neighbors(v);
  return static_cast<int>(std::count(nb.begin(), nb.end(), kNoVertex));
}

void LatticeDomain::index() {
  std::sort(points_.begin(), points_.end(), [](const LatticePoint& a, const LatticePoint& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  if (std::adjacent_find(points_.begin(), points_.end()) != points_.end())
    throw std::invalid_argument("LatticeDomain: duplicate lattice points");

  int min_i = points_.front().i, max_i = min_i, min_j = points_.front().j, max_j = min_j;
  for (const auto& p : points_) {
    min_i = std::min(min_i, p.i);
    max_i = std::max(max_i, p.i);
    min_j = std::min(min_j, p.j);
    max_j = std::max(max_j, p.j);
  }
  box_min_i_ = min_i;
  box_min_j_ = min_j;
  box_w_ = max_i - min_i + 1;
  box_h_ = max_j - min_j + 1;
  lookup_.assign(static_cast<std::size_t>(box_w_) * static_cast<std::size_t>(box_h_), kNoVertex);
  for (std::size_t v = 0; v < points_.size(); ++v) {
    const auto& p = points_[v];
    lookup_[static_cast<std::size_t>(p.i - min_i) * static_cast<std::size_t>(box_h_) +
            static_cast<std::size_t>(p.j - min_j)] = static_cast<Vertex>(v);
  }

  adjacency_.resize(points_.size());
  for (std::size_t v = 0; v < points_.size(); ++v) {
    const auto& p = points_[v];
    adjacency_[v] = {find(p.i + 1, p.j), find(p.i - 1, p.j), find(p.i, p.j + 1), find(p.i, p.j - 1)};
  }
  origin_ = find(0, 0);
}

LatticeDomain LatticeDomain::from_points(std::vector<LatticePoint> points, int mesh, Shape shape) {
  if (points.empty()) throw std::invalid_argument("LatticeDomain: empty point set");
  if (mesh <= 0) throw std::invalid_argument("LatticeDomain: mesh must be positive");
  LatticeDomain d;
  d.mesh_ = mesh;
  d.shape_ = shape;
  d.points_ = std::move(points);
  d.index();

  std::vector<char> seen(d.size(), 0);
  std::queue<Vertex> queue;
  queue.push(0);
  seen[0] = 1;
  std::size_t reached = 1;
  while (!queue.empty()) {
    const Vertex v = queue.front();
    queue.pop();
    for (Vertex w : d.neighbors(v)) {
      if (w != kNoVertex && !seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        queue.push(w);
      }
    }
  }
  if (reached != d.size()) throw std::invalid_argument("LatticeDomain: point set is not connected");
  return d;
}

LatticeDomain build_domain(Shape shape, int mesh) {
  if (mesh < 8) throw std::invalid_argument("build_domain: mesh N must be >= 8, got " + std::to_string(mesh));
  // Integer form of dist(z, boundary) >= 1/N for z = (i, j)/N.
  auto admissible = [&](int i, int j) {
    if (shape == Shape::UnitDisc) {
      const long long r2 = static_cast<long long>(i) * i + static_cast<long long>(j) * j;
      return r2 <= static_cast<long long>(mesh - 1) * (mesh - 1);
    }
    return std::abs(i) <= mesh - 1 && std::abs(j) <= mesh - 1;
  };

  // Flood fill from the origin through admissible points.
  const int w = 2 * mesh + 1;
  std::vector<char> seen(static_cast<std::size_t>(w) * w, 0);
  auto slot = [&](int i, int j) { return static_cast<std::size_t>(i + mesh) * w + static_cast<std::size_t>(j + mesh); };
  std::vector<LatticePoint> points;
  std::queue<LatticePoint> queue;
  queue.push({0, 0});
  seen[slot(0, 0)] = 1;
  while (!queue.empty()) {
    const LatticePoint p = queue.front();
    queue.pop();
    points.push_back(p);
    constexpr int di[4] = {1, -1, 0, 0};
    constexpr int dj[4] = {0, 0, 1, -1};
    for (int k = 0; k < 4; ++k) {
      const int i = p.i + di[k], j = p.j + dj[k];
      if (std::abs(i) > mesh || std::abs(j) > mesh || seen[slot(i, j)] || !admissible(i, j)) continue;
      seen[slot(i, j)] = 1;
      queue.push({i, j});
    }
  }
  return LatticeDomain::from_points(std::move(points), mesh, shape);
}

Eigen::SparseMatrix<double> LatticeDomain::laplacian() const {
  std::vector<Eigen::Triplet<double>> entries;
  entries.reserve(5 * size());
  for (std::size_t v = 0; v < size(); ++v) {
    entries.emplace_back(static_cast<int>(v), static_cast<int>(v), 4.0);
    for (Vertex w : adjacency_[v])
      if (w != kNoVertex) entries.emplace_back(static_cast<int>(v), w, -1.0);
  }
  Eigen::SparseMatrix<double> m(static_cast<Eigen::Index>(size()), static_cast<Eigen::Index>(size()));
  m.setFromTriplets(entries.begin(), entries.end());
  return m;
}

struct GreenTable::Factor {
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
};

GreenTable::GreenTable(const LatticeDomain& domain) : size_(domain.size()), factor_(std::make_unique<Factor>()) {
  factor_->ldlt.compute(domain.laplacian());
  if (factor_->ldlt.info() != Eigen::Success)
    throw std::runtime_error("GreenTable: factorization of the lattice Laplacian failed");
}

GreenTable::~GreenTable() = default;
GreenTable::GreenTable(GreenTable&&) noexcept = default;
GreenTable& GreenTable::operator=(GreenTable&&) noexcept = default;

Eigen::VectorXd GreenTable::column(Vertex y) const {
  if (y < 0 || static_cast<std::size_t>(y) >= size_) throw std::out_of_range("GreenTable: vertex out of range");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(size_));
  e[y] = 1.0;
  return factor_->ldlt.solve(e);
}

double GreenTable::operator()(Vertex x, Vertex y) const {
  if (x < 0 || static_cast<std::size_t>(x) >= size_) throw std::out_of_range("GreenTable: vertex out of range");
  return column(y)[x];
}

Eigen::MatrixXd GreenTable::dense() const {
  if (size_ > kDenseLimit) throw std::length_error("GreenTable::dense: domain too large for a dense table");
  const auto n = static_cast<Eigen::Index>(size_);
  Eigen::MatrixXd g = factor_->ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  return 0.5 * (g + g.transpose());
}

struct GffSampler::Factor {
  Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt;
};

GffSampler::GffSampler(const LatticeDomain& domain) : size_(domain.size()), factor_(std::make_unique<Factor>()) {
  factor_->llt.compute(domain.laplacian());
  if (factor_->llt.info() != Eigen::Success)
    throw std::runtime_error("GffSampler: precision matrix is not positive definite");
}

GffSampler::~GffSampler() = default;
GffSampler::GffSampler(GffSampler&&) noexcept = default;
GffSampler& GffSampler::operator=(GffSampler&&) noexcept = default;

std::vector<double> GffSampler::sample(mc::Rng& rng) const {
  const auto n = static_cast<Eigen::Index>(size_);
  Eigen::VectorXd z(n);
  for (Eigen::Index k = 0; k < n; ++k) z[k] = rng.normal();
  // P Q P^T = L L^T, so P^T L^{-T} z has covariance Q^{-1}.
  const Eigen::VectorXd u = factor_->llt.matrixU().solve(z);
  const Eigen::VectorXd phi = factor_->llt.permutationPinv() * u;
  return {phi.data(), phi.data() + n};
}

}  // namespace loopfield
