#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>
#include <utility>

#include <Eigen/Dense>

#include "loopfield/graph.hpp"

using namespace loopfield;

namespace {

// Every lattice point of the box at distance >= 1/N from the boundary,
// without any flood fill.
std::set<std::pair<int, int>> brute_force_points(Shape shape, int n) {
  std::set<std::pair<int, int>> out;
  for (int i = -n; i <= n; ++i)
    for (int j = -n; j <= n; ++j) {
      const double x = static_cast<double>(i) / n, y = static_cast<double>(j) / n;
      const double dist = shape == Shape::UnitDisc ? 1.0 - std::hypot(x, y) : 1.0 - std::max(std::abs(x), std::abs(y));
      if (dist >= 1.0 / n - 1e-12) out.insert({i, j});
    }
  return out;
}

Eigen::MatrixXd dense_green_from_walk(const LatticeDomain& d) {
  // (I - P)^{-1} counts expected visits; G is a quarter of it.
  const auto n = static_cast<Eigen::Index>(d.size());
  Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, n);
  for (Vertex v = 0; v < static_cast<Vertex>(d.size()); ++v)
    for (Vertex w : d.neighbors(v))
      if (w != kNoVertex) p(v, w) += 0.25;
  return (Eigen::MatrixXd::Identity(n, n) - p).inverse() / 4.0;
}

}  // namespace

TEST_CASE("domains match a brute-force enumeration") {
  for (Shape shape : {Shape::UnitDisc, Shape::UnitSquare})
    for (int n : {8, 9, 16}) {
      const auto d = build_domain(shape, n);
      const auto ref = brute_force_points(shape, n);
      REQUIRE(d.size() == ref.size());
      std::set<std::pair<int, int>> got;
      for (Vertex v = 0; v < static_cast<Vertex>(d.size()); ++v) got.insert({d.point(v).i, d.point(v).j});
      CHECK(got == ref);
      CHECK(d.point(d.origin()) == LatticePoint{0, 0});
      for (Vertex v = 1; v < static_cast<Vertex>(d.size()); ++v) {
        const auto& a = d.point(v - 1);
        const auto& b = d.point(v);
        CHECK((a.i < b.i || (a.i == b.i && a.j < b.j)));
      }
    }
  CHECK(build_domain(Shape::UnitSquare, 8).size() == 15u * 15u);
  CHECK_THROWS_AS(build_domain(Shape::UnitDisc, 4), std::invalid_argument);
  CHECK_THROWS(parse_shape("triangle"));
  CHECK(parse_shape("disc") == Shape::UnitDisc);
}

TEST_CASE("adjacency, lookup and exit degree") {
  const auto d = build_domain(Shape::UnitDisc, 10);
  std::size_t killed = 0;
  for (Vertex v = 0; v < static_cast<Vertex>(d.size()); ++v) {
    const auto& p = d.point(v);
    CHECK(d.find(p.i, p.j) == v);
    const auto& nb = d.neighbors(v);
    const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
    int exits = 0;
    for (int k = 0; k < 4; ++k) {
      CHECK(nb[k] == d.find(p.i + di[k], p.j + dj[k]));
      exits += nb[k] == kNoVertex;
    }
    CHECK(d.exit_degree(v) == exits);
    killed += static_cast<std::size_t>(exits);
  }
  CHECK(killed > 0);
  CHECK(d.find(100, 0) == kNoVertex);
}

TEST_CASE("from_points rejects bad input") {
  CHECK_THROWS(LatticeDomain::from_points({}, 8));
  CHECK_THROWS(LatticeDomain::from_points({{0, 0}, {2, 0}}, 8));
  CHECK_THROWS(LatticeDomain::from_points({{0, 0}, {0, 0}}, 8));
}

TEST_CASE("Green function on tiny domains against a dense inverse") {
  const auto single = LatticeDomain::from_points({{0, 0}}, 8);
  CHECK(GreenTable(single)(0, 0) == doctest::Approx(0.25));

  const std::vector<std::vector<LatticePoint>> shapes{
      {{0, 0}, {1, 0}},
      {{0, 0}, {1, 0}, {2, 0}},
      {{0, 0}, {1, 0}, {0, 1}, {1, 1}},
      {{0, 0}, {1, 0}, {-1, 0}, {0, 1}, {0, -1}},
  };
  for (const auto& pts : shapes) {
    const auto d = LatticeDomain::from_points(pts, 8);
    const GreenTable g(d);
    const Eigen::MatrixXd ref = dense_green_from_walk(d);
    CHECK((g.dense() - ref).cwiseAbs().maxCoeff() < 1e-14);
  }
  // Two adjacent vertices: G = [[4, -1], [-1, 4]]^{-1}.
  const GreenTable two(LatticeDomain::from_points({{0, 0}, {1, 0}}, 8));
  CHECK(two(0, 0) == doctest::Approx(4.0 / 15.0));
  CHECK(two(0, 1) == doctest::Approx(1.0 / 15.0));
}

TEST_CASE("Green function is symmetric, positive and solves the Laplacian") {
  const auto d = build_domain(Shape::UnitDisc, 16);
  const GreenTable g(d);
  const Eigen::MatrixXd m = g.dense();
  CHECK((m - m.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(m.minCoeff() > 0.0);
  const Eigen::MatrixXd id = Eigen::MatrixXd(d.laplacian()) * m;
  CHECK((id - Eigen::MatrixXd::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff() < 1e-10);
  CHECK(g.column(d.origin())(5) == doctest::Approx(m(5, d.origin())));
  CHECK_THROWS(g(-1, 0));
}

TEST_CASE("Green function grows with the domain") {
  // A sub-domain kills the walk earlier, so its Green function is smaller.
  const auto small = build_domain(Shape::UnitDisc, 16);
  const auto big = build_domain(Shape::UnitSquare, 16);
  const GreenTable gs(small), gb(big);
  for (Vertex v = 0; v < static_cast<Vertex>(small.size()); v += 7) {
    const auto& p = small.point(v);
    const Vertex w = big.find(p.i, p.j);
    REQUIRE(w != kNoVertex);
    CHECK(gs(v, small.origin()) <= gb(w, big.origin()) + 1e-15);
  }
}

TEST_CASE("Green function at the origin grows like log N / 2 pi") {
  std::vector<double> g;
  for (int n : {32, 64, 128}) {
    const auto d = build_domain(Shape::UnitDisc, n);
    g.push_back(GreenTable(d).diagonal(d.origin()));
  }
  const double target = 1.0 / (2.0 * std::numbers::pi);
  for (std::size_t k = 0; k + 1 < g.size(); ++k) {
    const double slope = (g[k + 1] - g[k]) / std::log(2.0);
    CHECK(std::abs(slope - target) < 0.1 * target);
  }
}

TEST_CASE("GFF samples have covariance G") {
  const auto d = build_domain(Shape::UnitDisc, 8);
  const GffSampler sampler(d);
  const GreenTable g(d);
  const Vertex o = d.origin(), e = d.find(3, 0);
  const int n = 40000;
  std::vector<double> xo(n), xe(n);
  mc::Rng rng(77);
  for (int k = 0; k < n; ++k) {
    const auto phi = sampler.sample(rng);
    REQUIRE(phi.size() == d.size());
    xo[k] = phi[static_cast<std::size_t>(o)];
    xe[k] = phi[static_cast<std::size_t>(e)];
  }
  CHECK(std::abs(mc::mean_se(xo).mean) < 3.0 * mc::mean_se(xo).se);
  const auto var = mc::covariance_se(xo, xo);
  const auto cov = mc::covariance_se(xo, xe);
  CHECK(std::abs(var.mean - g(o, o)) < 3.0 * var.se);
  CHECK(std::abs(cov.mean - g(o, e)) < 3.0 * cov.se);
}
