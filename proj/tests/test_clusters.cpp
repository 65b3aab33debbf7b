#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "loopfield/clusters.hpp"

using namespace loopfield;

namespace {

// Transitive closure of "shares a vertex" by repeated relaxation.
std::vector<int> closure_labels(const std::vector<std::vector<Vertex>>& loops) {
  const std::size_t n = loops.size();
  std::vector<std::set<Vertex>> sets;
  for (const auto& l : loops) sets.emplace_back(l.begin(), l.end());
  std::vector<int> label(n);
  for (std::size_t i = 0; i < n; ++i) label[i] = static_cast<int>(i);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (label[i] == label[j]) continue;
        bool meet = false;
        for (Vertex v : sets[i])
          if (sets[j].count(v)) {
            meet = true;
            break;
          }
        if (!meet) continue;
        const int lo = std::min(label[i], label[j]), hi = std::max(label[i], label[j]);
        for (auto& l : label)
          if (l == hi) l = lo;
        changed = true;
      }
  }
  return label;
}

}  // namespace

TEST_CASE("union-find") {
  UnionFind uf(5);
  uf.unite(0, 1);
  uf.unite(3, 4);
  CHECK(uf.find(0) == uf.find(1));
  CHECK(uf.find(2) != uf.find(1));
  uf.unite(1, 4);
  CHECK(uf.find(0) == uf.find(3));
  CHECK(uf.add() == 5);
  CHECK(uf.find(5) == 5);
}

TEST_CASE("clusters agree with a quadratic closure oracle") {
  mc::Rng rng(8);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t nv = 300, nl = 1 + rng() % 200;
    std::vector<std::vector<Vertex>> loops(nl);
    for (auto& l : loops) {
      const auto len = 1 + rng() % 4;
      for (std::uint64_t k = 0; k < len; ++k) l.push_back(static_cast<Vertex>(rng() % nv));
    }
    const auto p = build_clusters(loops, nv);
    const auto ref = closure_labels(loops);
    for (std::size_t i = 0; i < nl; ++i)
      for (std::size_t j = i + 1; j < nl; ++j)
        CHECK((p.loop_to_cluster[i] == p.loop_to_cluster[j]) == (ref[i] == ref[j]));
    // Ids follow the first loop of each cluster.
    std::int32_t next = 0;
    for (std::size_t i = 0; i < nl; ++i) {
      CHECK(p.loop_to_cluster[i] <= next);
      if (p.loop_to_cluster[i] == next) ++next;
    }
    std::size_t covered = 0;
    for (std::size_t c = 0; c < p.size(); ++c) {
      CHECK(std::is_sorted(p.cluster_vertices[c].begin(), p.cluster_vertices[c].end()));
      for (Vertex v : p.cluster_vertices[c]) CHECK(p.vertex_cluster[static_cast<std::size_t>(v)] == static_cast<int>(c));
      covered += p.cluster_vertices[c].size();
    }
    CHECK(covered == static_cast<std::size_t>(std::count_if(p.vertex_cluster.begin(), p.vertex_cluster.end(),
                                                            [](int c) { return c >= 0; })));
  }
  CHECK_THROWS(build_clusters(std::vector<std::vector<Vertex>>{{0, 9}}, 5));
  CHECK_THROWS(build_clusters(std::vector<std::vector<Vertex>>{{}}, 5));
}

TEST_CASE("crossing events on hand-built partitions") {
  const std::vector<std::vector<Vertex>> loops{{0, 1}, {1, 2}, {5, 6}, {8}};
  const auto p = build_clusters(loops, 10);
  CHECK(p.size() == 3);
  const std::vector<Vertex> a{0}, b{2}, c{6}, e{3, 4}, f{8};
  CHECK(crossing_event(p, a, b));
  CHECK_FALSE(crossing_event(p, a, c));
  CHECK_FALSE(crossing_event(p, e, b));
  CHECK(crossing_event(p, f, f));
  CHECK_FALSE(crossing_event(p, std::vector<Vertex>{}, b));
}

TEST_CASE("spins are fair and independent of the partition") {
  const std::vector<std::vector<Vertex>> loops{{0}, {1}, {2}};
  auto p = build_clusters(loops, 3);
  mc::Rng rng(1);
  int plus = 0;
  const int reps = 20000;
  for (int k = 0; k < reps; ++k) {
    assign_spins(p, rng);
    REQUIRE(p.spins.size() == 3);
    for (int s : p.spins) {
      CHECK((s == 1 || s == -1));
      plus += s == 1;
    }
  }
  const auto e = mc::binomial(static_cast<std::size_t>(plus), 3 * reps);
  CHECK(std::abs(e.mean - 0.5) < 4.0 * e.se);
}

TEST_CASE("disc and circle vertex sets") {
  const auto d = build_domain(Shape::UnitDisc, 16);
  const auto disc = disc_vertices(d, 0.25);
  CHECK(std::find(disc.begin(), disc.end(), d.origin()) != disc.end());
  for (Vertex v : disc) CHECK(d.norm(v) <= 0.25);
  CHECK(disc.size() == 49);  // i^2 + j^2 <= 16
  const auto circle = circle_vertices(d, 0.5);
  for (Vertex v : circle) CHECK(std::abs(d.norm(v) - 0.5) <= 1.0 / 16 + 1e-12);
  CHECK(circle.size() > 20);
}

TEST_CASE("orphan resolution takes the nearest visited vertex") {
  const auto d = build_domain(Shape::UnitSquare, 8);
  const Vertex a = d.find(0, 0), b = d.find(5, 0);
  const auto p = build_clusters(std::vector<std::vector<Vertex>>{{a}, {b}}, d.size());
  const OrphanResolver resolver(d);
  const auto r = resolver.resolve(p);
  CHECK_FALSE(r.orphan[static_cast<std::size_t>(a)]);
  CHECK(r.orphan[static_cast<std::size_t>(d.find(1, 0))]);
  CHECK(r.cluster[static_cast<std::size_t>(d.find(2, 0))] == p.vertex_cluster[static_cast<std::size_t>(a)]);
  CHECK(r.cluster[static_cast<std::size_t>(d.find(4, 1))] == p.vertex_cluster[static_cast<std::size_t>(b)]);
  CHECK(r.cluster[static_cast<std::size_t>(d.find(-7, -7))] == p.vertex_cluster[static_cast<std::size_t>(a)]);
  // (2, 0) is equidistant from (0, 0) and (4, 0); the tie goes to the lower index, (0, 0).
  const auto p2 = build_clusters(std::vector<std::vector<Vertex>>{{d.find(4, 0)}, {d.find(0, 0)}}, d.size());
  const auto r2 = resolver.resolve(p2);
  CHECK(r2.cluster[static_cast<std::size_t>(d.find(2, 0))] == p2.vertex_cluster[static_cast<std::size_t>(d.find(0, 0))]);
  for (std::size_t v = 0; v < d.size(); ++v) CHECK(r.cluster[v] >= 0);
}

TEST_CASE("neighbourhood counts and Minkowski estimates") {
  const auto d = build_domain(Shape::UnitSquare, 8);
  const std::vector<Vertex> one{d.origin()};
  CHECK(neighborhood_count(d, one, 0.0) == 1);
  CHECK(neighborhood_count(d, one, 1.0 / 8) == 5);
  CHECK(neighborhood_count(d, one, std::sqrt(2.0) / 8) == 9);
  CHECK(neighborhood_count(d, one, 10.0) == d.size());
  const std::vector<Vertex> two{d.find(0, 0), d.find(1, 0)};
  CHECK(neighborhood_count(d, two, 1.0 / 8) == 8);
  CHECK(neighborhood_count(d, std::vector<Vertex>{}, 1.0) == 0);

  const auto p = build_clusters(std::vector<std::vector<Vertex>>{two}, d.size());
  CHECK(minkowski_estimate(d, p, 0, 1.0 / 8, 0.5) == doctest::Approx(8.0 / 64.0 / 0.5));
  CHECK_THROWS(minkowski_estimate(d, p, 1, 0.1, 0.5));
  CHECK_THROWS(minkowski_estimate(d, p, 0, 0.1, 0.0));
  CHECK_THROWS(neighborhood_count(d, two, -1.0));
}

TEST_CASE("crossing probabilities decrease with the inner radius") {
  const auto d = build_domain(Shape::UnitDisc, 24);
  const std::vector<double> radii{std::exp(-1.0), std::exp(-1.5), std::exp(-2.0)};
  const auto curve = estimate_Zr_curve(d, 0.5, radii, mc::RunSpec{5, 400, 1});
  REQUIRE(curve.estimates.size() == 3);
  CHECK(curve.estimates[0].mean >= curve.estimates[1].mean);
  CHECK(curve.estimates[1].mean >= curve.estimates[2].mean);
  CHECK(curve.estimates[2].mean > 0.0);
  CHECK_THROWS(estimate_Zr(d, 0.5, 0.01, mc::RunSpec{5, 10, 1}));
  CHECK_THROWS(estimate_Zr(d, 0.5, 0.5, mc::RunSpec{5, 10, 1}));
  CHECK_THROWS(estimate_Zr(build_domain(Shape::UnitSquare, 24), 0.5, 0.2, mc::RunSpec{5, 10, 1}));
}

TEST_CASE("thick-loop connection estimators are consistent") {
  const auto d = build_domain(Shape::UnitDisc, 16);
  const std::vector<double> gammas{0.5, 1.0};
  const auto est = estimate_Zgamma_curve(d, 0.5, gammas, mc::RunSpec{6, 3000, 1});
  for (const auto& e : est) {
    CHECK(e.connected.mean <= e.nonempty.mean);
    CHECK(e.connected.mean <= e.union_bound.mean + 1e-12);
    const double joint = std::hypot(e.connected.se, e.conditioned.se);
    CHECK(std::abs(e.connected.mean - e.conditioned.mean) < 4.0 * joint);
  }
  CHECK(est[0].conditioned.mean < est[1].conditioned.mean);
}
