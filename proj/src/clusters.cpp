#include "loopfield/clusters.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace loopfield {

UnionFind::UnionFind(std::size_t size) : parent_(size), rank_(size, 0) {
  std::iota(parent_.begin(), parent_.end(), std::size_t{0});
}

std::size_t UnionFind::add() {
  parent_.push_back(parent_.size());
  rank_.push_back(0);
  return parent_.size() - 1;
}

std::size_t UnionFind::find(std::size_t i) {
  while (parent_[i] != i) {
    parent_[i] = parent_[parent_[i]];
    i = parent_[i];
  }
  return i;
}

void UnionFind::unite(std::size_t a, std::size_t b) {
  a = find(a);
  b = find(b);
  if (a == b) return;
  if (rank_[a] < rank_[b]) std::swap(a, b);
  parent_[b] = a;
  if (rank_[a] == rank_[b]) ++rank_[a];
}

namespace {

template <class LoopAt>
ClusterPartition build_impl(std::size_t num_loops, LoopAt loop_at, std::size_t num_vertices) {
  UnionFind uf(num_loops);
  std::vector<std::int32_t> first(num_vertices, -1);
  for (std::size_t i = 0; i < num_loops; ++i) {
    for (Vertex v : loop_at(i)) {
      if (v < 0 || static_cast<std::size_t>(v) >= num_vertices)
        throw std::invalid_argument("build_clusters: loop visits a vertex outside the domain");
      auto& f = first[static_cast<std::size_t>(v)];
      if (f < 0)
        f = static_cast<std::int32_t>(i);
      else
        uf.unite(i, static_cast<std::size_t>(f));
    }
  }

  ClusterPartition p;
  p.loop_to_cluster.assign(num_loops, -1);
  std::vector<std::int32_t> id_of_root(num_loops, -1);
  std::int32_t next = 0;
  for (std::size_t i = 0; i < num_loops; ++i) {
    const std::size_t root = uf.find(i);
    if (id_of_root[root] < 0) id_of_root[root] = next++;
    p.loop_to_cluster[i] = id_of_root[root];
  }
  p.cluster_vertices.resize(static_cast<std::size_t>(next));
  p.vertex_cluster.assign(num_vertices, -1);
  for (std::size_t v = 0; v < num_vertices; ++v) {
    if (first[v] < 0) continue;
    const std::int32_t c = p.loop_to_cluster[static_cast<std::size_t>(first[v])];
    p.vertex_cluster[v] = c;
    p.cluster_vertices[static_cast<std::size_t>(c)].push_back(static_cast<Vertex>(v));
  }
  return p;
}

}  // namespace

ClusterPartition build_clusters(std::span<const std::vector<Vertex>> loops, std::size_t num_vertices) {
  for (const auto& loop : loops)
    if (loop.empty()) throw std::invalid_argument("build_clusters: empty loop");
  return build_impl(
      loops.size(), [&](std::size_t i) -> const std::vector<Vertex>& { return loops[i]; }, num_vertices);
}

ClusterPartition build_clusters(const LoopSoupSample& sample) {
  return build_impl(
      sample.loops.size(), [&](std::size_t i) -> const std::vector<Vertex>& { return sample.loops[i].visits; },
      sample.occupation.size());
}

void assign_spins(ClusterPartition& partition, mc::Rng& rng) {
  partition.spins.resize(partition.size());
  for (auto& s : partition.spins) s = rng.sign();
}

bool crossing_event(const ClusterPartition& partition, std::span<const Vertex> a, std::span<const Vertex> b) {
  std::vector<char> touched(partition.size(), 0);
  bool any = false;
  for (Vertex v : a) {
    const auto c = partition.vertex_cluster.at(static_cast<std::size_t>(v));
    if (c >= 0) touched[static_cast<std::size_t>(c)] = any = true;
  }
  if (!any) return false;
  for (Vertex v : b) {
    const auto c = partition.vertex_cluster.at(static_cast<std::size_t>(v));
    if (c >= 0 && touched[static_cast<std::size_t>(c)]) return true;
  }
  return false;
}

std::vector<Vertex> disc_vertices(const LatticeDomain& domain, double radius) {
  std::vector<Vertex> out;
  for (std::size_t v = 0; v < domain.size(); ++v)
    if (domain.norm(static_cast<Vertex>(v)) <= radius) out.push_back(static_cast<Vertex>(v));
  return out;
}

std::vector<Vertex> circle_vertices(const LatticeDomain& domain, double radius) {
  const double h = 1.0 / domain.mesh();
  std::vector<Vertex> out;
  for (std::size_t v = 0; v < domain.size(); ++v)
    if (std::abs(domain.norm(static_cast<Vertex>(v)) - radius) <= h) out.push_back(static_cast<Vertex>(v));
  return out;
}

OrphanResolver::OrphanResolver(const LatticeDomain& domain) : domain_(&domain) {
  int span = 0;
  for (std::size_t v = 0; v < domain.size(); ++v) {
    const auto& p = domain.point(static_cast<Vertex>(v));
    span = std::max({span, std::abs(p.i), std::abs(p.j)});
  }
  const int reach = 2 * span + 1;
  for (int di = -reach; di <= reach; ++di)
    for (int dj = -reach; dj <= reach; ++dj) offsets_.emplace_back(di, dj);
  std::stable_sort(offsets_.begin(), offsets_.end(), [](const auto& a, const auto& b) {
    return a.first * a.first + a.second * a.second < b.first * b.first + b.second * b.second;
  });
  offset_norm2_.reserve(offsets_.size());
  for (const auto& [di, dj] : offsets_) offset_norm2_.push_back(di * di + dj * dj);
}

OrphanResolver::Result OrphanResolver::resolve(const ClusterPartition& partition) const {
  const LatticeDomain& domain = *domain_;
  Result r;
  r.cluster = partition.vertex_cluster;
  r.orphan.assign(domain.size(), 0);
  if (partition.size() == 0) {
    if (domain.size() > 0) throw std::runtime_error("OrphanResolver: no loop-visited vertex to attach to");
    return r;
  }
  for (std::size_t v = 0; v < domain.size(); ++v) {
    if (partition.vertex_cluster[v] >= 0) continue;
    r.orphan[v] = 1;
    const auto& p = domain.point(static_cast<Vertex>(v));
    Vertex best = kNoVertex;
    int best_norm2 = -1;
    for (std::size_t k = 0; k < offsets_.size(); ++k) {
      if (best != kNoVertex && offset_norm2_[k] > best_norm2) break;
      const Vertex w = domain.find(p.i + offsets_[k].first, p.j + offsets_[k].second);
      if (w == kNoVertex || partition.vertex_cluster[static_cast<std::size_t>(w)] < 0) continue;
      if (best == kNoVertex || w < best) {
        best = w;
        best_norm2 = offset_norm2_[k];
      }
    }
    r.cluster[v] = partition.vertex_cluster[static_cast<std::size_t>(best)];
  }
  return r;
}

namespace {

constexpr double kOuterRadius = 0.36787944117144233;  // 1/e

void check_crossing_domain(const LatticeDomain& domain, double theta) {
  if (domain.shape() != Shape::UnitDisc) throw std::invalid_argument("crossing estimates require the unit disc");
  if (domain.origin() == kNoVertex) throw std::invalid_argument("crossing estimates require the origin in the domain");
  if (!(theta > 0.0)) throw std::invalid_argument("crossing estimates: theta must be positive");
}

// Marks which clusters meet a vertex set.
std::vector<char> clusters_meeting(const ClusterPartition& p, std::span<const Vertex> set) {
  std::vector<char> hit(p.size(), 0);
  for (Vertex v : set) {
    const auto c = p.vertex_cluster[static_cast<std::size_t>(v)];
    if (c >= 0) hit[static_cast<std::size_t>(c)] = 1;
  }
  return hit;
}

}  // namespace

CrossingCurve estimate_Zr_curve(const LatticeDomain& domain, double theta, std::span<const double> radii,
                                const mc::RunSpec& run) {
  check_crossing_domain(domain, theta);
  if (run.replicas == 0) throw std::invalid_argument("estimate_Zr: replicas must be >= 1");
  if (radii.empty()) throw std::invalid_argument("estimate_Zr: empty radius list");
  std::vector<std::vector<Vertex>> inner;
  for (double r : radii) {
    if (!(r > 0.0 && r <= kOuterRadius + 1e-12))
      throw std::invalid_argument("estimate_Zr: r must lie in (0, 1/e]");
    if (r * domain.mesh() < 1.0)
      throw std::invalid_argument("estimate_Zr: r*N must be >= 1 (radius below the mesh)");
    inner.push_back(disc_vertices(domain, r));
  }
  const auto outer = circle_vertices(domain, kOuterRadius);
  const LoopSoupSampler sampler(domain);

  auto records = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    const auto soup = sampler.sample(theta, rng);
    const auto partition = build_clusters(soup);
    const auto outer_hit = clusters_meeting(partition, outer);
    std::vector<char> crossed(inner.size(), 0);
    for (std::size_t k = 0; k < inner.size(); ++k)
      for (Vertex v : inner[k]) {
        const auto c = partition.vertex_cluster[static_cast<std::size_t>(v)];
        if (c >= 0 && outer_hit[static_cast<std::size_t>(c)]) {
          crossed[k] = 1;
          break;
        }
      }
    return crossed;
  });

  CrossingCurve curve;
  curve.radii.assign(radii.begin(), radii.end());
  for (std::size_t k = 0; k < inner.size(); ++k) {
    std::size_t hits = 0;
    for (const auto& rec : records) hits += rec[k];
    curve.estimates.push_back(mc::binomial(hits, records.size()));
  }
  return curve;
}

mc::Estimate estimate_Zr(const LatticeDomain& domain, double theta, double r, const mc::RunSpec& run) {
  const double radii[] = {r};
  return estimate_Zr_curve(domain, theta, radii, run).estimates.front();
}

std::vector<ZgammaEstimate> estimate_Zgamma_curve(const LatticeDomain& domain, double theta,
                                                  std::span<const double> gammas, const mc::RunSpec& run) {
  check_crossing_domain(domain, theta);
  if (run.replicas == 0) throw std::invalid_argument("estimate_Zgamma: replicas must be >= 1");
  for (double g : gammas)
    if (!(g > 0.0)) throw std::invalid_argument("estimate_Zgamma: gamma must be positive");
  const auto outer = circle_vertices(domain, kOuterRadius);
  std::vector<char> on_outer(domain.size(), 0);
  for (Vertex v : outer) on_outer[static_cast<std::size_t>(v)] = 1;

  const LoopSoupSampler sampler(domain);
  const GreenTable green(domain);
  const Vertex origin = domain.origin();
  const double return_prob = full_return_probability(green, origin);

  struct Flags {
    char nonempty = 0, connected = 0, bound = 0, conditioned = 0;
  };
  auto records = mc::run_replicas(run, [&](std::size_t, mc::Rng& rng) {
    const auto soup = sampler.sample(theta, rng);
    const auto partition = build_clusters(soup);
    const auto outer_hit = clusters_meeting(partition, outer);
    const auto connects = [&](const ThickLoop& thick) {
      for (const auto& bridge : thick.bridges)
        for (Vertex v : bridge) {
          const auto c = partition.vertex_cluster[static_cast<std::size_t>(v)];
          if (on_outer[static_cast<std::size_t>(v)] || (c >= 0 && outer_hit[static_cast<std::size_t>(c)])) return true;
        }
      return false;
    };
    std::vector<Flags> flags(gammas.size());
    for (std::size_t g = 0; g < gammas.size(); ++g) {
      const double a = gammas[g] * gammas[g] / 2.0;
      flags[g].conditioned = connects(sample_thick_loop_nonempty(domain, origin, a, return_prob, rng));
      const auto thick = sample_thick_loop(domain, origin, a, return_prob, rng);
      if (thick.empty()) continue;
      flags[g].nonempty = 1;
      flags[g].connected = connects(thick);
      // Dominating event: the thick loop reaches the circle itself, or a soup
      // cluster joins the disc of the thick loop's radius to the circle.
      const double radius = thick.radius(domain);
      bool bound = radius >= kOuterRadius - 1.0 / domain.mesh();
      if (!bound) {
        for (std::size_t v = 0; v < domain.size() && !bound; ++v) {
          if (domain.norm(static_cast<Vertex>(v)) > radius + 1e-12) continue;
          const auto c = partition.vertex_cluster[v];
          bound = c >= 0 && outer_hit[static_cast<std::size_t>(c)];
        }
      }
      flags[g].bound = bound;
    }
    return flags;
  });

  std::vector<ZgammaEstimate> out;
  for (std::size_t g = 0; g < gammas.size(); ++g) {
    std::size_t nonempty = 0, connected = 0, bound = 0, conditioned = 0;
    for (const auto& rec : records) {
      nonempty += rec[g].nonempty;
      connected += rec[g].connected;
      bound += rec[g].bound;
      conditioned += rec[g].conditioned;
    }
    ZgammaEstimate e;
    e.gamma = gammas[g];
    e.connected = mc::binomial(connected, records.size());
    e.nonempty = mc::binomial(nonempty, records.size());
    e.union_bound = mc::binomial(bound, records.size());
    const double p = thick_loop_nonempty_probability(gammas[g] * gammas[g] / 2.0, return_prob);
    e.conditioned = mc::binomial(conditioned, records.size());
    e.conditioned.mean *= p;
    e.conditioned.se *= p;
    out.push_back(e);
  }
  return out;
}

ZgammaEstimate estimate_Zgamma(const LatticeDomain& domain, double theta, double gamma, const mc::RunSpec& run) {
  const double gammas[] = {gamma};
  return estimate_Zgamma_curve(domain, theta, gammas, run).front();
}

std::size_t neighborhood_count(const LatticeDomain& domain, std::span<const Vertex> cluster, double r) {
  if (!(r >= 0.0)) throw std::invalid_argument("neighborhood_count: r must be nonnegative");
  if (cluster.empty()) return 0;
  const double reach = r * domain.mesh();
  // Every pair of domain points is within the bounding-box diagonal.
  int min_i = 0, max_i = 0, min_j = 0, max_j = 0;
  for (std::size_t v = 0; v < domain.size(); ++v) {
    const auto& p = domain.point(static_cast<Vertex>(v));
    min_i = std::min(min_i, p.i);
    max_i = std::max(max_i, p.i);
    min_j = std::min(min_j, p.j);
    max_j = std::max(max_j, p.j);
  }
  if (reach >= std::hypot(max_i - min_i, max_j - min_j)) return domain.size();

  const int k = static_cast<int>(std::floor(reach));
  const double reach2 = reach * reach;
  std::vector<char> marked(domain.size(), 0);
  std::size_t count = 0;
  for (Vertex c : cluster) {
    const auto& p = domain.point(c);
    for (int di = -k; di <= k; ++di)
      for (int dj = -k; dj <= k; ++dj) {
        if (di * di + dj * dj > reach2) continue;
        const Vertex w = domain.find(p.i + di, p.j + dj);
        if (w == kNoVertex || marked[static_cast<std::size_t>(w)]) continue;
        marked[static_cast<std::size_t>(w)] = 1;
        ++count;
      }
  }
  return count;
}

double minkowski_estimate(const LatticeDomain& domain, const ClusterPartition& partition, std::int32_t cluster_id,
                          double r, double zr) {
  if (!(zr > 0.0)) throw std::invalid_argument("minkowski_estimate: Zr must be positive");
  if (cluster_id < 0 || static_cast<std::size_t>(cluster_id) >= partition.size())
    throw std::out_of_range("minkowski_estimate: no cluster with id " + std::to_string(cluster_id));
  const double n = domain.mesh();
  const auto count = neighborhood_count(domain, partition.cluster_vertices[static_cast<std::size_t>(cluster_id)], r);
  return static_cast<double>(count) / (n * n) / zr;
}

}  // namespace loopfield
