//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <tuple>
#include <unordered_map>

namespace gearnetk {

void GraphConfig::validate() const {
  if (d_seq < 1) throw ConfigError("graph: d_seq must be >= 1");
  if (!(d_radius > 0.0)) throw ConfigError("graph: d_radius must be > 0");
  if (k < 1) throw ConfigError("graph: k must be >= 1");
  if (d_long < 0) throw ConfigError("graph: d_long must be >= 0");
  if (num_angle_bins < 1) throw ConfigError("graph: num_angle_bins must be >= 1");
}

void ResidueGraph::validate() const {
  const auto n = static_cast<std::int32_t>(num_nodes());
  if (residue_types.size() != coords.size())
    throw SchemaError("graph: residue/coordinate count mismatch");
  for (const Vec3& c : coords)
    if (!c.finite()) throw SchemaError("graph: non-finite coordinate");
  std::set<std::tuple<std::int32_t, std::int32_t, std::int32_t>> seen;
  for (const Edge& e : edges) {
    if (e.src < 0 || e.src >= n || e.dst < 0 || e.dst >= n)
      throw IndexOutOfRange("graph: edge endpoint out of range");
    if (e.relation < 0 || e.relation >= num_relations)
      throw IndexOutOfRange("graph: edge relation out of range");
    if (!seen.insert({e.src, e.dst, e.relation}).second)
      throw SchemaError("graph: duplicate (src, dst, relation) triple");
  }
}

namespace {

// Uniform hash-grid over points; used for radius and nearest-neighbor
// queries. Deterministic: cells are visited in lexicographic offset order
// and each cell keeps its points in index order.
class SpatialGrid {
 public:
  SpatialGrid(const std::vector<Vec3>& pts, double cell) : pts_(pts), cell_(cell) {
    for (std::size_t i = 0; i < pts.size(); ++i)
      cells_[key_of(pts[i])].push_back(static_cast<std::int32_t>(i));
  }

  template <typename Fn>
  void for_each_in_box(const Vec3& q, double r, Fn&& fn) const {
    const auto [cx, cy, cz] = cell_coords(q);
    const int span = static_cast<int>(std::ceil(r / cell_)) + 1;
    for (int dx = -span; dx <= span; ++dx)
      for (int dy = -span; dy <= span; ++dy)
        for (int dz = -span; dz <= span; ++dz) {
          const auto it = cells_.find(pack(cx + dx, cy + dy, cz + dz));
          if (it == cells_.end()) continue;
          for (std::int32_t i : it->second) fn(i);
        }
  }

  // k nearest candidates of pts[query] ordered by (squared distance, index),
  // restricted to indices where accept(i) holds. Squared-distance ordering
  // equals Euclidean ordering; ties break toward the smaller index.
  template <typename Accept>
  std::vector<std::int32_t> k_nearest(std::int32_t query, int k, Accept&& accept) const {
    const Vec3 q = pts_[query];
    const auto [cx, cy, cz] = cell_coords(q);
    using Entry = std::pair<double, std::int32_t>;  // (d^2, index)
    std::vector<Entry> best;  // max-heap on Entry, k smallest kept

    const auto consider = [&](std::int32_t i) {
      if (i == query || !accept(i)) return;
      const Vec3 d = pts_[i] - q;
      const Entry e{dot(d, d), i};
      if (best.size() < static_cast<std::size_t>(k)) {
        best.push_back(e);
        std::push_heap(best.begin(), best.end());
      } else if (e < best.front()) {
        std::pop_heap(best.begin(), best.end());
        best.back() = e;
        std::push_heap(best.begin(), best.end());
      }
    };

    // Expand Chebyshev rings; a cell at ring r can hold nothing closer than
    // (r - 1) * cell, so once the heap is full and that bound exceeds the
    // current k-th distance the search is complete.
    std::size_t visited_cells = 0;
    for (int r = 0;; ++r) {
      if (r > 0) {
        const double bound = (static_cast<double>(r) - 1.0) * cell_;
        if (best.size() == static_cast<std::size_t>(k) && bound * bound > best.front().first)
          break;
        if (visited_cells == cells_.size()) break;  // every occupied cell seen
      }
      for_each_ring_cell(cx, cy, cz, r, [&](std::int64_t key) {
        const auto it = cells_.find(key);
        if (it == cells_.end()) return;
        ++visited_cells;
        for (std::int32_t i : it->second) consider(i);
      });
    }
    std::sort(best.begin(), best.end());
    std::vector<std::int32_t> out;
    out.reserve(best.size());
    for (const Entry& e : best) out.push_back(e.second);
    return out;
  }

 private:
  std::tuple<int, int, int> cell_coords(const Vec3& p) const {
    return {static_cast<int>(std::floor(p.x / cell_)),
            static_cast<int>(std::floor(p.y / cell_)),
            static_cast<int>(std::floor(p.z / cell_))};
  }

  std::int64_t key_of(const Vec3& p) const {
    const auto [x, y, z] = cell_coords(p);
    return pack(x, y, z);
  }

  static std::int64_t pack(int x, int y, int z) {
    const auto fold = [](int v) { return static_cast<std::int64_t>(v) & 0x1fffff; };
    return (fold(x) << 42) | (fold(y) << 21) | fold(z);
  }

  template <typename Fn>
  static void for_each_ring_cell(int cx, int cy, int cz, int r, Fn&& fn) {
    if (r == 0) {
      fn(pack(cx, cy, cz));
      return;
    }
    for (int dx = -r; dx <= r; ++dx)
      for (int dy = -r; dy <= r; ++dy)
        for (int dz = -r; dz <= r; ++dz) {
          if (std::max({std::abs(dx), std::abs(dy), std::abs(dz)}) != r) continue;
          fn(pack(cx + dx, cy + dy, cz + dz));
        }
  }

  const std::vector<Vec3>& pts_;
  double cell_;
  std::unordered_map<std::int64_t, std::vector<std::int32_t>> cells_;
};

}  // namespace

ResidueGraph build_graph(const ProteinStructure& s, const GraphConfig& cfg) {
  cfg.validate();
  s.validate();
  const auto n = static_cast<std::int32_t>(s.size());

  ResidueGraph g;
  g.coords = s.coords;
  g.residue_types = s.residue_types;
  g.num_relations = cfg.num_relations();

  // Sequential edges, offset d = j - i in (-d_seq, d_seq).
  for (std::int32_t i = 0; i < n; ++i)
    for (int d = -(cfg.d_seq - 1); d <= cfg.d_seq - 1; ++d) {
      const std::int32_t j = i + d;
      if (j < 0 || j >= n) continue;
      g.edges.push_back({i, j, cfg.sequential_relation(d)});
    }

  SpatialGrid grid(s.coords, cfg.d_radius);
  const auto long_range = [&](std::int32_t i, std::int32_t j) {
    return std::abs(i - j) >= cfg.d_long;
  };

  // Radius edges, both directions per qualifying pair.
  for (std::int32_t i = 0; i < n; ++i) {
    grid.for_each_in_box(s.coords[i], cfg.d_radius, [&](std::int32_t j) {
      if (j <= i || !long_range(i, j)) return;
      if (distance(s.coords[i], s.coords[j]) < cfg.d_radius) {
        g.edges.push_back({i, j, cfg.radius_relation()});
        g.edges.push_back({j, i, cfg.radius_relation()});
      }
    });
  }

  // KNN edges, directed neighbor -> node.
  for (std::int32_t i = 0; i < n; ++i) {
    const auto nbrs =
        grid.k_nearest(i, cfg.k, [&](std::int32_t j) { return long_range(i, j); });
    for (std::int32_t j : nbrs) g.edges.push_back({j, i, cfg.knn_relation()});
  }
  return g;
}

namespace {

// keep[i] true for surviving nodes; rebuilds the induced subgraph with nodes
// re-indexed in original order.
ResidueGraph induced_subgraph(const ResidueGraph& g, const std::vector<char>& keep) {
  const auto n = static_cast<std::int32_t>(g.num_nodes());
  std::vector<std::int32_t> new_index(n, -1);
  ResidueGraph out;
  out.num_relations = g.num_relations;
  for (std::int32_t i = 0; i < n; ++i) {
    if (!keep[i]) continue;
    new_index[i] = static_cast<std::int32_t>(out.coords.size());
    out.coords.push_back(g.coords[i]);
    out.residue_types.push_back(g.residue_types[i]);
  }
  for (const Edge& e : g.edges) {
    if (new_index[e.src] < 0 || new_index[e.dst] < 0) continue;
    out.edges.push_back({new_index[e.src], new_index[e.dst], e.relation});
  }
  return out;
}

}  // namespace

ResidueGraph crop_subsequence(const ResidueGraph& g, Rng& rng, std::size_t length) {
  if (length < 1) throw ConfigError("crop_subsequence: length must be >= 1");
  const std::size_t n = g.num_nodes();
  if (n <= length) {
    rng.bounded(1);  // one draw either way, keeps streams aligned
    return g;
  }
  const std::size_t start = static_cast<std::size_t>(rng.bounded(n - length + 1));
  std::vector<char> keep(n, 0);
  for (std::size_t i = start; i < start + length; ++i) keep[i] = 1;
  return induced_subgraph(g, keep);
}

ResidueGraph crop_subspace(const ResidueGraph& g, Rng& rng, double radius) {
  if (!(radius > 0.0)) throw ConfigError("crop_subspace: radius must be > 0");
  const std::size_t n = g.num_nodes();
  if (n == 0) return g;
  const std::size_t center = static_cast<std::size_t>(rng.bounded(n));
  std::vector<char> keep(n, 0);
  for (std::size_t i = 0; i < n; ++i)
    keep[i] = distance(g.coords[i], g.coords[center]) <= radius || i == center;
  return induced_subgraph(g, keep);
}

ResidueGraph mask_edges(const ResidueGraph& g, Rng& rng, double rate) {
  if (rate < 0.0 || rate > 1.0) throw ConfigError("mask_edges: rate must be in [0, 1]");
  ResidueGraph out;
  out.coords = g.coords;
  out.residue_types = g.residue_types;
  out.num_relations = g.num_relations;
  for (const Edge& e : g.edges)
    if (rng.uniform() >= rate) out.edges.push_back(e);
  return out;
}

LineGraph build_line_graph(const ResidueGraph& g, const GraphConfig& cfg) {
  LineGraph lg;
  lg.num_relations = cfg.num_angle_bins;
  lg.node_of_edge.assign(g.num_edges(), -1);
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    if (g.edges[e].src == g.edges[e].dst) continue;  // angle undefined
    lg.node_of_edge[e] = static_cast<std::int32_t>(lg.edge_of_node.size());
    lg.edge_of_node.push_back(static_cast<std::int32_t>(e));
  }

  // Outgoing line-graph nodes grouped by source residue.
  std::vector<std::vector<std::int32_t>> out_of(g.num_nodes());
  for (std::int32_t v = 0; v < static_cast<std::int32_t>(lg.num_nodes()); ++v)
    out_of[g.edges[lg.edge_of_node[v]].src].push_back(v);

  const AngleBinning binning{cfg.num_angle_bins};
  for (std::int32_t v1 = 0; v1 < static_cast<std::int32_t>(lg.num_nodes()); ++v1) {
    const Edge& e1 = g.edges[lg.edge_of_node[v1]];
    for (std::int32_t v2 : out_of[e1.dst]) {
      const Edge& e2 = g.edges[lg.edge_of_node[v2]];
      if (e2.dst == e1.src) continue;  // i != k
      const double theta =
          angle_at(g.coords[e1.src], g.coords[e1.dst], g.coords[e2.dst]);
      lg.edges.push_back({v1, v2, angle_bin(theta, binning)});
    }
  }
  return lg;
}

}  // namespace gearnetk
