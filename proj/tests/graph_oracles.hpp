//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
// Brute-force reference implementations of the graph constructions, kept
// independent of the library's spatial index and adjacency bookkeeping.
#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>
#include <vector>

#include "gearnetk/geometry.hpp"
#include "gearnetk/graph.hpp"
#include "gearnetk/structure.hpp"

namespace gearnetk::test {

using EdgeTriple = std::tuple<int, int, int>;  // (src, dst, relation)

inline std::set<EdgeTriple> edge_set(const ResidueGraph& g) {
  std::set<EdgeTriple> out;
  for (const Edge& e : g.edges) out.insert({e.src, e.dst, e.relation});
  return out;
}

// O(n^2) residue-graph oracle: every ordered pair checked against the three
// edge rules directly.
inline std::set<EdgeTriple> build_graph_oracle(const ProteinStructure& s,
                                               const GraphConfig& cfg) {
  const int n = static_cast<int>(s.size());
  std::set<EdgeTriple> out;

  // Sequential.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (std::abs(j - i) < cfg.d_seq)
        out.insert({i, j, (j - i) + cfg.d_seq - 1});

  // Radius.
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && std::abs(i - j) >= cfg.d_long &&
          distance(s.coords[i], s.coords[j]) < cfg.d_radius)
        out.insert({i, j, 2 * cfg.d_seq - 1});

  // KNN: for each node i, the k candidates minimizing (squared distance,
  // index); edges run neighbor -> node.
  for (int i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> candidates;
    for (int j = 0; j < n; ++j) {
      if (j == i || std::abs(i - j) < cfg.d_long) continue;
      const Vec3 d = s.coords[i] - s.coords[j];
      candidates.push_back({dot(d, d), j});
    }
    std::sort(candidates.begin(), candidates.end());
    const std::size_t take = std::min<std::size_t>(cfg.k, candidates.size());
    for (std::size_t t = 0; t < take; ++t)
      out.insert({candidates[t].second, i, 2 * cfg.d_seq});
  }
  return out;
}

using LineEdgeTriple = std::tuple<int, int, int>;  // (edge index 1, edge index 2, bin)

// O(m^2) line-graph oracle over ordered pairs of ResidueGraph edge indices.
inline std::set<LineEdgeTriple> line_graph_oracle(const ResidueGraph& g,
                                                  const GraphConfig& cfg) {
  std::set<LineEdgeTriple> out;
  const int m = static_cast<int>(g.num_edges());
  for (int e1 = 0; e1 < m; ++e1) {
    const Edge& a = g.edges[e1];
    if (a.src == a.dst) continue;
    for (int e2 = 0; e2 < m; ++e2) {
      const Edge& b = g.edges[e2];
      if (b.src == b.dst) continue;
      if (a.dst != b.src || a.src == b.dst) continue;
      const double theta = angle_at(g.coords[a.src], g.coords[a.dst], g.coords[b.dst]);
      out.insert({e1, e2, angle_bin(theta, {cfg.num_angle_bins})});
    }
  }
  return out;
}

// The library's line graph re-keyed to ResidueGraph edge indices for
// comparison with the oracle.
inline std::set<LineEdgeTriple> line_graph_as_edge_triples(const LineGraph& lg) {
  std::set<LineEdgeTriple> out;
  for (const Edge& e : lg.edges)
    out.insert({lg.edge_of_node[e.src], lg.edge_of_node[e.dst], e.relation});
  return out;
}

}  // namespace gearnetk::test
