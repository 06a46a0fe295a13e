//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <vector>

#include "gearnetk/geometry.hpp"
#include "gearnetk/rng.hpp"
#include "gearnetk/structure.hpp"

namespace gearnetk {

struct GraphConfig {
  int d_seq = 3;           // sequential edge threshold: |j - i| < d_seq
  double d_radius = 10.0;  // radius cutoff, angstrom (strict <)
  int k = 10;              // spatial nearest neighbors per node
  int d_long = 5;          // radius/KNN edges need |i - j| >= d_long
  int num_angle_bins = 8;  // line-graph relations over [0, pi]

  int num_relations() const { return 2 * d_seq + 1; }
  int sequential_relation(int offset) const { return offset + d_seq - 1; }
  int radius_relation() const { return 2 * d_seq - 1; }
  int knn_relation() const { return 2 * d_seq; }
  void validate() const;
};

struct Edge {
  std::int32_t src = 0;
  std::int32_t dst = 0;
  std::int32_t relation = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Typed directed multigraph over residues.
//
// Relations: 0 .. 2*d_seq-2 are sequential with offset d = r - (d_seq - 1),
// 2*d_seq-1 is the radius relation, 2*d_seq the KNN relation.
struct ResidueGraph {
  std::vector<Vec3> coords;
  std::vector<int> residue_types;
  std::vector<Edge> edges;
  int num_relations = 7;

  std::size_t num_nodes() const { return coords.size(); }
  std::size_t num_edges() const { return edges.size(); }

  // Structural invariants: endpoint/relation ranges, finite coordinates,
  // matching array lengths, no duplicate (src, dst, relation) triples.
  // Geometric consistency of relations holds for freshly built graphs but is
  // not required here (crops re-index nodes).
  void validate() const;
};

// Line graph of a ResidueGraph: one node per non-self-loop edge, one edge
// from e1=(i,j,r1) to e2=(j,k,r2) whenever they share the middle node j and
// i != k; the relation is the angle bin at j.
struct LineGraph {
  // Maps a ResidueGraph edge index to its line-graph node, -1 for self-loops.
  std::vector<std::int32_t> node_of_edge;
  // Inverse: the ResidueGraph edge index behind each line-graph node.
  std::vector<std::int32_t> edge_of_node;
  std::vector<Edge> edges;  // src/dst are line-graph node indices
  int num_relations = 8;

  std::size_t num_nodes() const { return edge_of_node.size(); }
};

// Builds the relational residue graph: sequential edges for every ordered
// pair with |j - i| < d_seq (self-loops included), radius edges in both
// directions for pairs closer than d_radius, and directed KNN edges
// (neighbor -> node) from each node's k nearest candidates; radius and KNN
// edges require |i - j| >= d_long. KNN ties break toward the smaller index.
ResidueGraph build_graph(const ProteinStructure& s, const GraphConfig& cfg = {});

// Uniformly samples a consecutive segment [l, l+length) and keeps the
// induced subgraph, nodes re-indexed. A copy when n <= length.
ResidueGraph crop_subsequence(const ResidueGraph& g, Rng& rng, std::size_t length = 50);

// Keeps all nodes within `radius` of a uniformly sampled center node
// (center always kept) plus the induced subgraph, order-preserving re-index.
ResidueGraph crop_subspace(const ResidueGraph& g, Rng& rng, double radius = 15.0);

// Removes each edge independently with probability `rate`.
ResidueGraph mask_edges(const ResidueGraph& g, Rng& rng, double rate = 0.15);

// Throws DegenerateGeometry if adjacent edges meet at coincident coordinates.
LineGraph build_line_graph(const ResidueGraph& g, const GraphConfig& cfg = {});

}  // namespace gearnetk
