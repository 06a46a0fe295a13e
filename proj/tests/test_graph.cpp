//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/graph.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "graph_oracles.hpp"
#include "test_util.hpp"

namespace gearnetk {
namespace {

using test::build_graph_oracle;
using test::edge_set;
using test::line_graph_as_edge_triples;
using test::line_graph_oracle;

ProteinStructure collinear_chain(std::size_t n, double spacing) {
  ProteinStructure s;
  s.id = "chain";
  for (std::size_t i = 0; i < n; ++i) {
    s.residue_types.push_back(0);
    s.coords.push_back({spacing * static_cast<double>(i), 0.0, 0.0});
  }
  return s;
}

TEST(BuildGraph, SingleNodeHasOnlySelfLoop) {
  const ResidueGraph g = build_graph(collinear_chain(1, 3.8));
  ASSERT_EQ(g.num_edges(), 1u);
  EXPECT_EQ(g.edges[0], (Edge{0, 0, 2}));  // offset 0 at d_seq=3
  EXPECT_EQ(g.num_relations, 7);
}

TEST(BuildGraph, ThreeCollinearResiduesAtDefaults) {
  const ResidueGraph g = build_graph(collinear_chain(3, 3.8));
  // 3 self-loops, 4 offset +-1 edges, 2 offset +-2 edges; all spatial edges
  // are killed by the d_long filter.
  EXPECT_EQ(g.num_edges(), 9u);
  int self = 0, off1 = 0, off2 = 0;
  for (const Edge& e : g.edges) {
    const int d = e.dst - e.src;
    EXPECT_EQ(e.relation, d + 2);
    self += d == 0;
    off1 += std::abs(d) == 1;
    off2 += std::abs(d) == 2;
  }
  EXPECT_EQ(self, 3);
  EXPECT_EQ(off1, 4);
  EXPECT_EQ(off2, 2);
}

TEST(BuildGraph, MatchesBruteForceOracleOnRandomBoxes) {
  Rng rng(101);
  for (int rep = 0; rep < 40; ++rep) {
    const std::size_t n = 1 + rng.bounded(64);
    const ProteinStructure s = test::random_protein_in_box(n, 40.0, rng);
    const ResidueGraph g = build_graph(s);
    g.validate();
    EXPECT_EQ(edge_set(g), build_graph_oracle(s, GraphConfig{})) << "n=" << n;
  }
}

TEST(BuildGraph, MatchesOracleUnderVariedConfigs) {
  Rng rng(103);
  GraphConfig cfgs[] = {
      {.d_seq = 1, .d_radius = 6.0, .k = 3, .d_long = 0},
      {.d_seq = 2, .d_radius = 12.0, .k = 1, .d_long = 2},
      {.d_seq = 4, .d_radius = 8.0, .k = 20, .d_long = 7},
  };
  for (const GraphConfig& cfg : cfgs) {
    for (int rep = 0; rep < 10; ++rep) {
      const std::size_t n = 1 + rng.bounded(48);
      const ProteinStructure s = test::random_protein_in_box(n, 30.0, rng);
      const ResidueGraph g = build_graph(s, cfg);
      EXPECT_EQ(g.num_relations, cfg.num_relations());
      EXPECT_EQ(edge_set(g), build_graph_oracle(s, cfg));
    }
  }
}

TEST(BuildGraph, KnnTieBreaksTowardSmallerIndex) {
  // Equidistant candidates around node 0 at index distance >= d_long.
  ProteinStructure s;
  s.id = "ties";
  s.residue_types.assign(9, 0);
  s.coords.assign(9, {0, 0, 0});
  s.coords[0] = {0, 0, 0};
  // Nodes 5..8 all at exactly 4 A from node 0 in different directions.
  s.coords[5] = {4, 0, 0};
  s.coords[6] = {-4, 0, 0};
  s.coords[7] = {0, 4, 0};
  s.coords[8] = {0, -4, 0};
  // Fill the rest far away.
  s.coords[1] = {100, 100, 100};
  s.coords[2] = {101, 100, 100};
  s.coords[3] = {100, 101, 100};
  s.coords[4] = {100, 100, 101};
  GraphConfig cfg;
  cfg.k = 2;
  const ResidueGraph g = build_graph(s, cfg);
  std::vector<int> knn_sources;
  for (const Edge& e : g.edges)
    if (e.relation == cfg.knn_relation() && e.dst == 0) knn_sources.push_back(e.src);
  std::sort(knn_sources.begin(), knn_sources.end());
  EXPECT_EQ(knn_sources, (std::vector<int>{5, 6}));
}

TEST(BuildGraph, RadiusRelationIsSymmetric) {
  Rng rng(107);
  const ProteinStructure s = test::random_protein_in_box(40, 25.0, rng);
  const ResidueGraph g = build_graph(s);
  const auto edges = edge_set(g);
  for (const auto& [i, j, r] : edges)
    if (r == 5) EXPECT_TRUE(edges.count({j, i, r}));
}

TEST(BuildGraph, Se3InvarianceOfEdgeSets) {
  Rng rng(109);
  for (int rep = 0; rep < 10; ++rep) {
    const ProteinStructure s = test::random_protein(40, rng);
    const ResidueGraph g = build_graph(s);
    const Se3 t = random_se3(rng);
    ProteinStructure moved = s;
    for (Vec3& c : moved.coords) c = t.apply(c);
    const ResidueGraph g2 = build_graph(moved);
    EXPECT_EQ(edge_set(g), edge_set(g2));
  }
}

TEST(CropSubsequence, WholeProteinWhenShorterThanLength) {
  Rng rng(113);
  const ResidueGraph g = build_graph(test::random_protein(10, rng));
  Rng crop_rng(1);
  const ResidueGraph c = crop_subsequence(g, crop_rng, 50);
  EXPECT_EQ(edge_set(c), edge_set(g));
  EXPECT_EQ(c.residue_types, g.residue_types);
}

TEST(CropSubsequence, InducedSubgraphOracle) {
  Rng rng(127);
  const ResidueGraph g = build_graph(test::random_protein(100, rng));
  Rng crop_rng(7);
  const ResidueGraph c = crop_subsequence(g, crop_rng, 50);
  ASSERT_EQ(c.num_nodes(), 50u);

  // Recover the window by matching coordinates of node 0.
  std::size_t start = 0;
  while (start < g.num_nodes() && distance(g.coords[start], c.coords[0]) > 0) ++start;
  ASSERT_LT(start, g.num_nodes());

  // Every surviving edge existed in g between kept nodes, and every edge of g
  // between kept nodes survived.
  std::set<test::EdgeTriple> expected;
  for (const Edge& e : g.edges) {
    const bool in_window = e.src >= static_cast<int>(start) &&
                           e.src < static_cast<int>(start + 50) &&
                           e.dst >= static_cast<int>(start) &&
                           e.dst < static_cast<int>(start + 50);
    if (in_window)
      expected.insert({e.src - static_cast<int>(start), e.dst - static_cast<int>(start),
                       e.relation});
  }
  EXPECT_EQ(edge_set(c), expected);
}

TEST(CropSubsequence, TwoNodesLengthOne) {
  const ResidueGraph g = build_graph(collinear_chain(2, 3.8));
  Rng rng(5);
  const ResidueGraph c = crop_subsequence(g, rng, 1);
  ASSERT_EQ(c.num_nodes(), 1u);
  ASSERT_EQ(c.num_edges(), 1u);
  EXPECT_EQ(c.edges[0], (Edge{0, 0, 2}));  // only the self-loop survives
}

TEST(CropSubspace, KeepsExactlyTheBall) {
  // Two clusters 100 A apart; a center in one keeps exactly that cluster.
  ProteinStructure s;
  s.id = "clusters";
  for (int i = 0; i < 6; ++i) {
    s.residue_types.push_back(0);
    const double base = i < 3 ? 0.0 : 100.0;
    s.coords.push_back({base + i * 2.0, 0, 0});
  }
  const ResidueGraph g = build_graph(s);
  for (int attempt = 0; attempt < 20; ++attempt) {
    Rng rng(attempt);
    const ResidueGraph c = crop_subspace(g, rng, 15.0);
    ASSERT_EQ(c.num_nodes(), 3u);
    // Distance filter oracle: the kept cluster is internally within 15 A.
    for (std::size_t a = 0; a < 3; ++a)
      for (std::size_t b = 0; b < 3; ++b)
        EXPECT_LE(distance(c.coords[a], c.coords[b]), 15.0);
  }
}

TEST(CropSubspace, AllWithinRadiusIsIdentity) {
  Rng rng(131);
  const ResidueGraph g = build_graph(test::random_protein_in_box(12, 8.0, rng));
  Rng crop_rng(3);
  const ResidueGraph c = crop_subspace(g, crop_rng, 1000.0);
  EXPECT_EQ(edge_set(c), edge_set(g));
}

TEST(CropSubspace, SingleNodeIdentity) {
  const ResidueGraph g = build_graph(collinear_chain(1, 3.8));
  Rng rng(1);
  const ResidueGraph c = crop_subspace(g, rng, 15.0);
  EXPECT_EQ(c.num_nodes(), 1u);
  EXPECT_EQ(edge_set(c), edge_set(g));
}

TEST(MaskEdges, RateZeroAndOne) {
  Rng rng(137);
  const ResidueGraph g = build_graph(test::random_protein(30, rng));
  Rng r0(1), r1(2);
  EXPECT_EQ(mask_edges(g, r0, 0.0).num_edges(), g.num_edges());
  EXPECT_EQ(mask_edges(g, r1, 1.0).num_edges(), 0u);
}

TEST(MaskEdges, SurvivorCountWithinBinomialBand) {
  // ~10000 edges at keep rate 0.85: 5 sigma is +-178.
  Rng rng(139);
  const ResidueGraph g = build_graph(test::random_protein(700, rng));
  ASSERT_GT(g.num_edges(), 9000u);
  Rng mask_rng(17);
  const ResidueGraph masked = mask_edges(g, mask_rng, 0.15);
  const double m = static_cast<double>(g.num_edges());
  const double mean = 0.85 * m;
  const double sigma = std::sqrt(m * 0.85 * 0.15);
  EXPECT_NEAR(static_cast<double>(masked.num_edges()), mean, 5.0 * sigma);
  // Nodes unchanged.
  EXPECT_EQ(masked.num_nodes(), g.num_nodes());
}

TEST(LineGraph, SingleChain) {
  ResidueGraph g;
  g.coords = {{0, 0, 0}, {3.8, 0, 0}, {3.8, 3.8, 0}};
  g.residue_types = {0, 0, 0};
  g.num_relations = 7;
  g.edges = {{0, 1, 3}, {1, 2, 3}};
  const LineGraph lg = build_line_graph(g);
  ASSERT_EQ(lg.num_nodes(), 2u);
  ASSERT_EQ(lg.edges.size(), 1u);
  EXPECT_EQ(lg.edges[0].src, lg.node_of_edge[0]);
  EXPECT_EQ(lg.edges[0].dst, lg.node_of_edge[1]);
  // Right angle at node 1 -> bin 4 of 8.
  EXPECT_EQ(lg.edges[0].relation, 4);
}

TEST(LineGraph, BacktrackingExcluded) {
  ResidueGraph g;
  g.coords = {{0, 0, 0}, {3.8, 0, 0}};
  g.residue_types = {0, 0};
  g.num_relations = 7;
  g.edges = {{0, 1, 3}, {1, 0, 1}};
  const LineGraph lg = build_line_graph(g);
  EXPECT_EQ(lg.num_nodes(), 2u);
  EXPECT_TRUE(lg.edges.empty());
}

TEST(LineGraph, SelfLoopsExcluded) {
  ResidueGraph g;
  g.coords = {{0, 0, 0}, {3.8, 0, 0}};
  g.residue_types = {0, 0};
  g.num_relations = 7;
  g.edges = {{0, 0, 2}, {0, 1, 3}, {1, 1, 2}};
  const LineGraph lg = build_line_graph(g);
  EXPECT_EQ(lg.num_nodes(), 1u);
  EXPECT_EQ(lg.node_of_edge[0], -1);
  EXPECT_EQ(lg.node_of_edge[1], 0);
  EXPECT_EQ(lg.node_of_edge[2], -1);
  EXPECT_TRUE(lg.edges.empty());
}

TEST(LineGraph, MatchesBruteForceOracle) {
  Rng rng(149);
  for (int rep = 0; rep < 25; ++rep) {
    const std::size_t n = 2 + rng.bounded(24);
    const ProteinStructure s = test::random_protein_in_box(n, 25.0, rng);
    ResidueGraph g = build_graph(s);
    if (g.num_edges() > 200) {
      // Thin the edge list to stay in the small-m regime the oracle targets.
      Rng thin(rep);
      g = mask_edges(g, thin, 0.6);
    }
    const LineGraph lg = build_line_graph(g);
    EXPECT_EQ(line_graph_as_edge_triples(lg), line_graph_oracle(g, GraphConfig{}));
  }
}

TEST(StochasticOps, SeedDeterminism) {
  Rng rng(151);
  const ResidueGraph g = build_graph(test::random_protein(60, rng));
  for (std::uint64_t seed : {1ull, 42ull, 999ull}) {
    Rng a(seed), b(seed);
    EXPECT_EQ(edge_set(crop_subsequence(g, a, 20)), edge_set(crop_subsequence(g, b, 20)));
    Rng c(seed), d(seed);
    EXPECT_EQ(edge_set(crop_subspace(g, c, 12.0)), edge_set(crop_subspace(g, d, 12.0)));
    Rng e(seed), f(seed);
    EXPECT_EQ(edge_set(mask_edges(g, e, 0.3)), edge_set(mask_edges(g, f, 0.3)));
  }
}

TEST(GraphConfig, Validation) {
  GraphConfig bad;
  bad.d_seq = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.d_radius = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.k = 0;
  EXPECT_THROW(bad.validate(), ConfigError);
  bad = {};
  bad.d_long = -1;
  EXPECT_THROW(bad.validate(), ConfigError);
}

}  // namespace
}  // namespace gearnetk
