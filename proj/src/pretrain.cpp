//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/pretrain.hpp"

#include <algorithm>
#include <set>

namespace gearnetk {

void ContrastiveConfig::validate() const {
  if (!(temperature > 0.0)) throw ConfigError("contrastive: temperature must be > 0");
  if (projection_dim < 1) throw ConfigError("contrastive: projection_dim must be >= 1");
  if (crop_length < 1) throw ConfigError("contrastive: crop_length must be >= 1");
  if (!(crop_radius > 0.0)) throw ConfigError("contrastive: crop_radius must be > 0");
  if (mask_rate < 0.0 || mask_rate > 1.0)
    throw ConfigError("contrastive: mask_rate must be in [0, 1]");
  if (batch_size < 2) throw ConfigError("contrastive: batch_size must be >= 2");
}

void SelfPredConfig::validate() const {
  if (num_masked_residues < 1 || num_distance_pairs < 1 || num_angle_triplets < 1 ||
      num_dihedral_quadruples < 1)
    throw ConfigError("self-prediction: sample counts must be >= 1");
}

ResidueGraph apply_view(const ResidueGraph& g, Rng& rng, const ContrastiveConfig& cfg,
                        CropKind crop, NoiseKind noise) {
  ResidueGraph view = crop == CropKind::kSubsequence
                          ? crop_subsequence(g, rng, cfg.crop_length)
                          : crop_subspace(g, rng, cfg.crop_radius);
  if (noise == NoiseKind::kMaskEdges) view = mask_edges(view, rng, cfg.mask_rate);
  return view;
}

std::pair<ResidueGraph, ResidueGraph> sample_views(const ResidueGraph& g, Rng& rng,
                                                   const ContrastiveConfig& cfg) {
  const auto one = [&]() {
    const CropKind crop = rng.bounded(2) ? CropKind::kSubspace : CropKind::kSubsequence;
    const NoiseKind noise = rng.bounded(2) ? NoiseKind::kMaskEdges : NoiseKind::kIdentity;
    return apply_view(g, rng, cfg, crop, noise);
  };
  ResidueGraph x = one();
  ResidueGraph y = one();
  return {std::move(x), std::move(y)};
}

Tape::Id info_nce_loss(Tape& tape, Tape::Id embeddings, double tau) {
  const Tensor& z = tape.value(embeddings);
  const std::size_t rows = z.rows();
  if (rows < 2 || rows % 2 != 0)
    throw ShapeMismatch("info_nce_loss: needs 2B embeddings with B >= 1");
  const std::size_t b = rows / 2;
  for (std::size_t i = 0; i < rows; ++i) {
    double nrm2 = 0.0;
    for (std::size_t c = 0; c < z.cols(); ++c) nrm2 += z.at(i, c) * z.at(i, c);
    if (nrm2 < 1e-24) throw ZeroNormEmbedding("info_nce_loss: zero-norm embedding row");
  }

  Tape::Id unit = tape.l2_normalize_rows(embeddings);
  Tape::Id sims = tape.scale(tape.matmul_nt(unit, unit), 1.0 / tau);

  // Row i carries the loss term whose numerator is the positive pair
  // (i, partner(i)) and whose denominator runs over k != partner(i).
  Tensor mask({rows, rows});
  mask.fill(1.0);
  std::vector<std::size_t> idx(rows), partner(rows);
  for (std::size_t i = 0; i < rows; ++i) {
    idx[i] = i;
    partner[i] = (i + b) % rows;
    mask.at(i, partner[i]) = 0.0;
  }
  Tape::Id lse = tape.logsumexp_rows_masked(sims, std::move(mask));
  Tape::Id positives = tape.select_entries(sims, idx, partner);
  return tape.mean_all(tape.sub(lse, positives));
}

namespace {

std::size_t head_input_dim(const EncoderConfig& enc) {
  return static_cast<std::size_t>(enc.output_dim());
}

// Remove the listed edge instances (by index) from g.
ResidueGraph remove_edges(const ResidueGraph& g, const std::set<std::size_t>& doomed) {
  ResidueGraph out;
  out.coords = g.coords;
  out.residue_types = g.residue_types;
  out.num_relations = g.num_relations;
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (!doomed.count(e)) out.edges.push_back(g.edges[e]);
  return out;
}

// Ordered pairs of adjacent non-self-loop edges (i,j),(j,k) with i != k and
// both legs above the degeneracy guard.
std::vector<std::pair<std::size_t, std::size_t>> adjacent_edge_pairs(const ResidueGraph& g) {
  std::vector<std::vector<std::size_t>> out_of(g.num_nodes());
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (g.edges[e].src != g.edges[e].dst)
      out_of[g.edges[e].src].push_back(e);
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t e1 = 0; e1 < g.num_edges(); ++e1) {
    const Edge& a = g.edges[e1];
    if (a.src == a.dst) continue;
    if (distance(g.coords[a.src], g.coords[a.dst]) <= kDegenerateEps) continue;
    for (std::size_t e2 : out_of[a.dst]) {
      const Edge& b = g.edges[e2];
      if (b.dst == a.src) continue;
      if (distance(g.coords[b.dst], g.coords[b.src]) <= kDegenerateEps) continue;
      pairs.push_back({e1, e2});
    }
  }
  return pairs;
}

}  // namespace

void init_projection_head(const EncoderConfig& enc, const ContrastiveConfig& cfg,
                          ParameterStore& store, Rng& rng) {
  init_mlp2(store, "proj", static_cast<int>(head_input_dim(enc)), cfg.projection_dim, rng);
}

void init_residue_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng) {
  init_mlp2(store, "head.residue", static_cast<int>(head_input_dim(enc)), kNumResidueTypes,
            rng);
}

void init_distance_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng) {
  init_mlp2(store, "head.distance", static_cast<int>(2 * head_input_dim(enc)), 1, rng);
}

void init_angle_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng) {
  init_mlp2(store, "head.angle", static_cast<int>(3 * head_input_dim(enc)),
            enc.num_angle_bins, rng);
}

void init_dihedral_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng) {
  init_mlp2(store, "head.dihedral", static_cast<int>(4 * head_input_dim(enc)),
            enc.num_angle_bins, rng);
}

MultiviewBatchLoss multiview_contrast_loss(Tape& tape,
                                           const std::vector<const ResidueGraph*>& batch,
                                           Rng& rng, const ContrastiveConfig& cfg,
                                           const EncoderConfig& enc, ParameterStore& store,
                                           Mode mode) {
  if (batch.empty()) throw EmptyDataset("multiview_contrast_loss: empty batch");
  std::vector<Tape::Id> x_rows, y_rows;
  for (const ResidueGraph* g : batch) {
    auto [vx, vy] = sample_views(*g, rng, cfg);
    x_rows.push_back(encoder_forward(tape, vx, nullptr, enc, store, mode, &rng).graph_repr);
    y_rows.push_back(encoder_forward(tape, vy, nullptr, enc, store, mode, &rng).graph_repr);
  }
  std::vector<Tape::Id> all = x_rows;
  all.insert(all.end(), y_rows.begin(), y_rows.end());
  Tape::Id stacked = tape.stack_rows(all);
  Tape::Id projected = mlp2_forward(tape, stacked, store, "proj");
  MultiviewBatchLoss out;
  out.embeddings = projected;
  out.loss = info_nce_loss(tape, projected, cfg.temperature);
  return out;
}

ResidueTypeLoss loss_residue_type(Tape& tape, const ResidueGraph& g, Rng& rng,
                                  const SelfPredConfig& cfg, const EncoderConfig& enc,
                                  ParameterStore& store, Mode mode) {
  const std::size_t n = g.num_nodes();
  if (n == 0) throw EmptyStructure("loss_residue_type: empty graph");
  const std::size_t k = std::min(cfg.num_masked_residues, n);

  ResidueTypeLoss out;
  out.masked = rng.sample_without_replacement(n, k);
  ResidueGraph masked = g;
  for (std::size_t i : out.masked) {
    out.targets.push_back(g.residue_types[i]);
    masked.residue_types[i] = kUnknownResidue;
  }
  const EncoderOutput repr = encoder_forward(tape, masked, nullptr, enc, store, mode, &rng);
  Tape::Id rows = tape.gather_rows(repr.node_repr, out.masked);
  out.logits = mlp2_forward(tape, rows, store, "head.residue");
  out.loss = tape.cross_entropy(out.logits, out.targets);
  return out;
}

DistanceLoss loss_distance(Tape& tape, const ResidueGraph& g, Rng& rng,
                           const SelfPredConfig& cfg, const EncoderConfig& enc,
                           ParameterStore& store, Mode mode) {
  std::vector<std::size_t> candidates;
  for (std::size_t e = 0; e < g.num_edges(); ++e)
    if (g.edges[e].src != g.edges[e].dst) candidates.push_back(e);
  if (candidates.empty()) throw NoEdges("loss_distance: no non-self-loop edges");

  const std::size_t k = std::min(cfg.num_distance_pairs, candidates.size());
  DistanceLoss out;
  for (std::size_t pick : rng.sample_without_replacement(candidates.size(), k))
    out.edges.push_back(candidates[pick]);

  std::set<std::size_t> doomed(out.edges.begin(), out.edges.end());
  out.encoded_graph = remove_edges(g, doomed);

  std::vector<std::size_t> src, dst;
  for (std::size_t e : out.edges) {
    src.push_back(static_cast<std::size_t>(g.edges[e].src));
    dst.push_back(static_cast<std::size_t>(g.edges[e].dst));
    out.targets.push_back(distance(g.coords[g.edges[e].src], g.coords[g.edges[e].dst]));
  }
  const EncoderOutput repr =
      encoder_forward(tape, out.encoded_graph, nullptr, enc, store, mode, &rng);
  Tape::Id cat = tape.concat_cols(
      {tape.gather_rows(repr.node_repr, src), tape.gather_rows(repr.node_repr, dst)});
  out.predictions = mlp2_forward(tape, cat, store, "head.distance");
  out.loss = tape.mse(out.predictions, Tensor({k}, out.targets));
  return out;
}

AngleLoss loss_angle(Tape& tape, const ResidueGraph& g, Rng& rng, const SelfPredConfig& cfg,
                     const EncoderConfig& enc, ParameterStore& store, Mode mode) {
  const auto pairs = adjacent_edge_pairs(g);
  if (pairs.empty()) throw NoAdjacentPairs("loss_angle: no adjacent edge pairs");

  const std::size_t k = std::min(cfg.num_angle_triplets, pairs.size());
  AngleLoss out;
  std::set<std::size_t> doomed;
  const AngleBinning binning{enc.num_angle_bins};
  for (std::size_t pick : rng.sample_without_replacement(pairs.size(), k)) {
    const auto [e1, e2] = pairs[pick];
    const auto i = static_cast<std::size_t>(g.edges[e1].src);
    const auto j = static_cast<std::size_t>(g.edges[e1].dst);
    const auto kk = static_cast<std::size_t>(g.edges[e2].dst);
    out.triplets.push_back({i, j, kk});
    out.targets.push_back(
        angle_bin(angle_at(g.coords[i], g.coords[j], g.coords[kk]), binning));
    doomed.insert(e1);
    doomed.insert(e2);
  }
  out.encoded_graph = remove_edges(g, doomed);

  std::vector<std::size_t> ri, rj, rk;
  for (const auto& t : out.triplets) {
    ri.push_back(t[0]);
    rj.push_back(t[1]);
    rk.push_back(t[2]);
  }
  const EncoderOutput repr =
      encoder_forward(tape, out.encoded_graph, nullptr, enc, store, mode, &rng);
  Tape::Id cat = tape.concat_cols({tape.gather_rows(repr.node_repr, ri),
                                   tape.gather_rows(repr.node_repr, rj),
                                   tape.gather_rows(repr.node_repr, rk)});
  out.logits = mlp2_forward(tape, cat, store, "head.angle");
  out.loss = tape.cross_entropy(out.logits, out.targets);
  return out;
}

DihedralLoss loss_dihedral(Tape& tape, const ResidueGraph& g, Rng& rng,
                           const SelfPredConfig& cfg, const EncoderConfig& enc,
                           ParameterStore& store, Mode mode) {
  const AngleBinning binning{enc.num_angle_bins};
  DihedralLoss out;
  std::set<std::size_t> doomed;

  const auto nondegenerate = [&](std::size_t i, std::size_t j, std::size_t k,
                                 std::size_t t) {
    const Vec3 b1 = g.coords[j] - g.coords[i];
    const Vec3 b2 = g.coords[k] - g.coords[j];
    const Vec3 b3 = g.coords[t] - g.coords[k];
    return norm(cross(b1, b2)) > kDegenerateEps && norm(cross(b2, b3)) > kDegenerateEps;
  };

  if (cfg.dihedral_random_sampling) {
    // Ablation: four random distinct nodes, nothing removed from the graph.
    const std::size_t n = g.num_nodes();
    if (n < 4) throw NoTriplets("loss_dihedral: fewer than four nodes");
    std::size_t attempts = 0;
    while (out.quadruples.size() < cfg.num_dihedral_quadruples &&
           attempts < cfg.num_dihedral_quadruples * 20) {
      ++attempts;
      const auto pick = rng.sample_without_replacement(n, 4);
      if (!nondegenerate(pick[0], pick[1], pick[2], pick[3])) continue;
      out.quadruples.push_back({pick[0], pick[1], pick[2], pick[3]});
    }
    if (out.quadruples.empty())
      throw NoTriplets("loss_dihedral: no nondegenerate random quadruple found");
    out.encoded_graph = g;
  } else {
    // Consecutive edge triplets (i,j),(j,k),(k,t) with i != k and j != t.
    std::vector<std::vector<std::size_t>> out_of(g.num_nodes());
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      if (g.edges[e].src != g.edges[e].dst)
        out_of[g.edges[e].src].push_back(e);

    std::vector<std::array<std::size_t, 3>> triplets;  // edge index triplets
    for (std::size_t e1 = 0; e1 < g.num_edges(); ++e1) {
      const Edge& a = g.edges[e1];
      if (a.src == a.dst) continue;
      for (std::size_t e2 : out_of[a.dst]) {
        const Edge& b = g.edges[e2];
        if (b.dst == a.src) continue;
        for (std::size_t e3 : out_of[b.dst]) {
          const Edge& c = g.edges[e3];
          if (c.dst == b.src) continue;
          if (!nondegenerate(a.src, a.dst, b.dst, c.dst)) continue;
          triplets.push_back({e1, e2, e3});
        }
      }
    }
    if (triplets.empty()) throw NoTriplets("loss_dihedral: no consecutive edge triplets");

    const std::size_t k = std::min(cfg.num_dihedral_quadruples, triplets.size());
    for (std::size_t pick : rng.sample_without_replacement(triplets.size(), k)) {
      const auto [e1, e2, e3] = triplets[pick];
      out.quadruples.push_back({static_cast<std::size_t>(g.edges[e1].src),
                                static_cast<std::size_t>(g.edges[e1].dst),
                                static_cast<std::size_t>(g.edges[e2].dst),
                                static_cast<std::size_t>(g.edges[e3].dst)});
      doomed.insert(e1);
      doomed.insert(e2);
      doomed.insert(e3);
    }
    out.encoded_graph = remove_edges(g, doomed);
  }

  std::vector<std::size_t> ri, rj, rk, rt;
  for (const auto& q : out.quadruples) {
    out.targets.push_back(angle_bin(
        dihedral(g.coords[q[0]], g.coords[q[1]], g.coords[q[2]], g.coords[q[3]]), binning));
    ri.push_back(q[0]);
    rj.push_back(q[1]);
    rk.push_back(q[2]);
    rt.push_back(q[3]);
  }
  const EncoderOutput repr =
      encoder_forward(tape, out.encoded_graph, nullptr, enc, store, mode, &rng);
  Tape::Id cat = tape.concat_cols(
      {tape.gather_rows(repr.node_repr, ri), tape.gather_rows(repr.node_repr, rj),
       tape.gather_rows(repr.node_repr, rk), tape.gather_rows(repr.node_repr, rt)});
  out.logits = mlp2_forward(tape, cat, store, "head.dihedral");
  out.loss = tape.cross_entropy(out.logits, out.targets);
  return out;
}

}  // namespace gearnetk
