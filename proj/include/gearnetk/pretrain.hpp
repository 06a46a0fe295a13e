//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <array>
#include <utility>
#include <vector>

#include "gearnetk/encoder.hpp"
#include "gearnetk/graph.hpp"

namespace gearnetk {

struct ContrastiveConfig {
  double temperature = 0.07;
  int projection_dim = 128;
  std::size_t crop_length = 50;
  double crop_radius = 15.0;  // angstrom
  double mask_rate = 0.15;
  std::size_t batch_size = 96;
  void validate() const;
};

struct SelfPredConfig {
  std::size_t num_masked_residues = 512;
  std::size_t num_distance_pairs = 256;
  std::size_t num_angle_triplets = 512;
  std::size_t num_dihedral_quadruples = 512;
  // Ablation variant: dihedrals of four random nodes instead of consecutive
  // edges. Off by default.
  bool dihedral_random_sampling = false;
  void validate() const;
};

enum class CropKind { kSubsequence, kSubspace };
enum class NoiseKind { kIdentity, kMaskEdges };

// One contrastive view: crop, then noise, as given.
ResidueGraph apply_view(const ResidueGraph& g, Rng& rng, const ContrastiveConfig& cfg,
                        CropKind crop, NoiseKind noise);

// Two independent stochastic views, each with crop and noise chosen
// uniformly at random.
std::pair<ResidueGraph, ResidueGraph> sample_views(const ResidueGraph& g, Rng& rng,
                                                   const ContrastiveConfig& cfg);

// InfoNCE over 2B projected embeddings laid out as rows [x_0..x_{B-1},
// y_0..y_{B-1}]; the positive of row i is row (i + B) mod 2B. For a pair
// (x, y) the loss is -log exp(sim(z_x,z_y)/tau) / sum_{k != x} exp(sim(z_y,
// z_k)/tau), averaged over both directions of every pair. sim is cosine
// similarity. Throws ZeroNormEmbedding on a zero-norm row.
Tape::Id info_nce_loss(Tape& tape, Tape::Id embeddings, double tau);

// Registration helpers for the heads used below ("proj", "head.residue",
// "head.distance", "head.angle", "head.dihedral").
void init_projection_head(const EncoderConfig& enc, const ContrastiveConfig& cfg,
                          ParameterStore& store, Rng& rng);
void init_residue_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng);
void init_distance_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng);
void init_angle_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng);
void init_dihedral_head(const EncoderConfig& enc, ParameterStore& store, Rng& rng);

// Multiview Contrast loss over a batch of graphs: two views per protein,
// encoder + projection head on each, then InfoNCE.
struct MultiviewBatchLoss {
  Tape::Id loss;
  Tape::Id embeddings;  // [2B x projection_dim]
};
MultiviewBatchLoss multiview_contrast_loss(Tape& tape, const std::vector<const ResidueGraph*>& batch,
                                           Rng& rng, const ContrastiveConfig& cfg,
                                           const EncoderConfig& enc, ParameterStore& store,
                                           Mode mode);

// Masked residue-type prediction. Samples nodes without replacement, feeds
// the graph with their types replaced by the unknown code, and scores an MLP
// head on the masked nodes' representations against the true types.
struct ResidueTypeLoss {
  Tape::Id loss;
  Tape::Id logits;                  // [k x 21]
  std::vector<std::size_t> masked;  // sampled node indices
  std::vector<int> targets;         // true residue types
};
ResidueTypeLoss loss_residue_type(Tape& tape, const ResidueGraph& g, Rng& rng,
                                  const SelfPredConfig& cfg, const EncoderConfig& enc,
                                  ParameterStore& store, Mode mode);

// Distance regression on removed edges. Throws NoEdges when the graph has no
// non-self-loop edge.
struct DistanceLoss {
  Tape::Id loss;
  Tape::Id predictions;               // [k]
  std::vector<std::size_t> edges;     // sampled edge indices into g.edges
  std::vector<double> targets;        // true distances, angstrom
  ResidueGraph encoded_graph;         // the pruned graph fed to the encoder
};
DistanceLoss loss_distance(Tape& tape, const ResidueGraph& g, Rng& rng,
                           const SelfPredConfig& cfg, const EncoderConfig& enc,
                           ParameterStore& store, Mode mode);

// Angle-bin classification on removed adjacent edge pairs (i,j),(j,k).
// Throws NoAdjacentPairs when no nondegenerate pair exists.
struct AngleLoss {
  Tape::Id loss;
  Tape::Id logits;  // [k x num_angle_bins]
  std::vector<std::array<std::size_t, 3>> triplets;  // (i, j, k) node ids
  std::vector<int> targets;                          // angle bins
  ResidueGraph encoded_graph;
};
AngleLoss loss_angle(Tape& tape, const ResidueGraph& g, Rng& rng, const SelfPredConfig& cfg,
                     const EncoderConfig& enc, ParameterStore& store, Mode mode);

// Dihedral-bin classification on removed consecutive edge triplets
// (i,j),(j,k),(k,t). Throws NoTriplets when none exists.
struct DihedralLoss {
  Tape::Id loss;
  Tape::Id logits;
  std::vector<std::array<std::size_t, 4>> quadruples;
  std::vector<int> targets;
  ResidueGraph encoded_graph;
};
DihedralLoss loss_dihedral(Tape& tape, const ResidueGraph& g, Rng& rng,
                           const SelfPredConfig& cfg, const EncoderConfig& enc,
                           ParameterStore& store, Mode mode);

}  // namespace gearnetk
