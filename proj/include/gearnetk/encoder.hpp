//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <optional>
#include <string>
#include <utility>

#include "gearnetk/graph.hpp"
#include "gearnetk/tensor.hpp"

namespace gearnetk {

struct EncoderConfig {
  int num_layers = 6;
  int hidden_dim = 512;
  int edge_hidden_dim = 0;  // 0 means hidden_dim
  bool use_edge_mp = false; // relational conv only vs. edge message passing
  bool input_projection = true;
  double dropout = 0.0;
  int num_relations = 7;
  int num_angle_bins = 8;

  int edge_hidden() const { return edge_hidden_dim > 0 ? edge_hidden_dim : hidden_dim; }
  int edge_feature_dim() const { return 2 * kNumResidueTypes + num_relations + 2; }
  // Node-layer input width; layers 1..L-1 always take hidden_dim.
  int layer_input_dim(int layer) const {
    return layer == 0 && !input_projection ? kNumResidueTypes : hidden_dim;
  }
  // Per-layer concatenated readout width.
  int output_dim() const { return num_layers * hidden_dim; }
  void validate() const;
};

// One-hot node features [n x 21] and edge features
// [m x (21 + 21 + num_relations + 2)]: Cat(f_i, f_j, onehot(r), |i-j|, dist).
std::pair<Tensor, Tensor> featurize(const ResidueGraph& g, const EncoderConfig& cfg);

// Registers every encoder tensor in `store` under the checkpoint naming
// convention ("layer{l}.rel{r}.W", "layer{l}.bn.{mean|var|scale|shift}",
// "edge_layer{l}.bin{a}.W", "edge_fc{l}.W" / ".Wself", "input_proj.*").
// Kernels are Glorot-uniform, BN scale 1 / shift 0, running stats 0 / 1.
void init_encoder_params(const EncoderConfig& cfg, ParameterStore& store, Rng& rng);

struct EncoderOutput {
  Tape::Id node_repr;   // [n x output_dim], per-layer concatenation
  Tape::Id graph_repr;  // [output_dim], sum pooling over nodes
};

// Full forward pass on the tape. `lg` may be null; it is built on demand for
// edge message passing. `dropout_rng` is required when cfg.dropout > 0 and
// mode is kTrain. Throws UninitializedParams when `store` was not set up for
// this config.
EncoderOutput encoder_forward(Tape& tape, const ResidueGraph& g, const LineGraph* lg,
                              const EncoderConfig& cfg, ParameterStore& store, Mode mode,
                              Rng* dropout_rng = nullptr);

// Two-layer MLP head helpers (linear -> ReLU -> linear, with biases), used by
// the pretraining heads and the projection head. Registers
// "{prefix}.l1.W/.l1.b/.l2.W/.l2.b".
void init_mlp2(ParameterStore& store, const std::string& prefix, int in_dim, int out_dim,
               Rng& rng);
Tape::Id mlp2_forward(Tape& tape, Tape::Id x, ParameterStore& store, const std::string& prefix);

}  // namespace gearnetk
