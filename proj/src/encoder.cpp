//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/encoder.hpp"

#include <cmath>

namespace gearnetk {

void EncoderConfig::validate() const {
  if (num_layers < 1) throw ConfigError("encoder: num_layers must be >= 1");
  if (hidden_dim < 1) throw ConfigError("encoder: hidden_dim must be >= 1");
  if (edge_hidden_dim < 0) throw ConfigError("encoder: edge_hidden_dim must be >= 0");
  if (dropout < 0.0 || dropout >= 1.0) throw ConfigError("encoder: dropout must be in [0, 1)");
  if (num_relations < 1 || num_angle_bins < 1)
    throw ConfigError("encoder: relation counts must be >= 1");
}

std::pair<Tensor, Tensor> featurize(const ResidueGraph& g, const EncoderConfig& cfg) {
  const std::size_t n = g.num_nodes();
  const std::size_t m = g.num_edges();
  Tensor nodes({n, static_cast<std::size_t>(kNumResidueTypes)});
  for (std::size_t i = 0; i < n; ++i)
    nodes[i * kNumResidueTypes + static_cast<std::size_t>(g.residue_types[i])] = 1.0;

  const std::size_t width = static_cast<std::size_t>(cfg.edge_feature_dim());
  Tensor edges({m, width});
  for (std::size_t e = 0; e < m; ++e) {
    const Edge& ed = g.edges[e];
    double* row = edges.data() + e * width;
    row[g.residue_types[ed.src]] = 1.0;
    row[kNumResidueTypes + g.residue_types[ed.dst]] = 1.0;
    row[2 * kNumResidueTypes + ed.relation] = 1.0;
    row[width - 2] = std::abs(static_cast<double>(ed.dst) - static_cast<double>(ed.src));
    row[width - 1] = distance(g.coords[ed.src], g.coords[ed.dst]);
  }
  return {std::move(nodes), std::move(edges)};
}

namespace {

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

void init_bn(ParameterStore& store, const std::string& prefix, std::size_t d) {
  Tensor ones({d});
  ones.fill(1.0);
  store.add(prefix + ".scale", ones);
  store.add(prefix + ".shift", Tensor::zeros({d}));
  store.add(prefix + ".mean", Tensor::zeros({d}), /*trainable=*/false);
  Tensor var({d});
  var.fill(1.0);
  store.add(prefix + ".var", var, /*trainable=*/false);
}

BatchNormState bn_state(ParameterStore& store, const std::string& prefix, Mode mode) {
  BatchNormState st;
  st.running_mean = &store.value(prefix + ".mean");
  st.running_var = &store.value(prefix + ".var");
  st.mode = mode;
  return st;
}

// One batch-norm application with parameters looked up by prefix.
Tape::Id apply_bn(Tape& tape, Tape::Id x, ParameterStore& store, const std::string& prefix,
                  Mode mode) {
  BatchNormState st = bn_state(store, prefix, mode);
  Tape::Id scale = tape.param(store, prefix + ".scale");
  Tape::Id shift = tape.param(store, prefix + ".shift");
  return tape.batch_norm(x, scale, shift, st);
}

struct RelationIndex {
  std::vector<std::size_t> edge_ids;
  std::vector<std::size_t> dst;
};

}  // namespace

void init_encoder_params(const EncoderConfig& cfg, ParameterStore& store, Rng& rng) {
  cfg.validate();
  const auto hidden = static_cast<std::size_t>(cfg.hidden_dim);
  const auto edge_hidden = static_cast<std::size_t>(cfg.edge_hidden());
  const auto edge_feat = static_cast<std::size_t>(cfg.edge_feature_dim());

  if (cfg.input_projection) {
    store.add("input_proj.W", glorot_uniform(kNumResidueTypes, hidden, rng));
    init_bn(store, "input_proj.bn", hidden);
  }
  for (int l = 0; l < cfg.num_layers; ++l) {
    const auto d_in = static_cast<std::size_t>(cfg.layer_input_dim(l));
    const std::string layer = "layer" + std::to_string(l);
    for (int r = 0; r < cfg.num_relations; ++r)
      store.add(layer + ".rel" + std::to_string(r) + ".W",
                glorot_uniform(d_in, hidden, rng));
    init_bn(store, layer + ".bn", hidden);
    if (cfg.use_edge_mp) {
      const std::size_t e_in = l == 0 ? edge_feat : edge_hidden;
      const std::string elayer = "edge_layer" + std::to_string(l);
      for (int a = 0; a < cfg.num_angle_bins; ++a)
        store.add(elayer + ".bin" + std::to_string(a) + ".W",
                  glorot_uniform(e_in, edge_hidden, rng));
      init_bn(store, elayer + ".bn", edge_hidden);
      const std::string fc = "edge_fc" + std::to_string(l);
      store.add(fc + ".W", glorot_uniform(edge_hidden, d_in, rng));
      store.add(fc + ".Wself", glorot_uniform(edge_feat, d_in, rng));
    }
  }
}

EncoderOutput encoder_forward(Tape& tape, const ResidueGraph& g, const LineGraph* lg,
                              const EncoderConfig& cfg, ParameterStore& store, Mode mode,
                              Rng* dropout_rng) {
  cfg.validate();
  const std::size_t n = g.num_nodes();
  if (n == 0) throw EmptyStructure("encoder_forward: empty graph");
  if (!store.has("layer0.rel0.W"))
    throw UninitializedParams("encoder parameters not initialized for this config");
  if (cfg.dropout > 0.0 && mode == Mode::kTrain && !dropout_rng)
    throw ConfigError("encoder_forward: dropout requires an RNG in train mode");

  auto [node_feat, edge_feat] = featurize(g, cfg);
  const Tape::Id f_nodes = tape.constant(std::move(node_feat));
  const Tape::Id f_edges = tape.constant(std::move(edge_feat));

  // Per-relation incoming-edge index.
  std::vector<RelationIndex> by_rel(static_cast<std::size_t>(cfg.num_relations));
  std::vector<std::size_t> src_all(g.num_edges());
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    const Edge& ed = g.edges[e];
    if (ed.relation >= cfg.num_relations)
      throw IndexOutOfRange("encoder_forward: edge relation exceeds config");
    by_rel[ed.relation].edge_ids.push_back(e);
    by_rel[ed.relation].dst.push_back(static_cast<std::size_t>(ed.dst));
    src_all[e] = static_cast<std::size_t>(ed.src);
  }

  // Line graph and edge-message bookkeeping (GearNet-Edge only).
  LineGraph local_lg;
  const LineGraph* line = lg;
  std::vector<std::size_t> self_edges;
  std::vector<std::vector<std::size_t>> lg_src_by_rel, lg_dst_by_rel;
  if (cfg.use_edge_mp) {
    if (!line) {
      GraphConfig gc;
      gc.num_angle_bins = cfg.num_angle_bins;
      local_lg = build_line_graph(g, gc);
      line = &local_lg;
    }
    for (std::size_t e = 0; e < g.num_edges(); ++e)
      if (g.edges[e].src == g.edges[e].dst) self_edges.push_back(e);
    lg_src_by_rel.resize(static_cast<std::size_t>(cfg.num_angle_bins));
    lg_dst_by_rel.resize(static_cast<std::size_t>(cfg.num_angle_bins));
    for (const Edge& le : line->edges) {
      if (le.relation >= cfg.num_angle_bins)
        throw IndexOutOfRange("encoder_forward: angle bin exceeds config");
      lg_src_by_rel[le.relation].push_back(static_cast<std::size_t>(le.src));
      lg_dst_by_rel[le.relation].push_back(static_cast<std::size_t>(le.dst));
    }
  }

  // h^(0)
  Tape::Id h;
  if (cfg.input_projection) {
    Tape::Id w = tape.param(store, "input_proj.W");
    h = apply_bn(tape, tape.matmul(f_nodes, w), store, "input_proj.bn", mode);
  } else {
    h = f_nodes;
  }

  // m^(0): raw features of the non-self-loop edges, in line-graph node order.
  Tape::Id msg = 0;
  bool has_line_nodes = false;
  std::vector<std::size_t> line_node_edges;
  if (cfg.use_edge_mp && line->num_nodes() > 0) {
    line_node_edges.resize(line->num_nodes());
    for (std::size_t v = 0; v < line->num_nodes(); ++v)
      line_node_edges[v] = static_cast<std::size_t>(line->edge_of_node[v]);
    msg = tape.gather_rows(f_edges, line_node_edges);
    has_line_nodes = true;
  }

  std::vector<Tape::Id> layer_outputs;
  for (int l = 0; l < cfg.num_layers; ++l) {
    const std::string layer = "layer" + std::to_string(l);
    const std::size_t d_in = static_cast<std::size_t>(cfg.layer_input_dim(l));

    // Edge message update for this layer.
    if (cfg.use_edge_mp && has_line_nodes) {
      const std::string elayer = "edge_layer" + std::to_string(l);
      const std::size_t m_nodes = line->num_nodes();
      Tape::Id pre = 0;
      bool first = true;
      for (int a = 0; a < cfg.num_angle_bins; ++a) {
        Tape::Id w = tape.param(store, elayer + ".bin" + std::to_string(a) + ".W");
        Tape::Id agg;
        if (lg_src_by_rel[a].empty()) {
          agg = tape.constant(
              Tensor::zeros({m_nodes, static_cast<std::size_t>(tape.value(w).rows())}));
        } else {
          agg = tape.scatter_sum_rows(tape.gather_rows(msg, lg_src_by_rel[a]),
                                      lg_dst_by_rel[a], m_nodes);
        }
        Tape::Id term = tape.matmul(agg, w);
        pre = first ? term : tape.add(pre, term);
        first = false;
      }
      msg = tape.relu(apply_bn(tape, pre, store, elayer + ".bn", mode));
    }

    // Per-edge neighbor contributions: h_j, plus FC(m) for GearNet-Edge.
    Tape::Id contrib = tape.gather_rows(h, src_all);
    if (cfg.use_edge_mp && !g.edges.empty()) {
      const std::string fc = "edge_fc" + std::to_string(l);
      Tape::Id fc_rows = 0;
      bool have = false;
      if (has_line_nodes) {
        Tape::Id w = tape.param(store, fc + ".W");
        Tape::Id proj = tape.matmul(msg, w);  // [m' x d_in]
        fc_rows = tape.scatter_sum_rows(proj, line_node_edges, g.num_edges());
        have = true;
      }
      if (!self_edges.empty()) {
        Tape::Id wself = tape.param(store, fc + ".Wself");
        Tape::Id proj = tape.matmul(tape.gather_rows(f_edges, self_edges), wself);
        Tape::Id placed = tape.scatter_sum_rows(proj, self_edges, g.num_edges());
        fc_rows = have ? tape.add(fc_rows, placed) : placed;
        have = true;
      }
      if (have) contrib = tape.add(contrib, fc_rows);
    }

    // Relational aggregation.
    Tape::Id pre = 0;
    bool first = true;
    for (int r = 0; r < cfg.num_relations; ++r) {
      Tape::Id w = tape.param(store, layer + ".rel" + std::to_string(r) + ".W");
      Tape::Id agg;
      if (by_rel[r].edge_ids.empty()) {
        agg = tape.constant(Tensor::zeros({n, d_in}));
      } else {
        agg = tape.scatter_sum_rows(tape.gather_rows(contrib, by_rel[r].edge_ids),
                                    by_rel[r].dst, n);
      }
      Tape::Id term = tape.matmul(agg, w);
      pre = first ? term : tape.add(pre, term);
      first = false;
    }
    Tape::Id u = tape.relu(apply_bn(tape, pre, store, layer + ".bn", mode));
    if (cfg.dropout > 0.0) u = tape.dropout(u, cfg.dropout, *dropout_rng, mode);

    // Residual whenever the shapes line up.
    h = d_in == static_cast<std::size_t>(cfg.hidden_dim) ? tape.add(h, u) : u;
    layer_outputs.push_back(h);
  }

  EncoderOutput out;
  out.node_repr = layer_outputs.size() == 1 ? layer_outputs[0]
                                            : tape.concat_cols(layer_outputs);
  out.graph_repr = tape.row_sum(out.node_repr);
  return out;
}

void init_mlp2(ParameterStore& store, const std::string& prefix, int in_dim, int out_dim,
               Rng& rng) {
  const auto in = static_cast<std::size_t>(in_dim);
  const auto out = static_cast<std::size_t>(out_dim);
  store.add(prefix + ".l1.W", glorot_uniform(in, in, rng));
  store.add(prefix + ".l1.b", Tensor::zeros({in}));
  store.add(prefix + ".l2.W", glorot_uniform(in, out, rng));
  store.add(prefix + ".l2.b", Tensor::zeros({out}));
}

Tape::Id mlp2_forward(Tape& tape, Tape::Id x, ParameterStore& store,
                      const std::string& prefix) {
  Tape::Id h = tape.relu(tape.add_rowvec(tape.matmul(x, tape.param(store, prefix + ".l1.W")),
                                         tape.param(store, prefix + ".l1.b")));
  return tape.add_rowvec(tape.matmul(h, tape.param(store, prefix + ".l2.W")),
                         tape.param(store, prefix + ".l2.b"));
}

}  // namespace gearnetk
