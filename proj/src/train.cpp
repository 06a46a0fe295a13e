//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/train.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gearnetk/parallel.hpp"

namespace gearnetk {

PretrainMethod pretrain_method_from_string(const std::string& s) {
  if (s == "multiview_contrast") return PretrainMethod::kMultiviewContrast;
  if (s == "residue_type") return PretrainMethod::kResidueType;
  if (s == "distance") return PretrainMethod::kDistance;
  if (s == "angle") return PretrainMethod::kAngle;
  if (s == "dihedral") return PretrainMethod::kDihedral;
  std::string names;
  for (const std::string& n : pretrain_method_names()) names += (names.empty() ? "" : "|") + n;
  throw ConfigError("unknown pretraining method '" + s + "' (expected " + names + ")");
}

std::string to_string(PretrainMethod m) {
  switch (m) {
    case PretrainMethod::kMultiviewContrast: return "multiview_contrast";
    case PretrainMethod::kResidueType: return "residue_type";
    case PretrainMethod::kDistance: return "distance";
    case PretrainMethod::kAngle: return "angle";
    case PretrainMethod::kDihedral: return "dihedral";
  }
  return "?";
}

std::vector<std::string> pretrain_method_names() {
  return {"multiview_contrast", "residue_type", "distance", "angle", "dihedral"};
}

void init_pretrain_heads(PretrainMethod method, const EncoderConfig& enc,
                         const ContrastiveConfig& contrastive, ParameterStore& store,
                         Rng& rng) {
  switch (method) {
    case PretrainMethod::kMultiviewContrast:
      init_projection_head(enc, contrastive, store, rng);
      break;
    case PretrainMethod::kResidueType: init_residue_head(enc, store, rng); break;
    case PretrainMethod::kDistance: init_distance_head(enc, store, rng); break;
    case PretrainMethod::kAngle: init_angle_head(enc, store, rng); break;
    case PretrainMethod::kDihedral: init_dihedral_head(enc, store, rng); break;
  }
}

PretrainResult run_pretraining(const std::vector<DatasetRecord>& dataset,
                               const EncoderConfig& enc, const PretrainConfig& cfg,
                               ParameterStore& params) {
  if (dataset.empty()) throw EmptyDataset("pretraining: empty dataset");
  const std::size_t count = dataset.size();

  std::vector<ResidueGraph> graphs;
  graphs.reserve(count);
  for (const DatasetRecord& rec : dataset) graphs.push_back(build_graph(rec.structure, cfg.graph));

  const Rng root(cfg.seed);
  Rng shuffle_rng = root.stream("shuffle");
  const Rng sample_root = root.stream("sample");
  const Rng view_root = root.stream("views");

  Optimizer optimizer(cfg.optimizer);
  PretrainResult result;

  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, count));
  std::vector<std::size_t> order(count);
  std::iota(order.begin(), order.end(), std::size_t{0});

  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(order);
    for (std::size_t begin = 0; begin < count; begin += batch) {
      if (cfg.max_steps > 0 && step >= cfg.max_steps) return result;
      const std::size_t end = std::min(begin + batch, count);
      ++step;

      Tape tape;
      Tape::Id batch_loss = 0;
      if (cfg.method == PretrainMethod::kMultiviewContrast) {
        std::vector<const ResidueGraph*> views;
        for (std::size_t b = begin; b < end; ++b) views.push_back(&graphs[order[b]]);
        Rng step_rng = view_root.stream(step);
        batch_loss =
            multiview_contrast_loss(tape, views, step_rng, cfg.contrastive, enc, params,
                                    Mode::kTrain)
                .loss;
      } else {
        const double inv = 1.0 / static_cast<double>(end - begin);
        bool first = true;
        for (std::size_t b = begin; b < end; ++b) {
          const std::size_t p = order[b];
          // Per-protein stream, fixed across steps: the samples a protein
          // contributes are its training samples for the whole run.
          Rng rng = sample_root.stream(p);
          Tape::Id loss = 0;
          switch (cfg.method) {
            case PretrainMethod::kResidueType:
              loss = loss_residue_type(tape, graphs[p], rng, cfg.selfpred, enc, params,
                                       Mode::kTrain)
                         .loss;
              break;
            case PretrainMethod::kDistance:
              loss = loss_distance(tape, graphs[p], rng, cfg.selfpred, enc, params,
                                   Mode::kTrain)
                         .loss;
              break;
            case PretrainMethod::kAngle:
              loss = loss_angle(tape, graphs[p], rng, cfg.selfpred, enc, params, Mode::kTrain)
                         .loss;
              break;
            case PretrainMethod::kDihedral:
              loss = loss_dihedral(tape, graphs[p], rng, cfg.selfpred, enc, params,
                                   Mode::kTrain)
                         .loss;
              break;
            default: break;
          }
          Tape::Id scaled = tape.scale(loss, inv);
          batch_loss = first ? scaled : tape.add(batch_loss, scaled);
          first = false;
        }
      }
      tape.backward(batch_loss);
      optimizer.step(params);
      result.trace.push_back({step, tape.value(batch_loss).item()});
    }
  }
  return result;
}

// --------------------------------------------------------------------------
// Downstream fine-tuning
// --------------------------------------------------------------------------

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "multilabel") return TaskKind::kMultilabel;
  if (s == "multiclass") return TaskKind::kMulticlass;
  throw ConfigError("unknown task kind '" + s + "' (expected multilabel|multiclass)");
}

namespace {

Tensor glorot(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor t({fan_in, fan_out});
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-limit, limit);
  return t;
}

std::size_t label_width(const std::vector<DatasetRecord>& dataset) {
  std::size_t width = 0;
  for (const DatasetRecord& rec : dataset) {
    if (!rec.labels) throw SchemaError("record '" + rec.structure.id + "' has no labels");
    if (width == 0) width = rec.labels->size();
    if (rec.labels->size() != width)
      throw SchemaError("record '" + rec.structure.id + "' has inconsistent label width");
  }
  if (width == 0) throw SchemaError("dataset has zero-width labels");
  return width;
}

}  // namespace

int multiclass_label(const DatasetRecord& record) {
  if (!record.labels) throw SchemaError("record '" + record.structure.id + "' has no labels");
  int label = -1;
  for (std::size_t i = 0; i < record.labels->size(); ++i) {
    if ((*record.labels)[i]) {
      if (label >= 0)
        throw SchemaError("record '" + record.structure.id +
                          "' has multiple set bits for a multiclass task");
      label = static_cast<int>(i);
    }
  }
  if (label < 0)
    throw SchemaError("record '" + record.structure.id + "' has no set label bit");
  return label;
}

void init_task_head(const EncoderConfig& enc, std::size_t num_terms, ParameterStore& store,
                    Rng& rng) {
  const auto d = static_cast<std::size_t>(enc.output_dim());
  store.add("head.task.l1.W", glorot(d, d, rng));
  store.add("head.task.l1.b", Tensor::zeros({d}));
  store.add("head.task.l2.W", glorot(d, d, rng));
  store.add("head.task.l2.b", Tensor::zeros({d}));
  store.add("head.task.l3.W", glorot(d, num_terms, rng));
  store.add("head.task.l3.b", Tensor::zeros({num_terms}));
}

Tape::Id task_head_forward(Tape& tape, Tape::Id x, ParameterStore& store) {
  Tape::Id h1 = tape.relu(tape.add_rowvec(tape.matmul(x, tape.param(store, "head.task.l1.W")),
                                          tape.param(store, "head.task.l1.b")));
  Tape::Id h2 = tape.relu(tape.add_rowvec(tape.matmul(h1, tape.param(store, "head.task.l2.W")),
                                          tape.param(store, "head.task.l2.b")));
  return tape.add_rowvec(tape.matmul(h2, tape.param(store, "head.task.l3.W")),
                         tape.param(store, "head.task.l3.b"));
}

namespace {

// Eval-mode graph representations for a list of graphs, parallel across
// proteins (eval mode only reads parameters).
std::vector<Tensor> eval_graph_logits(const std::vector<ResidueGraph>& graphs,
                                      const EncoderConfig& enc, ParameterStore& params) {
  std::vector<Tensor> out(graphs.size());
  parallel_for(graphs.size(), [&](std::size_t i) {
    Tape tape;
    const EncoderOutput repr =
        encoder_forward(tape, graphs[i], nullptr, enc, params, Mode::kEval);
    Tape::Id logits = task_head_forward(tape, repr.graph_repr, params);
    out[i] = tape.value(logits);
  });
  return out;
}

double validation_metric(const std::vector<ResidueGraph>& graphs,
                         const std::vector<const DatasetRecord*>& records, TaskKind kind,
                         std::size_t num_terms, const EncoderConfig& enc,
                         ParameterStore& params) {
  const std::vector<Tensor> logits = eval_graph_logits(graphs, enc, params);
  if (kind == TaskKind::kMulticlass) {
    Tensor all({logits.size(), num_terms});
    std::vector<int> labels(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
      std::copy(logits[i].data(), logits[i].data() + num_terms, all.data() + i * num_terms);
      labels[i] = multiclass_label(*records[i]);
    }
    return accuracy(all, labels);
  }
  PredictionTable table;
  table.num_proteins = logits.size();
  table.num_terms = num_terms;
  table.scores.resize(logits.size() * num_terms);
  table.truth.resize(logits.size() * num_terms);
  for (std::size_t i = 0; i < logits.size(); ++i)
    for (std::size_t t = 0; t < num_terms; ++t) {
      table.scores[i * num_terms + t] = 1.0 / (1.0 + std::exp(-logits[i][t]));
      table.truth[i * num_terms + t] = (*records[i]->labels)[t];
    }
  return fmax(table);
}

}  // namespace

TrainResult train_task(const std::vector<DatasetRecord>& dataset, const EncoderConfig& enc,
                       ParameterStore& params, TaskKind kind, const TrainConfig& cfg) {
  if (dataset.empty()) throw EmptyDataset("train_task: empty dataset");
  const std::size_t num_terms = label_width(dataset);

  std::vector<ResidueGraph> graphs;
  graphs.reserve(dataset.size());
  for (const DatasetRecord& rec : dataset) graphs.push_back(build_graph(rec.structure, cfg.graph));

  // Seeded validation split; an empty split validates on the training set.
  const Rng root(cfg.seed);
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng split_rng = root.stream("split");
  split_rng.shuffle(order);
  const std::size_t val_count =
      static_cast<std::size_t>(cfg.val_fraction * static_cast<double>(dataset.size()));
  std::vector<std::size_t> val_idx(order.begin(), order.begin() + val_count);
  std::vector<std::size_t> train_idx(order.begin() + val_count, order.end());
  if (train_idx.empty()) train_idx = order;
  if (val_idx.empty()) val_idx = train_idx;

  std::vector<ResidueGraph> val_graphs;
  std::vector<const DatasetRecord*> val_records;
  for (std::size_t i : val_idx) {
    val_graphs.push_back(graphs[i]);
    val_records.push_back(&dataset[i]);
  }

  Optimizer optimizer(cfg.optimizer);
  Rng shuffle_rng = root.stream("shuffle");
  const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, train_idx.size()));

  TrainResult result;
  result.best_metric = -1.0;
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    shuffle_rng.shuffle(train_idx);
    double loss_sum = 0.0;
    for (std::size_t begin = 0; begin < train_idx.size(); begin += batch) {
      const std::size_t end = std::min(begin + batch, train_idx.size());
      Tape tape;
      Tape::Id batch_loss = 0;
      const double inv = 1.0 / static_cast<double>(end - begin);
      for (std::size_t b = begin; b < end; ++b) {
        const std::size_t p = train_idx[b];
        const EncoderOutput repr =
            encoder_forward(tape, graphs[p], nullptr, enc, params, Mode::kTrain);
        Tape::Id logits = task_head_forward(tape, repr.graph_repr, params);
        Tape::Id loss;
        if (kind == TaskKind::kMulticlass) {
          loss = tape.cross_entropy(logits, {multiclass_label(dataset[p])});
        } else {
          Tensor targets({num_terms});
          for (std::size_t t = 0; t < num_terms; ++t)
            targets[t] = (*dataset[p].labels)[t];
          loss = tape.bce_with_logits(logits, std::move(targets));
        }
        loss_sum += tape.value(loss).item();
        Tape::Id scaled = tape.scale(loss, inv);
        batch_loss = b == begin ? scaled : tape.add(batch_loss, scaled);
      }
      tape.backward(batch_loss);
      optimizer.step(params);
    }
    const double epoch_loss = loss_sum / static_cast<double>(train_idx.size());
    const double metric = validation_metric(val_graphs, val_records, kind, num_terms, enc,
                                            params);
    result.log.push_back({epoch + 1, epoch_loss, metric});
    if (metric > result.best_metric) {
      result.best_metric = metric;
      result.best_params = params;
    }
  }
  return result;
}

PredictionTable predict_table(const std::vector<DatasetRecord>& dataset,
                              const EncoderConfig& enc, const GraphConfig& graph,
                              ParameterStore& params) {
  if (dataset.empty()) throw EmptyDataset("predict_table: empty dataset");
  const std::size_t num_terms = label_width(dataset);
  std::vector<ResidueGraph> graphs;
  graphs.reserve(dataset.size());
  for (const DatasetRecord& rec : dataset) graphs.push_back(build_graph(rec.structure, graph));
  const std::vector<Tensor> logits = eval_graph_logits(graphs, enc, params);

  PredictionTable table;
  table.num_proteins = dataset.size();
  table.num_terms = num_terms;
  table.scores.resize(table.num_proteins * num_terms);
  table.truth.resize(table.num_proteins * num_terms);
  for (std::size_t i = 0; i < dataset.size(); ++i)
    for (std::size_t t = 0; t < num_terms; ++t) {
      table.scores[i * num_terms + t] = 1.0 / (1.0 + std::exp(-logits[i][t]));
      table.truth[i * num_terms + t] = (*dataset[i].labels)[t];
    }
  return table;
}

std::pair<Tensor, std::vector<int>> predict_logits(const std::vector<DatasetRecord>& dataset,
                                                   const EncoderConfig& enc,
                                                   const GraphConfig& graph,
                                                   ParameterStore& params) {
  if (dataset.empty()) throw EmptyDataset("predict_logits: empty dataset");
  const std::size_t num_terms = label_width(dataset);
  std::vector<ResidueGraph> graphs;
  graphs.reserve(dataset.size());
  for (const DatasetRecord& rec : dataset) graphs.push_back(build_graph(rec.structure, graph));
  const std::vector<Tensor> logits = eval_graph_logits(graphs, enc, params);

  Tensor all({dataset.size(), num_terms});
  std::vector<int> labels(dataset.size());
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    std::copy(logits[i].data(), logits[i].data() + num_terms, all.data() + i * num_terms);
    labels[i] = multiclass_label(dataset[i]);
  }
  return {std::move(all), std::move(labels)};
}

}  // namespace gearnetk
