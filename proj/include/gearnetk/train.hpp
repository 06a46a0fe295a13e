//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>
#include <vector>

#include "gearnetk/metrics.hpp"
#include "gearnetk/optim.hpp"
#include "gearnetk/pretrain.hpp"
#include "gearnetk/structure.hpp"

namespace gearnetk {

enum class PretrainMethod {
  kMultiviewContrast,
  kResidueType,
  kDistance,
  kAngle,
  kDihedral,
};
PretrainMethod pretrain_method_from_string(const std::string& s);
std::string to_string(PretrainMethod m);
std::vector<std::string> pretrain_method_names();

struct PretrainConfig {
  PretrainMethod method = PretrainMethod::kMultiviewContrast;
  ContrastiveConfig contrastive;
  SelfPredConfig selfpred;
  OptimizerConfig optimizer;      // Adam, lr 1e-3
  GraphConfig graph;
  std::size_t batch_size = 96;    // proteins per optimizer step
  std::size_t epochs = 50;
  std::size_t max_steps = 0;      // 0 = no cap
  std::uint64_t seed = 0;
};

struct StepLog {
  std::size_t step;
  double loss;
};

struct PretrainResult {
  std::vector<StepLog> trace;  // one row per optimizer step
};

// Registers the heads `method` needs (encoder params must already exist).
void init_pretrain_heads(PretrainMethod method, const EncoderConfig& enc,
                         const ContrastiveConfig& contrastive, ParameterStore& store,
                         Rng& rng);

// Seeded pretraining loop over the dataset. Graphs are built once up front.
// Self-prediction sampling streams are keyed per protein (fixed across
// steps); Multiview Contrast view sampling is keyed per step.
PretrainResult run_pretraining(const std::vector<DatasetRecord>& dataset,
                               const EncoderConfig& enc, const PretrainConfig& cfg,
                               ParameterStore& params);

// --------------------------------------------------------------------------
// Downstream fine-tuning
// --------------------------------------------------------------------------

enum class TaskKind { kMultilabel, kMulticlass };
TaskKind task_kind_from_string(const std::string& s);

struct TrainConfig {
  OptimizerConfig optimizer;
  GraphConfig graph;
  std::size_t batch_size = 8;
  std::size_t epochs = 10;
  double val_fraction = 0.1;  // seeded split; empty split falls back to train
  std::uint64_t seed = 0;
};

struct EpochLog {
  std::size_t epoch;
  double loss;        // dataset-mean training loss
  double val_metric;  // fmax (multilabel) or accuracy (multiclass)
};

struct TrainResult {
  std::vector<EpochLog> log;
  ParameterStore best_params;  // snapshot with the best validation metric
  double best_metric = 0.0;
};

// Three-layer MLP head from the encoder output to `num_terms` logits, under
// names "head.task.l{1,2,3}.{W,b}".
void init_task_head(const EncoderConfig& enc, std::size_t num_terms, ParameterStore& store,
                    Rng& rng);
Tape::Id task_head_forward(Tape& tape, Tape::Id x, ParameterStore& store);

// BCE-with-logits (multilabel) or CE (multiclass) fine-tuning with a seeded
// shuffle, per-epoch validation, and best-checkpoint retention. Throws
// EmptyDataset, and SchemaError when labels are missing or inconsistent.
TrainResult train_task(const std::vector<DatasetRecord>& dataset, const EncoderConfig& enc,
                       ParameterStore& params, TaskKind kind, const TrainConfig& cfg);

// Eval-mode scores for every record: sigmoid logits as a PredictionTable
// (labels required on every record).
PredictionTable predict_table(const std::vector<DatasetRecord>& dataset,
                              const EncoderConfig& enc, const GraphConfig& graph,
                              ParameterStore& params);

// Eval-mode logits (multiclass), one row per record, plus labels.
std::pair<Tensor, std::vector<int>> predict_logits(const std::vector<DatasetRecord>& dataset,
                                                   const EncoderConfig& enc,
                                                   const GraphConfig& graph,
                                                   ParameterStore& params);

// Class index of a one-hot multiclass label vector.
int multiclass_label(const DatasetRecord& record);

}  // namespace gearnetk
