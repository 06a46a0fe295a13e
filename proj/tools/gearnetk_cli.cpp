//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
// gearnetk: build protein residue graphs, pretrain and fine-tune the
// encoders, and evaluate predictions.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "gearnetk/checkpoint.hpp"
#include "gearnetk/config.hpp"
#include "gearnetk/graph.hpp"
#include "gearnetk/metrics.hpp"
#include "gearnetk/parallel.hpp"
#include "gearnetk/structure.hpp"
#include "gearnetk/train.hpp"

namespace gearnetk::cli {
namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

bool has_suffix(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() &&
         s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

std::vector<DatasetRecord> load_records(const std::string& input) {
  if (has_suffix(input, ".pdb") || has_suffix(input, ".ent")) {
    DatasetRecord rec;
    rec.structure = parse_pdb_file(input);
    rec.structure.id = std::filesystem::path(input).stem().string();
    return {std::move(rec)};
  }
  return read_jsonl_dataset(input);
}

void set_tensor(ParameterStore& store, const std::string& name, Tensor t) {
  if (store.has(name))
    store.value(name) = std::move(t);
  else
    store.add(name, std::move(t), /*trainable=*/false);
}

// Shape metadata embedded in checkpoints so `eval --ckpt` and `train --init`
// can rebuild the right architecture without the original config file.
void embed_meta(ParameterStore& store, const EncoderConfig& enc, const GraphConfig& graph,
                std::optional<std::pair<std::size_t, TaskKind>> task = std::nullopt) {
  set_tensor(store, "meta.encoder",
             Tensor({7}, {static_cast<double>(enc.num_layers),
                          static_cast<double>(enc.hidden_dim),
                          static_cast<double>(enc.edge_hidden_dim),
                          enc.use_edge_mp ? 1.0 : 0.0, enc.input_projection ? 1.0 : 0.0,
                          static_cast<double>(enc.num_relations),
                          static_cast<double>(enc.num_angle_bins)}));
  set_tensor(store, "meta.graph",
             Tensor({5}, {static_cast<double>(graph.d_seq), graph.d_radius,
                          static_cast<double>(graph.k), static_cast<double>(graph.d_long),
                          static_cast<double>(graph.num_angle_bins)}));
  if (task)
    set_tensor(store, "meta.task",
               Tensor({2}, {static_cast<double>(task->first),
                            task->second == TaskKind::kMulticlass ? 1.0 : 0.0}));
}

EncoderConfig encoder_from_meta(const ParameterStore& store) {
  if (!store.has("meta.encoder"))
    throw VersionMismatch("checkpoint carries no encoder metadata");
  const Tensor& m = store.value("meta.encoder");
  EncoderConfig enc;
  enc.num_layers = static_cast<int>(m[0]);
  enc.hidden_dim = static_cast<int>(m[1]);
  enc.edge_hidden_dim = static_cast<int>(m[2]);
  enc.use_edge_mp = m[3] != 0.0;
  enc.input_projection = m[4] != 0.0;
  enc.num_relations = static_cast<int>(m[5]);
  enc.num_angle_bins = static_cast<int>(m[6]);
  return enc;
}

GraphConfig graph_from_meta(const ParameterStore& store) {
  if (!store.has("meta.graph")) return GraphConfig{};
  const Tensor& m = store.value("meta.graph");
  GraphConfig g;
  g.d_seq = static_cast<int>(m[0]);
  g.d_radius = m[1];
  g.k = static_cast<int>(m[2]);
  g.d_long = static_cast<int>(m[3]);
  g.num_angle_bins = static_cast<int>(m[4]);
  return g;
}

Tensor edges_tensor(const ResidueGraph& g) {
  Tensor t({g.num_edges(), 3});
  for (std::size_t e = 0; e < g.num_edges(); ++e) {
    t.at(e, 0) = g.edges[e].src;
    t.at(e, 1) = g.edges[e].dst;
    t.at(e, 2) = g.edges[e].relation;
  }
  return t;
}

Tensor coords_tensor(const ResidueGraph& g) {
  Tensor t({g.num_nodes(), 3});
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    t.at(i, 0) = g.coords[i].x;
    t.at(i, 1) = g.coords[i].y;
    t.at(i, 2) = g.coords[i].z;
  }
  return t;
}

Tensor types_tensor(const ResidueGraph& g) {
  Tensor t({g.num_nodes()});
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    t[i] = static_cast<double>(g.residue_types[i]);
  return t;
}

int cmd_build_graph(const std::string& input, const std::string& output,
                    const RunConfig& cfg) {
  const std::vector<DatasetRecord> records = load_records(input);
  if (records.empty()) throw EmptyDataset("no records in " + input);

  ParameterStore cache;
  std::size_t nodes = 0, edges = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const ResidueGraph g = build_graph(records[i].structure, cfg.graph);
    nodes += g.num_nodes();
    edges += g.num_edges();
    const std::string prefix = records.size() == 1 ? "" : "p" + std::to_string(i) + ".";
    cache.add(prefix + "edges", edges_tensor(g), false);
    cache.add(prefix + "coords", coords_tensor(g), false);
    cache.add(prefix + "residue_types", types_tensor(g), false);
  }
  set_tensor(cache, "meta.graph",
             Tensor({5}, {static_cast<double>(cfg.graph.d_seq), cfg.graph.d_radius,
                          static_cast<double>(cfg.graph.k),
                          static_cast<double>(cfg.graph.d_long),
                          static_cast<double>(cfg.graph.num_angle_bins)}));
  save_checkpoint(cache, output);

  if (records.size() == 1) {
    std::printf("{\"nodes\":%zu,\"edges\":%zu,\"relations\":%d}\n", nodes, edges,
                cfg.graph.num_relations());
  } else {
    std::printf("{\"proteins\":%zu,\"nodes\":%zu,\"edges\":%zu,\"relations\":%d}\n",
                records.size(), nodes, edges, cfg.graph.num_relations());
  }
  return 0;
}

void write_loss_csv(const std::string& path, const std::vector<StepLog>& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write loss trace: " + path);
  out << "step,loss\n";
  for (const StepLog& row : trace) out << row.step << ',' << fmt17(row.loss) << '\n';
}

int cmd_pretrain(const std::string& method, const std::string& data, RunConfig cfg,
                 const std::string& out_path, std::string log_path) {
  cfg.pretrain.method = pretrain_method_from_string(method);
  const std::vector<DatasetRecord> dataset = read_jsonl_dataset(data);
  if (dataset.empty()) throw EmptyDataset("pretraining dataset is empty: " + data);

  ParameterStore params;
  Rng init = Rng(cfg.pretrain.seed).stream("init");
  init_encoder_params(cfg.encoder, params, init);
  init_pretrain_heads(cfg.pretrain.method, cfg.encoder, cfg.pretrain.contrastive, params,
                      init);

  const PretrainResult result = run_pretraining(dataset, cfg.encoder, cfg.pretrain, params);

  embed_meta(params, cfg.encoder, cfg.graph);
  save_checkpoint(params, out_path);
  if (log_path.empty()) log_path = out_path + ".loss.csv";
  write_loss_csv(log_path, result.trace);
  const double final_loss = result.trace.empty() ? 0.0 : result.trace.back().loss;
  std::printf("{\"method\":\"%s\",\"steps\":%zu,\"final_loss\":%s}\n", method.c_str(),
              result.trace.size(), fmt17(final_loss).c_str());
  return 0;
}

int cmd_train(const std::string& task, const std::string& data, const std::string& init_ckpt,
              RunConfig cfg, const std::string& out_path, std::string log_path) {
  const TaskKind kind = task_kind_from_string(task);
  const std::vector<DatasetRecord> dataset = read_jsonl_dataset(data);
  if (dataset.empty()) throw EmptyDataset("training dataset is empty: " + data);
  std::size_t num_terms = 0;
  for (const DatasetRecord& rec : dataset)
    if (rec.labels) num_terms = std::max(num_terms, rec.labels->size());

  ParameterStore params;
  Rng init = Rng(cfg.train.seed).stream("init");
  init_encoder_params(cfg.encoder, params, init);
  init_task_head(cfg.encoder, num_terms, params, init);
  if (!init_ckpt.empty()) {
    // Encoder weights come from the checkpoint; head params stay fresh when
    // the checkpoint has none.
    const ParameterStore loaded = load_checkpoint(init_ckpt);
    ParameterStore encoder_only;
    Rng scratch = init.stream("scratch");
    init_encoder_params(cfg.encoder, encoder_only, scratch);
    encoder_only.assign_values_from(loaded);  // VersionMismatch on dim changes
    for (const std::string& name : encoder_only.names())
      params.value(name) = encoder_only.value(name);
  }

  const TrainResult result = train_task(dataset, cfg.encoder, params, kind, cfg.train);

  ParameterStore best = result.best_params;
  embed_meta(best, cfg.encoder, cfg.graph, std::make_pair(num_terms, kind));
  save_checkpoint(best, out_path);
  if (log_path.empty()) log_path = out_path + ".log.csv";
  std::ofstream log(log_path, std::ios::binary);
  if (!log) throw IoError("cannot write training log: " + log_path);
  log << "epoch,loss,val_metric\n";
  for (const EpochLog& row : result.log)
    log << row.epoch << ',' << fmt17(row.loss) << ',' << fmt17(row.val_metric) << '\n';
  std::printf("{\"task\":\"%s\",\"epochs\":%zu,\"best_val_metric\":%s}\n", task.c_str(),
              result.log.size(), fmt17(result.best_metric).c_str());
  return 0;
}

int cmd_eval(const std::string& metric, const std::string& pred, const std::string& data,
             const std::string& ckpt) {
  double value = 0.0;
  if (!pred.empty()) {
    const PredictionTable table = PredictionTable::read_file(pred);
    if (metric == "fmax")
      value = fmax(table);
    else if (metric == "aupr")
      value = aupr_pair(table);
    else
      throw ConfigError("metric '" + metric + "' needs --data/--ckpt, not --pred");
  } else {
    if (data.empty() || ckpt.empty())
      throw ConfigError("eval needs either --pred or both --data and --ckpt");
    ParameterStore params = load_checkpoint(ckpt);
    const EncoderConfig enc = encoder_from_meta(params);
    const GraphConfig graph = graph_from_meta(params);
    if (!params.has("head.task.l1.W"))
      throw VersionMismatch("checkpoint has no task head; run `train` first");
    const std::vector<DatasetRecord> dataset = read_jsonl_dataset(data);
    if (metric == "fmax")
      value = fmax(predict_table(dataset, enc, graph, params));
    else if (metric == "aupr")
      value = aupr_pair(predict_table(dataset, enc, graph, params));
    else if (metric == "accuracy") {
      const auto [logits, labels] = predict_logits(dataset, enc, graph, params);
      value = accuracy(logits, labels);
    } else {
      throw ConfigError("unknown metric '" + metric + "' (expected fmax|aupr|accuracy)");
    }
  }
  std::printf("{\"metric\":\"%s\",\"value\":%s}\n", metric.c_str(), fmt17(value).c_str());
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"GearNetK: relational residue graphs, geometric encoders, and "
               "self-supervised pretraining for protein structures"};
  app.footer(run_config_reference());
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed_override;
  app.add_option("--config", config_path, "JSON run configuration (see footer)")
      ->envname("GEARNETK_CONFIG");
  app.add_option("--seed", seed_override, "Override train.seed from the config");

  auto* build = app.add_subcommand("build-graph", "Parse structures and write a graph cache");
  std::string in_path, out_path;
  build->add_option("--input", in_path, "PDB (.pdb/.ent) or JSONL dataset")->required();
  build->add_option("--output", out_path, "Graph cache path")->required();

  auto* pretrain = app.add_subcommand("pretrain", "Self-supervised pretraining");
  std::string method, data_path, ckpt_out, log_path;
  pretrain->add_option("--method", method,
                       "multiview_contrast|residue_type|distance|angle|dihedral")
      ->required();
  pretrain->add_option("--data", data_path, "JSONL dataset")->required();
  pretrain->add_option("--out", ckpt_out, "Checkpoint output path")->required();
  pretrain->add_option("--log", log_path, "Loss CSV path (default <out>.loss.csv)");

  auto* train = app.add_subcommand("train", "Fine-tune on a labeled dataset");
  std::string task, init_ckpt;
  train->add_option("--task", task, "multilabel|multiclass")->required();
  train->add_option("--data", data_path, "JSONL dataset with labels")->required();
  train->add_option("--init", init_ckpt, "Initialize the encoder from a checkpoint");
  train->add_option("--out", ckpt_out, "Checkpoint output path")->required();
  train->add_option("--log", log_path, "Training log CSV path (default <out>.log.csv)");

  auto* eval = app.add_subcommand("eval", "Evaluate a metric");
  std::string metric, pred_path;
  eval->add_option("--metric", metric, "fmax|aupr|accuracy")->required();
  eval->add_option("--pred", pred_path, "Prediction table file");
  eval->add_option("--data", data_path, "JSONL dataset (with --ckpt)");
  eval->add_option("--ckpt", init_ckpt, "Model checkpoint (with --data)");

  CLI11_PARSE(app, argc, argv);

  RunConfig cfg = config_path.empty() ? default_run_config() : load_run_config(config_path);
  if (seed_override) {
    cfg.train.seed = *seed_override;
    cfg.pretrain.seed = *seed_override;
  }

  if (build->parsed()) return cmd_build_graph(in_path, out_path, cfg);
  if (pretrain->parsed()) return cmd_pretrain(method, data_path, cfg, ckpt_out, log_path);
  if (train->parsed())
    return cmd_train(task, data_path, init_ckpt, cfg, ckpt_out, log_path);
  if (eval->parsed()) return cmd_eval(metric, pred_path, data_path, init_ckpt);
  return 1;
}

}  // namespace
}  // namespace gearnetk::cli

int main(int argc, char** argv) {
  try {
    return gearnetk::cli::run(argc, argv);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
