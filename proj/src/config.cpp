//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace gearnetk {

namespace {

using nlohmann::json;

// Pulls typed values out of one section, rejecting unknown keys.
class Section {
 public:
  Section(const json& j, std::string name) : j_(j), name_(std::move(name)) {
    if (!j_.is_object()) throw ConfigError("config section '" + name_ + "' must be an object");
  }

  ~Section() = default;

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ConfigError("config key '" + name_ + "." + key + "' has the wrong type");
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!seen_.count(key))
        throw ConfigError("unknown config key '" + name_ + "." + key + "'");
  }

 private:
  const json& j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig default_run_config() { return RunConfig{}; }

RunConfig parse_run_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");

  RunConfig cfg;
  const std::set<std::string> sections = {"graph", "encoder", "pretrain", "train", "paths"};
  for (const auto& [key, value] : j.items())
    if (!sections.count(key)) throw ConfigError("unknown config section '" + key + "'");

  if (j.contains("graph")) {
    Section s(j.at("graph"), "graph");
    s.get("d_seq", cfg.graph.d_seq);
    s.get("d_radius", cfg.graph.d_radius);
    s.get("k", cfg.graph.k);
    s.get("d_long", cfg.graph.d_long);
    s.get("num_angle_bins", cfg.graph.num_angle_bins);
    s.finish();
  }
  if (j.contains("encoder")) {
    Section s(j.at("encoder"), "encoder");
    s.get("num_layers", cfg.encoder.num_layers);
    s.get("hidden_dim", cfg.encoder.hidden_dim);
    s.get("edge_hidden_dim", cfg.encoder.edge_hidden_dim);
    s.get("use_edge_mp", cfg.encoder.use_edge_mp);
    s.get("input_projection", cfg.encoder.input_projection);
    s.get("dropout", cfg.encoder.dropout);
    s.finish();
  }
  if (j.contains("pretrain")) {
    Section s(j.at("pretrain"), "pretrain");
    std::string method = to_string(cfg.pretrain.method);
    s.get("method", method);
    cfg.pretrain.method = pretrain_method_from_string(method);
    s.get("temperature", cfg.pretrain.contrastive.temperature);
    s.get("projection_dim", cfg.pretrain.contrastive.projection_dim);
    s.get("crop_length", cfg.pretrain.contrastive.crop_length);
    s.get("crop_radius", cfg.pretrain.contrastive.crop_radius);
    s.get("mask_rate", cfg.pretrain.contrastive.mask_rate);
    s.get("num_masked_residues", cfg.pretrain.selfpred.num_masked_residues);
    s.get("num_distance_pairs", cfg.pretrain.selfpred.num_distance_pairs);
    s.get("num_angle_triplets", cfg.pretrain.selfpred.num_angle_triplets);
    s.get("num_dihedral_quadruples", cfg.pretrain.selfpred.num_dihedral_quadruples);
    s.get("dihedral_random_sampling", cfg.pretrain.selfpred.dihedral_random_sampling);
    s.finish();
  }
  if (j.contains("train")) {
    Section s(j.at("train"), "train");
    std::string optimizer = cfg.train.optimizer.kind == OptimizerKind::kAdam ? "adam" : "sgd";
    s.get("optimizer", optimizer);
    cfg.train.optimizer.kind = optimizer_kind_from_string(optimizer);
    s.get("lr", cfg.train.optimizer.lr);
    s.get("weight_decay", cfg.train.optimizer.weight_decay);
    s.get("batch_size", cfg.train.batch_size);
    s.get("epochs", cfg.train.epochs);
    std::size_t max_steps = cfg.pretrain.max_steps;
    s.get("max_steps", max_steps);
    cfg.pretrain.max_steps = max_steps;
    s.get("seed", cfg.train.seed);
    s.get("val_fraction", cfg.train.val_fraction);
    s.finish();
  }
  if (j.contains("paths")) {
    Section s(j.at("paths"), "paths");
    s.get("dataset", cfg.paths.dataset);
    s.get("checkpoint", cfg.paths.checkpoint);
    s.get("output", cfg.paths.output);
    s.finish();
  }

  // Relation counts and the shared hyperparameters flow from their owning
  // sections.
  cfg.encoder.num_relations = cfg.graph.num_relations();
  cfg.encoder.num_angle_bins = cfg.graph.num_angle_bins;
  cfg.pretrain.graph = cfg.graph;
  cfg.pretrain.optimizer = cfg.train.optimizer;
  cfg.pretrain.batch_size = cfg.train.batch_size;
  cfg.pretrain.epochs = cfg.train.epochs;
  cfg.pretrain.seed = cfg.train.seed;
  cfg.pretrain.contrastive.batch_size = cfg.train.batch_size;
  cfg.train.graph = cfg.graph;

  cfg.graph.validate();
  cfg.encoder.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str());
}

std::string run_config_reference() {
  return R"(Config file (JSON), all keys optional:
{
  "graph":   { "d_seq": 3, "d_radius": 10.0, "k": 10, "d_long": 5,
               "num_angle_bins": 8 },
  "encoder": { "num_layers": 6, "hidden_dim": 512, "edge_hidden_dim": 0,
               "use_edge_mp": false, "input_projection": true, "dropout": 0.0 },
  "pretrain":{ "method": "multiview_contrast", "temperature": 0.07,
               "projection_dim": 128, "crop_length": 50, "crop_radius": 15.0,
               "mask_rate": 0.15, "num_masked_residues": 512,
               "num_distance_pairs": 256, "num_angle_triplets": 512,
               "num_dihedral_quadruples": 512,
               "dihedral_random_sampling": false },
  "train":   { "optimizer": "adam", "lr": 0.001, "weight_decay": 0.0,
               "batch_size": 96, "epochs": 50, "max_steps": 0, "seed": 0,
               "val_fraction": 0.1 },
  "paths":   { "dataset": "", "checkpoint": "", "output": "" }
}
Unknown sections or keys are rejected.)";
}

}  // namespace gearnetk
