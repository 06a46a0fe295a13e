//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <map>
#include <string>

#include "gearnetk/tensor.hpp"

namespace gearnetk {

enum class OptimizerKind { kSgd, kAdam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double weight_decay = 0.0;
};

// In-place updates of the trainable parameters. Gradients are zeroed after
// each step. Adam keeps per-parameter first/second moment buffers keyed by
// name, created lazily on the first step.
class Optimizer {
 public:
  explicit Optimizer(OptimizerConfig cfg) : cfg_(cfg) {}

  const OptimizerConfig& config() const { return cfg_; }

  void step(ParameterStore& params);

 private:
  OptimizerConfig cfg_;
  std::map<std::string, Tensor> m_;
  std::map<std::string, Tensor> v_;
  std::size_t t_ = 0;
};

OptimizerKind optimizer_kind_from_string(const std::string& s);

}  // namespace gearnetk
