//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/optim.hpp"

#include <cmath>

namespace gearnetk {

void Optimizer::step(ParameterStore& params) {
  if (cfg_.kind == OptimizerKind::kAdam) ++t_;
  params.for_each([&](const std::string& name, Tensor& value, Tensor& grad, bool trainable) {
    if (!trainable) {
      grad.fill(0.0);
      return;
    }
    if (cfg_.weight_decay != 0.0)
      for (std::size_t i = 0; i < grad.size(); ++i) grad[i] += cfg_.weight_decay * value[i];
    switch (cfg_.kind) {
      case OptimizerKind::kSgd:
        for (std::size_t i = 0; i < value.size(); ++i) value[i] -= cfg_.lr * grad[i];
        break;
      case OptimizerKind::kAdam: {
        auto mit = m_.find(name);
        if (mit == m_.end()) {
          mit = m_.emplace(name, Tensor::zeros(value.dims())).first;
          v_.emplace(name, Tensor::zeros(value.dims()));
        }
        Tensor& m = mit->second;
        Tensor& v = v_.at(name);
        const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
        const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
        for (std::size_t i = 0; i < value.size(); ++i) {
          m[i] = cfg_.beta1 * m[i] + (1.0 - cfg_.beta1) * grad[i];
          v[i] = cfg_.beta2 * v[i] + (1.0 - cfg_.beta2) * grad[i] * grad[i];
          const double mhat = m[i] / bc1;
          const double vhat = v[i] / bc2;
          value[i] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.epsilon);
        }
        break;
      }
    }
    grad.fill(0.0);
  });
}

OptimizerKind optimizer_kind_from_string(const std::string& s) {
  if (s == "sgd") return OptimizerKind::kSgd;
  if (s == "adam") return OptimizerKind::kAdam;
  throw ConfigError("unknown optimizer kind: " + s + " (expected sgd|adam)");
}

}  // namespace gearnetk
