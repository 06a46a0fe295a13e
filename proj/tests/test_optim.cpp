//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/optim.hpp"

#include <gtest/gtest.h>

#include <cmath>

namespace gearnetk {
namespace {

TEST(Optimizer, SgdBasicStep) {
  ParameterStore params;
  params.add("w", Tensor({1}, {1.0}));
  params.grad("w")[0] = 1.0;
  Optimizer opt({.kind = OptimizerKind::kSgd, .lr = 0.1});
  opt.step(params);
  EXPECT_DOUBLE_EQ(params.value("w")[0], 0.9);
  EXPECT_DOUBLE_EQ(params.grad("w")[0], 0.0);  // zeroed after the step
}

TEST(Optimizer, AdamFirstStepMagnitudeIsLr) {
  // With bias correction the first update is lr * g / (|g| + eps'), which is
  // ~lr for any gradient magnitude.
  for (double g : {1e-4, 1.0, 1e4}) {
    ParameterStore params;
    params.add("w", Tensor({1}, {5.0}));
    params.grad("w")[0] = g;
    Optimizer opt({.kind = OptimizerKind::kAdam, .lr = 1e-3});
    opt.step(params);
    const double update = 5.0 - params.value("w")[0];
    EXPECT_NEAR(update, 1e-3, 1e-6) << "gradient " << g;
  }
}

TEST(Optimizer, ZeroGradientLeavesParamsUnchanged) {
  ParameterStore params;
  params.add("w", Tensor({2}, {1.0, -2.0}));
  Optimizer sgd({.kind = OptimizerKind::kSgd, .lr = 0.5});
  sgd.step(params);
  EXPECT_DOUBLE_EQ(params.value("w")[0], 1.0);
  EXPECT_DOUBLE_EQ(params.value("w")[1], -2.0);

  Optimizer adam({.kind = OptimizerKind::kAdam, .lr = 0.5});
  adam.step(params);
  EXPECT_DOUBLE_EQ(params.value("w")[0], 1.0);
  EXPECT_DOUBLE_EQ(params.value("w")[1], -2.0);
}

TEST(Optimizer, NonTrainableParamsAreSkipped) {
  ParameterStore params;
  params.add("stat", Tensor({1}, {3.0}), /*trainable=*/false);
  params.grad("stat")[0] = 10.0;
  Optimizer opt({.kind = OptimizerKind::kSgd, .lr = 1.0});
  opt.step(params);
  EXPECT_DOUBLE_EQ(params.value("stat")[0], 3.0);
}

TEST(Optimizer, AdamMatchesHandComputedTwoSteps) {
  ParameterStore params;
  params.add("w", Tensor({1}, {0.0}));
  OptimizerConfig cfg{.kind = OptimizerKind::kAdam, .lr = 0.1};
  Optimizer opt(cfg);

  double m = 0, v = 0, w = 0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? 0.5 : -0.25;
    params.grad("w")[0] = g;
    opt.step(params);
    m = cfg.beta1 * m + (1 - cfg.beta1) * g;
    v = cfg.beta2 * v + (1 - cfg.beta2) * g * g;
    const double mhat = m / (1 - std::pow(cfg.beta1, t));
    const double vhat = v / (1 - std::pow(cfg.beta2, t));
    w -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.epsilon);
    EXPECT_NEAR(params.value("w")[0], w, 1e-15);
  }
}

TEST(Optimizer, KindFromString) {
  EXPECT_EQ(optimizer_kind_from_string("sgd"), OptimizerKind::kSgd);
  EXPECT_EQ(optimizer_kind_from_string("adam"), OptimizerKind::kAdam);
  EXPECT_THROW(optimizer_kind_from_string("rmsprop"), ConfigError);
}

}  // namespace
}  // namespace gearnetk
