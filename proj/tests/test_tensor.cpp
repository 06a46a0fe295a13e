//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/tensor.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>

#include "test_util.hpp"

namespace gearnetk {
namespace {

using test::max_grad_rel_error;
using test::random_tensor;

TEST(Tensor, ShapeChecks) {
  EXPECT_THROW(Tensor({2, 3}, {1.0}), ShapeMismatch);
  Tensor t({2, 3});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.cols(), 3u);
  Tensor v({4});
  EXPECT_EQ(v.rows(), 1u);
  EXPECT_EQ(v.cols(), 4u);
}

TEST(Tape, ReluBackwardGatesOnSign) {
  Tape tape;
  Tape::Id x = tape.leaf(Tensor({2}, {-1.0, 2.0}));
  Tape::Id y = tape.mean_all(tape.relu(x));
  tape.backward(y);
  EXPECT_DOUBLE_EQ(tape.grad(x)[0], 0.0);
  EXPECT_DOUBLE_EQ(tape.grad(x)[1], 0.5);  // upstream 1/2 from the mean
}

TEST(Tape, ScatterSumExample) {
  Tape tape;
  Tape::Id rows = tape.leaf(Tensor::matrix(3, 2, {1, 2, 3, 4, 5, 6}));
  Tape::Id out = tape.scatter_sum_rows(rows, {0, 0, 1}, 2);
  const Tensor& v = tape.value(out);
  EXPECT_DOUBLE_EQ(v.at(0, 0), 4.0);
  EXPECT_DOUBLE_EQ(v.at(0, 1), 6.0);
  EXPECT_DOUBLE_EQ(v.at(1, 0), 5.0);
  EXPECT_DOUBLE_EQ(v.at(1, 1), 6.0);
}

TEST(Tape, GatherOutOfRangeThrows) {
  Tape tape;
  Tape::Id x = tape.leaf(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  EXPECT_THROW(tape.gather_rows(x, {2}), IndexOutOfRange);
  EXPECT_THROW(tape.scatter_sum_rows(x, {0, 5}, 3), IndexOutOfRange);
}

TEST(Tape, MatmulShapeMismatchThrows) {
  Tape tape;
  Tape::Id a = tape.leaf(Tensor({2, 3}));
  Tape::Id b = tape.leaf(Tensor({2, 3}));
  EXPECT_THROW(tape.matmul(a, b), ShapeMismatch);
}

TEST(Tape, CrossEntropyUniformLogitsIsLogC) {
  for (std::size_t c : {2u, 21u, 8u}) {
    Tape tape;
    Tape::Id logits = tape.leaf(Tensor({3, c}));
    Tape::Id loss = tape.cross_entropy(logits, {0, 1, 0});
    EXPECT_NEAR(tape.value(loss).item(), std::log(static_cast<double>(c)), 1e-12);
  }
}

TEST(Tape, CrossEntropyBadTargetThrows) {
  Tape tape;
  Tape::Id logits = tape.leaf(Tensor({2, 3}));
  EXPECT_THROW(tape.cross_entropy(logits, {0, 3}), BadTarget);
  EXPECT_THROW(tape.cross_entropy(logits, {0}), BadTarget);
}

TEST(Tape, MseZeroWhenEqual) {
  Tape tape;
  Tensor target({2, 2}, {1, 2, 3, 4});
  Tape::Id pred = tape.leaf(target);
  Tape::Id loss = tape.mse(pred, target);
  EXPECT_DOUBLE_EQ(tape.value(loss).item(), 0.0);
}

TEST(Tape, LossesMatchDirectFormulaOracle) {
  Rng rng(3);
  for (int rep = 0; rep < 10; ++rep) {
    const std::size_t n = 1 + rng.bounded(6), c = 2 + rng.bounded(7);
    Tensor logits = random_tensor({n, c}, rng);
    std::vector<int> targets(n);
    for (auto& t : targets) t = static_cast<int>(rng.bounded(c));

    double expected = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double denom = 0.0;
      for (std::size_t j = 0; j < c; ++j) denom += std::exp(logits.at(i, j));
      expected += -std::log(std::exp(logits.at(i, targets[i])) / denom);
    }
    expected /= static_cast<double>(n);

    Tape tape;
    Tape::Id loss = tape.cross_entropy(tape.leaf(logits), targets);
    EXPECT_NEAR(tape.value(loss).item(), expected, 1e-10);

    // BCE against the direct formula.
    Tensor z = random_tensor({n, c}, rng);
    Tensor y({n, c});
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = rng.bounded(2) ? 1.0 : 0.0;
    double bce = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double p = 1.0 / (1.0 + std::exp(-z[i]));
      bce += -(y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p));
    }
    bce /= static_cast<double>(z.size());
    Tape tape2;
    Tape::Id l2 = tape2.bce_with_logits(tape2.leaf(z), y);
    EXPECT_NEAR(tape2.value(l2).item(), bce, 1e-10);
  }
}

TEST(Tape, BatchNormIdenticalRowsGiveShift) {
  Tape tape;
  Tensor x = Tensor::matrix(2, 3, {1, 2, 3, 1, 2, 3});
  Tensor rm = Tensor::zeros({3});
  Tensor rv({3});
  rv.fill(1.0);
  BatchNormState st{&rm, &rv, 0.1, 1e-5, Mode::kTrain};
  Tape::Id gamma = tape.leaf(Tensor({3}, {1, 1, 1}));
  Tape::Id beta = tape.leaf(Tensor({3}, {0.5, -1.0, 2.0}));
  Tape::Id y = tape.batch_norm(tape.leaf(x), gamma, beta, st);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(tape.value(y).at(i, 0), 0.5, 1e-12);
    EXPECT_NEAR(tape.value(y).at(i, 1), -1.0, 1e-12);
    EXPECT_NEAR(tape.value(y).at(i, 2), 2.0, 1e-12);
  }
  // Running stats moved toward the batch statistics.
  EXPECT_NEAR(rm[0], 0.1 * 1.0, 1e-12);
  EXPECT_NEAR(rv[0], 0.9 * 1.0 + 0.1 * 0.0, 1e-12);
}

TEST(Tape, BatchNormEvalWithUnitStatsIsNearIdentity) {
  Tape tape;
  Rng rng(5);
  Tensor x = random_tensor({4, 3}, rng);
  Tensor rm = Tensor::zeros({3});
  Tensor rv({3});
  rv.fill(1.0);
  BatchNormState st{&rm, &rv, 0.1, 1e-5, Mode::kEval};
  Tape::Id gamma = tape.leaf(Tensor({3}, {1, 1, 1}));
  Tape::Id beta = tape.leaf(Tensor::zeros({3}));
  Tape::Id y = tape.batch_norm(tape.leaf(x), gamma, beta, st);
  for (std::size_t i = 0; i < x.size(); ++i)
    EXPECT_NEAR(tape.value(y)[i], x[i], 1e-5 * std::abs(x[i]) + 1e-9);
}

TEST(Tape, DropoutScalesInTrainAndPassesInEval) {
  Rng rng(17);
  Tape tape;
  Tensor x({1000});
  x.fill(1.0);
  Tape::Id in = tape.leaf(x);
  Tape::Id train_out = tape.dropout(in, 0.25, rng, Mode::kTrain);
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 1000; ++i) {
    const double v = tape.value(train_out)[i];
    EXPECT_TRUE(v == 0.0 || std::abs(v - 1.0 / 0.75) < 1e-12);
    kept += v != 0.0;
  }
  EXPECT_GT(kept, 650u);
  EXPECT_LT(kept, 850u);
  Tape::Id eval_out = tape.dropout(in, 0.25, rng, Mode::kEval);
  for (std::size_t i = 0; i < 1000; ++i) EXPECT_DOUBLE_EQ(tape.value(eval_out)[i], 1.0);
}

// Gradient checks: a composite graph touching every differentiable op, with
// analytic gradients compared against central finite differences.
TEST(Tape, CompositeGraphGradientsMatchFiniteDifferences) {
  Rng rng(23);
  for (int rep = 0; rep < 3; ++rep) {
    ParameterStore params;
    params.add("a", random_tensor({4, 3}, rng));
    params.add("w", random_tensor({3, 5}, rng));
    params.add("v", random_tensor({5}, rng));
    params.add("gamma", random_tensor({5}, rng));
    params.add("beta", random_tensor({5}, rng));
    params.add("u", random_tensor({2, 5}, rng));

    Tensor rm = Tensor::zeros({5});
    Tensor rv({5});
    rv.fill(1.0);
    Tensor mse_target = random_tensor({5}, rng);
    Tensor mask = Tensor::matrix(2, 2, {1, 1, 1, 0});

    auto loss_of = [&](bool with_grad) {
      Tensor rm_local = rm, rv_local = rv;
      BatchNormState st{&rm_local, &rv_local, 0.1, 1e-5, Mode::kTrain};
      Tape tape(true);
      Tape::Id a = tape.param(params, "a");
      Tape::Id w = tape.param(params, "w");
      Tape::Id v = tape.param(params, "v");
      Tape::Id x = tape.add_rowvec(tape.matmul(a, w), v);          // 4x5
      Tape::Id bn = tape.batch_norm(x, tape.param(params, "gamma"),
                                    tape.param(params, "beta"), st);
      Tape::Id r = tape.relu(bn);
      Tape::Id gathered = tape.gather_rows(r, {0, 2, 2, 3});        // 4x5
      Tape::Id scattered = tape.scatter_sum_rows(gathered, {1, 0, 1, 1}, 2);
      Tape::Id u = tape.param(params, "u");
      Tape::Id cat = tape.concat_cols({scattered, tape.mul(u, u)});  // 2x10
      Tape::Id nrm = tape.l2_normalize_rows(cat);
      Tape::Id sims = tape.matmul_nt(nrm, nrm);                     // 2x2
      Tape::Id lse = tape.logsumexp_rows_masked(sims, mask);
      Tape::Id pos = tape.select_entries(sims, {0, 1}, {1, 0});
      Tape::Id diff = tape.sub(lse, pos);
      Tape::Id summed = tape.row_sum(tape.scale(scattered, 0.3));
      Tape::Id parts = tape.stack_rows({diff, tape.constant(Tensor({2}, {0.1, 0.2}))});
      Tape::Id total =
          tape.add(tape.add(tape.mean_all(parts), tape.mse(summed, mse_target)),
                   tape.mean_all(diff));
      const double out = tape.value(total).item();
      if (with_grad) tape.backward(total);
      return out;
    };
    EXPECT_LT(max_grad_rel_error(params, loss_of), 1e-5);
  }
}

TEST(Tape, LossGradientsMatchFiniteDifferences) {
  Rng rng(31);
  ParameterStore params;
  params.add("logits", random_tensor({5, 4}, rng));
  std::vector<int> targets = {0, 3, 1, 2, 2};
  Tensor bce_targets({5, 4});
  for (std::size_t i = 0; i < bce_targets.size(); ++i)
    bce_targets[i] = rng.bounded(2) ? 1.0 : 0.0;

  auto ce_loss = [&](bool with_grad) {
    Tape tape;
    Tape::Id l = tape.cross_entropy(tape.param(params, "logits"), targets);
    if (with_grad) tape.backward(l);
    return tape.value(l).item();
  };
  EXPECT_LT(max_grad_rel_error(params, ce_loss), 1e-5);

  params.zero_grads();
  auto bce_loss = [&](bool with_grad) {
    Tape tape;
    Tape::Id l = tape.bce_with_logits(tape.param(params, "logits"), bce_targets);
    if (with_grad) tape.backward(l);
    return tape.value(l).item();
  };
  EXPECT_LT(max_grad_rel_error(params, bce_loss), 1e-5);
}

TEST(Tape, BatchNormGradientMatchesFiniteDifferences) {
  Rng rng(37);
  for (Mode mode : {Mode::kTrain, Mode::kEval}) {
    ParameterStore params;
    params.add("x", random_tensor({6, 4}, rng));
    params.add("gamma", random_tensor({4}, rng));
    params.add("beta", random_tensor({4}, rng));
    Tensor rm = random_tensor({4}, rng);
    Tensor rv({4});
    rv.fill(1.3);
    auto loss_of = [&](bool with_grad) {
      Tensor rm_local = rm, rv_local = rv;
      BatchNormState st{&rm_local, &rv_local, 0.1, 1e-5, mode};
      Tape tape;
      Tape::Id y = tape.batch_norm(tape.param(params, "x"), tape.param(params, "gamma"),
                                   tape.param(params, "beta"), st);
      Tape::Id loss = tape.mean_all(tape.mul(y, y));
      if (with_grad) tape.backward(loss);
      return tape.value(loss).item();
    };
    EXPECT_LT(max_grad_rel_error(params, loss_of), 1e-5);
  }
}

TEST(Tape, ForwardIsDeterministic) {
  Rng rng(41);
  Tensor a = random_tensor({8, 8}, rng);
  Tensor b = random_tensor({8, 8}, rng);
  auto run = [&]() {
    Tape tape;
    Tape::Id out = tape.mean_all(tape.relu(tape.matmul(tape.leaf(a), tape.leaf(b))));
    return tape.value(out).item();
  };
  const double first = run();
  for (int i = 0; i < 5; ++i) {
    const double again = run();
    EXPECT_EQ(std::memcmp(&first, &again, sizeof(double)), 0);
  }
}

TEST(Tape, BackwardVisitsEachOpExactlyOnce) {
  Rng rng(43);
  Tape tape;
  Tape::Id a = tape.leaf(random_tensor({3, 3}, rng));
  Tape::Id b = tape.leaf(random_tensor({3, 3}, rng));
  Tape::Id c = tape.matmul(a, b);
  Tape::Id d = tape.add(c, a);
  Tape::Id e = tape.relu(d);
  Tape::Id loss = tape.mean_all(e);
  tape.backward(loss);
  EXPECT_EQ(tape.backward_visits(), tape.num_ops());
  EXPECT_EQ(tape.num_ops(), 4u);
}

TEST(Tape, FiniteCheckTripsOnNan) {
  Tape tape(true);
  Tape::Id x = tape.leaf(Tensor({2}, {1e308, 1e308}));
  EXPECT_THROW(tape.add(x, x), NumericError);
}

TEST(ParameterStore, AssignChecksShapesAndNames) {
  ParameterStore a;
  a.add("w", Tensor({2, 2}, {1, 2, 3, 4}));
  ParameterStore b;
  b.add("w", Tensor({2, 2}, {5, 6, 7, 8}));
  b.add("extra", Tensor({1}, {9}));
  a.assign_values_from(b);
  EXPECT_DOUBLE_EQ(a.value("w")[0], 5.0);

  ParameterStore c;
  c.add("w", Tensor({3}, {0, 0, 0}));
  EXPECT_THROW(a.assign_values_from(c), VersionMismatch);
  ParameterStore d;
  d.add("other", Tensor({2, 2}));
  EXPECT_THROW(a.assign_values_from(d), VersionMismatch);
}

}  // namespace
}  // namespace gearnetk
