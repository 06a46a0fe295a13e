//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "gearnetk/error.hpp"
#include "gearnetk/rng.hpp"

namespace gearnetk {

// Dense row-major tensor of 64-bit floats.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> dims);
  Tensor(std::vector<std::size_t> dims, std::vector<double> values);

  static Tensor scalar(double v) { return Tensor({1}, {v}); }
  static Tensor zeros(std::vector<std::size_t> dims) { return Tensor(std::move(dims)); }
  static Tensor matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

  const std::vector<std::size_t>& dims() const { return dims_; }
  std::size_t rank() const { return dims_.size(); }
  std::size_t size() const { return values_.size(); }
  bool empty() const { return values_.empty(); }

  // 2-D views: a rank-1 tensor of length d counts as 1 x d.
  std::size_t rows() const;
  std::size_t cols() const;

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }

  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& at(std::size_t r, std::size_t c) { return values_[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values_[r * cols() + c]; }

  // Value of a one-element tensor.
  double item() const;

  bool same_shape(const Tensor& other) const { return dims_ == other.dims_; }
  bool all_finite() const;
  void fill(double v);

 private:
  std::vector<std::size_t> dims_;
  std::vector<double> values_;
};

// Named parameters with same-shaped gradient accumulators. Iteration order is
// the lexicographic name order (std::map), which keeps checkpoints and
// optimizer sweeps deterministic.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor value, bool trainable = true);
  bool has(const std::string& name) const { return entries_.count(name) != 0; }
  Tensor& value(const std::string& name);
  const Tensor& value(const std::string& name) const;
  Tensor& grad(const std::string& name);
  bool trainable(const std::string& name) const;

  std::vector<std::string> names() const;
  std::size_t size() const { return entries_.size(); }
  void zero_grads();

  // Copies values (not grads) from `other` by name. Every parameter in this
  // store must exist in `other` with the same shape; throws VersionMismatch
  // otherwise. Extra tensors in `other` are ignored.
  void assign_values_from(const ParameterStore& other);

  template <typename Fn>  // Fn(const std::string&, Tensor& value, Tensor& grad, bool trainable)
  void for_each(Fn&& fn) {
    for (auto& [name, e] : entries_) fn(name, e.value, e.grad, e.trainable);
  }
  template <typename Fn>
  void for_each(Fn&& fn) const {
    for (const auto& [name, e] : entries_) fn(name, e.value, e.grad, e.trainable);
  }

 private:
  struct Entry {
    Tensor value;
    Tensor grad;
    bool trainable = true;
  };
  std::map<std::string, Entry> entries_;
};

enum class Mode { kTrain, kEval };

// Running statistics and settings for one batch-norm instance. The running
// tensors live elsewhere (normally in a ParameterStore so that they are
// checkpointed); this struct only points at them.
struct BatchNormState {
  Tensor* running_mean = nullptr;
  Tensor* running_var = nullptr;
  double momentum = 0.1;
  double epsilon = 1e-5;
  Mode mode = Mode::kTrain;
};

// Reverse-mode tape. Operations record themselves during the forward pass;
// backward() replays them in exact reverse order. A tape and its tensors are
// a single-threaded unit of work.
class Tape {
 public:
  using Id = std::uint32_t;

  explicit Tape(bool check_finite = false) : check_finite_(check_finite) {}

  void set_check_finite(bool on) { check_finite_ = on; }

  // Leaves.
  Id constant(Tensor t);  // no gradient
  Id leaf(Tensor t);      // differentiable leaf
  // Differentiable leaf whose gradient is accumulated into store.grad(name)
  // when backward() finishes.
  Id param(ParameterStore& store, const std::string& name);

  // Core ops. All tensors are treated as 2-D (rank-1 counts as one row).
  Id matmul(Id a, Id b);     // [m x k] * [k x n]
  Id matmul_nt(Id a, Id b);  // [m x k] * [n x k]^T
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);  // elementwise
  Id scale(Id a, double c);
  Id add_rowvec(Id a, Id v);  // [m x n] + broadcast [n]
  Id concat_cols(const std::vector<Id>& parts);
  Id stack_rows(const std::vector<Id>& rows);  // each [d] or [1 x d]
  Id relu(Id a);
  Id dropout(Id a, double p, Rng& rng, Mode mode);
  Id gather_rows(Id a, std::vector<std::size_t> idx);
  Id scatter_sum_rows(Id a, std::vector<std::size_t> idx, std::size_t out_rows);
  Id row_sum(Id a);  // [m x d] -> [d]
  Id batch_norm(Id x, Id gamma, Id beta, BatchNormState& state);
  Id l2_normalize_rows(Id a);
  // out[i] = log sum_j mask[i,j] * exp(a[i,j]); mask entries are 0/1 and every
  // row must keep at least one column.
  Id logsumexp_rows_masked(Id a, Tensor mask);
  Id select_entries(Id a, std::vector<std::size_t> rows, std::vector<std::size_t> cols);
  Id mean_all(Id a);

  // Losses (scalar outputs, mean over samples).
  Id cross_entropy(Id logits, std::vector<int> targets);
  Id mse(Id pred, Tensor target);
  Id bce_with_logits(Id logits, Tensor targets);

  void backward(Id root);

  const Tensor& value(Id id) const { return nodes_[id].value; }
  // Gradient of a node after backward(); allocated lazily (zeros when no
  // gradient flowed to it).
  const Tensor& grad(Id id);

  // Number of recorded differentiable ops; backward() visits each exactly once.
  std::size_t num_ops() const;
  std::size_t backward_visits() const { return backward_visits_; }

 private:
  struct Node {
    Tensor value;
    Tensor grad;
    bool requires_grad = false;
    std::function<void(Tape&)> backward;  // empty for leaves/constants
  };

  Id push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward);
  void attach(Id id, std::function<void(Tape&)> backward);
  bool needs_grad(Id id) const { return nodes_[id].requires_grad; }
  Tensor& grad_mut(Id id);
  void check_node(Id id, const char* op) const;

  std::vector<Node> nodes_;
  std::vector<std::pair<Id, std::pair<ParameterStore*, std::string>>> bindings_;
  std::size_t backward_visits_ = 0;
  bool check_finite_ = false;
};

}  // namespace gearnetk
