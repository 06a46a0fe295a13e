//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>
#include <numeric>

#include "gearnetk/kernels.hpp"

namespace gearnetk {

namespace {

std::size_t product(const std::vector<std::size_t>& dims) {
  std::size_t p = 1;
  for (std::size_t d : dims) p *= d;
  return p;
}

std::string shape_str(const Tensor& t) {
  std::string s = "[";
  for (std::size_t i = 0; i < t.dims().size(); ++i) {
    if (i) s += " x ";
    s += std::to_string(t.dims()[i]);
  }
  return s + "]";
}

}  // namespace

Tensor::Tensor(std::vector<std::size_t> dims)
    : dims_(std::move(dims)), values_(product(dims_), 0.0) {}

Tensor::Tensor(std::vector<std::size_t> dims, std::vector<double> values)
    : dims_(std::move(dims)), values_(std::move(values)) {
  if (product(dims_) != values_.size())
    throw ShapeMismatch("tensor: dims do not match value count");
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

std::size_t Tensor::rows() const {
  if (dims_.size() <= 1) return dims_.empty() ? 0 : 1;
  if (dims_.size() == 2) return dims_[0];
  throw ShapeMismatch("tensor: rank > 2 has no row view");
}

std::size_t Tensor::cols() const {
  if (dims_.size() <= 1) return dims_.empty() ? 0 : dims_[0];
  if (dims_.size() == 2) return dims_[1];
  throw ShapeMismatch("tensor: rank > 2 has no column view");
}

double Tensor::item() const {
  if (values_.size() != 1) throw ShapeMismatch("item(): tensor is not a scalar");
  return values_[0];
}

bool Tensor::all_finite() const {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Tensor::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

// ---------------------------------------------------------------------------
// ParameterStore
// ---------------------------------------------------------------------------

Tensor& ParameterStore::add(const std::string& name, Tensor value, bool trainable) {
  if (has(name)) throw Error("parameter already registered: " + name);
  Entry e;
  e.grad = Tensor::zeros(value.dims());
  e.value = std::move(value);
  e.trainable = trainable;
  return entries_.emplace(name, std::move(e)).first->second.value;
}

Tensor& ParameterStore::value(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UninitializedParams("unknown parameter: " + name);
  return it->second.value;
}

const Tensor& ParameterStore::value(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UninitializedParams("unknown parameter: " + name);
  return it->second.value;
}

Tensor& ParameterStore::grad(const std::string& name) {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UninitializedParams("unknown parameter: " + name);
  return it->second.grad;
}

bool ParameterStore::trainable(const std::string& name) const {
  auto it = entries_.find(name);
  if (it == entries_.end()) throw UninitializedParams("unknown parameter: " + name);
  return it->second.trainable;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(entries_.size());
  for (const auto& [name, e] : entries_) out.push_back(name);
  return out;
}

void ParameterStore::zero_grads() {
  for (auto& [name, e] : entries_) e.grad.fill(0.0);
}

void ParameterStore::assign_values_from(const ParameterStore& other) {
  for (auto& [name, e] : entries_) {
    auto it = other.entries_.find(name);
    if (it == other.entries_.end())
      throw VersionMismatch("checkpoint is missing parameter: " + name);
    if (!it->second.value.same_shape(e.value))
      throw VersionMismatch("parameter shape mismatch for " + name + ": expected " +
                            shape_str(e.value) + ", got " + shape_str(it->second.value));
    e.value = it->second.value;
  }
}

// ---------------------------------------------------------------------------
// Tape
// ---------------------------------------------------------------------------

Tape::Id Tape::push(Tensor value, bool requires_grad, std::function<void(Tape&)> backward) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Tensor& Tape::grad_mut(Id id) {
  Node& n = nodes_[id];
  if (n.grad.empty()) n.grad = Tensor::zeros(n.value.dims());
  return n.grad;
}

void Tape::attach(Id id, std::function<void(Tape&)> backward) {
  nodes_[id].backward = std::move(backward);
}

std::size_t Tape::num_ops() const {
  std::size_t n = 0;
  for (const auto& node : nodes_)
    if (node.backward && node.requires_grad) ++n;
  return n;
}

void Tape::check_node(Id id, const char* op) const {
  if (check_finite_ && !nodes_[id].value.all_finite())
    throw NumericError(std::string("non-finite values after op: ") + op);
}

const Tensor& Tape::grad(Id id) {
  if (!nodes_[id].requires_grad) throw Error("grad(): node does not require grad");
  return grad_mut(id);
}

Tape::Id Tape::constant(Tensor t) { return push(std::move(t), false, nullptr); }

Tape::Id Tape::leaf(Tensor t) { return push(std::move(t), true, nullptr); }

Tape::Id Tape::param(ParameterStore& store, const std::string& name) {
  Id id = leaf(store.value(name));
  bindings_.push_back({id, {&store, name}});
  return id;
}

Tape::Id Tape::matmul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  const std::size_t m = ta.rows(), k = ta.cols(), n = tb.cols();
  if (tb.rows() != k)
    throw ShapeMismatch("matmul: " + shape_str(ta) + " * " + shape_str(tb));
  Tensor out({m, n});
  kernels::gemm_nn(ta.data(), tb.data(), out.data(), m, k, n, /*accumulate=*/false);
  bool rg = needs_grad(a) || needs_grad(b);
  Id id = push(std::move(out), rg, nullptr);
  attach(id, [a, b, id, m, k, n](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a))
      kernels::gemm_nt(g.data(), t.value(b).data(), t.grad_mut(a).data(), m, n, k, true);
    if (t.needs_grad(b))
      kernels::gemm_tn(t.value(a).data(), g.data(), t.grad_mut(b).data(), k, m, n, true);
  });
  check_node(id, "matmul");
  return id;
}

Tape::Id Tape::matmul_nt(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  const std::size_t m = ta.rows(), k = ta.cols(), n = tb.rows();
  if (tb.cols() != k)
    throw ShapeMismatch("matmul_nt: " + shape_str(ta) + " * " + shape_str(tb) + "^T");
  Tensor out({m, n});
  kernels::gemm_nt(ta.data(), tb.data(), out.data(), m, k, n, false);
  bool rg = needs_grad(a) || needs_grad(b);
  Id id = push(std::move(out), rg, nullptr);
  attach(id, [a, b, id, m, k, n](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a))
      kernels::gemm_nn(g.data(), t.value(b).data(), t.grad_mut(a).data(), m, n, k, true);
    if (t.needs_grad(b))
      kernels::gemm_tn(g.data(), t.value(a).data(), t.grad_mut(b).data(), n, m, k, true);
  });
  check_node(id, "matmul_nt");
  return id;
}

Tape::Id Tape::add(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb))
    throw ShapeMismatch("add: " + shape_str(ta) + " vs " + shape_str(tb));
  Tensor out(ta.dims());
  kernels::vadd(out.data(), ta.data(), tb.data(), ta.size());
  bool rg = needs_grad(a) || needs_grad(b);
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [a, b, id](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a)) kernels::axpy(t.grad_mut(a).data(), g.data(), 1.0, g.size());
    if (t.needs_grad(b)) kernels::axpy(t.grad_mut(b).data(), g.data(), 1.0, g.size());
  };
  check_node(id, "add");
  return id;
}

Tape::Id Tape::sub(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb))
    throw ShapeMismatch("sub: " + shape_str(ta) + " vs " + shape_str(tb));
  Tensor out(ta.dims());
  kernels::vsub(out.data(), ta.data(), tb.data(), ta.size());
  bool rg = needs_grad(a) || needs_grad(b);
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [a, b, id](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a)) kernels::axpy(t.grad_mut(a).data(), g.data(), 1.0, g.size());
    if (t.needs_grad(b)) kernels::axpy(t.grad_mut(b).data(), g.data(), -1.0, g.size());
  };
  check_node(id, "sub");
  return id;
}

Tape::Id Tape::mul(Id a, Id b) {
  const Tensor& ta = value(a);
  const Tensor& tb = value(b);
  if (!ta.same_shape(tb))
    throw ShapeMismatch("mul: " + shape_str(ta) + " vs " + shape_str(tb));
  Tensor out(ta.dims());
  kernels::vmul(out.data(), ta.data(), tb.data(), ta.size());
  bool rg = needs_grad(a) || needs_grad(b);
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [a, b, id](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a)) {
      const Tensor& vb = t.value(b);
      Tensor& da = t.grad_mut(a);
      for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * vb[i];
    }
    if (t.needs_grad(b)) {
      const Tensor& va = t.value(a);
      Tensor& db = t.grad_mut(b);
      for (std::size_t i = 0; i < g.size(); ++i) db[i] += g[i] * va[i];
    }
  };
  check_node(id, "mul");
  return id;
}

Tape::Id Tape::scale(Id a, double c) {
  const Tensor& ta = value(a);
  Tensor out(ta.dims());
  kernels::vscale(out.data(), ta.data(), c, ta.size());
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, c, id](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a)) kernels::axpy(t.grad_mut(a).data(), g.data(), c, g.size());
  };
  check_node(id, "scale");
  return id;
}

Tape::Id Tape::add_rowvec(Id a, Id v) {
  const Tensor& ta = value(a);
  const Tensor& tv = value(v);
  const std::size_t m = ta.rows(), n = ta.cols();
  if (tv.size() != n)
    throw ShapeMismatch("add_rowvec: " + shape_str(ta) + " + " + shape_str(tv));
  Tensor out(ta.dims());
  for (std::size_t i = 0; i < m; ++i)
    kernels::vadd(out.data() + i * n, ta.data() + i * n, tv.data(), n);
  bool rg = needs_grad(a) || needs_grad(v);
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [a, v, id, m, n](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    if (t.needs_grad(a)) kernels::axpy(t.grad_mut(a).data(), g.data(), 1.0, g.size());
    if (t.needs_grad(v)) {
      Tensor& dv = t.grad_mut(v);
      for (std::size_t i = 0; i < m; ++i)
        kernels::axpy(dv.data(), g.data() + i * n, 1.0, n);
    }
  };
  check_node(id, "add_rowvec");
  return id;
}

Tape::Id Tape::concat_cols(const std::vector<Id>& parts) {
  if (parts.empty()) throw ShapeMismatch("concat_cols: no inputs");
  const std::size_t m = value(parts[0]).rows();
  std::size_t total = 0;
  bool rg = false;
  for (Id p : parts) {
    if (value(p).rows() != m) throw ShapeMismatch("concat_cols: row counts differ");
    total += value(p).cols();
    rg = rg || needs_grad(p);
  }
  Tensor out({m, total});
  std::size_t off = 0;
  for (Id p : parts) {
    const Tensor& tp = value(p);
    const std::size_t w = tp.cols();
    for (std::size_t i = 0; i < m; ++i)
      std::memcpy(out.data() + i * total + off, tp.data() + i * w, w * sizeof(double));
    off += w;
  }
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [parts, id, m, total](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    std::size_t off = 0;
    for (Id p : parts) {
      const std::size_t w = t.value(p).cols();
      if (t.needs_grad(p)) {
        Tensor& dp = t.grad_mut(p);
        for (std::size_t i = 0; i < m; ++i)
          kernels::axpy(dp.data() + i * w, g.data() + i * total + off, 1.0, w);
      }
      off += w;
    }
  };
  check_node(id, "concat_cols");
  return id;
}

Tape::Id Tape::stack_rows(const std::vector<Id>& rows) {
  if (rows.empty()) throw ShapeMismatch("stack_rows: no inputs");
  const std::size_t d = value(rows[0]).size();
  bool rg = false;
  for (Id r : rows) {
    if (value(r).size() != d || value(r).rows() != 1)
      throw ShapeMismatch("stack_rows: inputs must be single rows of equal width");
    rg = rg || needs_grad(r);
  }
  Tensor out({rows.size(), d});
  for (std::size_t i = 0; i < rows.size(); ++i)
    std::memcpy(out.data() + i * d, value(rows[i]).data(), d * sizeof(double));
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [rows, id, d](Tape& t) {
    const Tensor& g = t.nodes_[id].grad;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (t.needs_grad(rows[i]))
        kernels::axpy(t.grad_mut(rows[i]).data(), g.data() + i * d, 1.0, d);
  };
  check_node(id, "stack_rows");
  return id;
}

Tape::Id Tape::relu(Id a) {
  const Tensor& ta = value(a);
  Tensor out(ta.dims());
  kernels::relu_fwd(out.data(), ta.data(), ta.size());
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    kernels::relu_bwd_acc(t.grad_mut(a).data(), t.value(a).data(), g.data(), g.size());
  };
  check_node(id, "relu");
  return id;
}

Tape::Id Tape::dropout(Id a, double p, Rng& rng, Mode mode) {
  if (p < 0.0 || p > 1.0) throw OutOfDomain("dropout: p must be in [0, 1]");
  const Tensor& ta = value(a);
  if (mode == Mode::kEval || p == 0.0) {
    Tensor out = ta;
    Id id = push(std::move(out), needs_grad(a), nullptr);
    nodes_[id].backward = [a, id](Tape& t) {
      if (!t.needs_grad(a)) return;
      const Tensor& g = t.nodes_[id].grad;
      kernels::axpy(t.grad_mut(a).data(), g.data(), 1.0, g.size());
    };
    return id;
  }
  const double keep = 1.0 - p;
  auto mask = std::make_shared<std::vector<double>>(ta.size(), 0.0);
  Tensor out(ta.dims());
  for (std::size_t i = 0; i < ta.size(); ++i) {
    if (rng.uniform() >= p) {
      (*mask)[i] = 1.0 / keep;
      out[i] = ta[i] * (*mask)[i];
    }
  }
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, mask](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    Tensor& da = t.grad_mut(a);
    for (std::size_t i = 0; i < g.size(); ++i) da[i] += g[i] * (*mask)[i];
  };
  check_node(id, "dropout");
  return id;
}

Tape::Id Tape::gather_rows(Id a, std::vector<std::size_t> idx) {
  const Tensor& ta = value(a);
  const std::size_t m = ta.rows(), d = ta.cols();
  for (std::size_t i : idx)
    if (i >= m) throw IndexOutOfRange("gather_rows: index " + std::to_string(i));
  Tensor out({idx.size(), d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    std::memcpy(out.data() + r * d, ta.data() + idx[r] * d, d * sizeof(double));
  auto shared_idx = std::make_shared<std::vector<std::size_t>>(std::move(idx));
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, shared_idx, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    Tensor& da = t.grad_mut(a);
    for (std::size_t r = 0; r < shared_idx->size(); ++r)
      kernels::axpy(da.data() + (*shared_idx)[r] * d, g.data() + r * d, 1.0, d);
  };
  check_node(id, "gather_rows");
  return id;
}

Tape::Id Tape::scatter_sum_rows(Id a, std::vector<std::size_t> idx, std::size_t out_rows) {
  const Tensor& ta = value(a);
  const std::size_t d = ta.cols();
  if (idx.size() != ta.rows())
    throw ShapeMismatch("scatter_sum_rows: index count != row count");
  for (std::size_t i : idx)
    if (i >= out_rows) throw IndexOutOfRange("scatter_sum_rows: index " + std::to_string(i));
  Tensor out({out_rows, d});
  for (std::size_t r = 0; r < idx.size(); ++r)
    kernels::axpy(out.data() + idx[r] * d, ta.data() + r * d, 1.0, d);
  auto shared_idx = std::make_shared<std::vector<std::size_t>>(std::move(idx));
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, shared_idx, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    Tensor& da = t.grad_mut(a);
    for (std::size_t r = 0; r < shared_idx->size(); ++r)
      kernels::axpy(da.data() + r * d, g.data() + (*shared_idx)[r] * d, 1.0, d);
  };
  check_node(id, "scatter_sum_rows");
  return id;
}

Tape::Id Tape::row_sum(Id a) {
  const Tensor& ta = value(a);
  const std::size_t m = ta.rows(), d = ta.cols();
  Tensor out({d});
  for (std::size_t i = 0; i < m; ++i)
    kernels::axpy(out.data(), ta.data() + i * d, 1.0, d);
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, m, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    Tensor& da = t.grad_mut(a);
    for (std::size_t i = 0; i < m; ++i)
      kernels::axpy(da.data() + i * d, g.data(), 1.0, d);
  };
  check_node(id, "row_sum");
  return id;
}

Tape::Id Tape::batch_norm(Id x, Id gamma, Id beta, BatchNormState& state) {
  const Tensor& tx = value(x);
  const std::size_t n = tx.rows(), d = tx.cols();
  if (n < 1) throw ShapeMismatch("batch_norm: empty batch");
  if (value(gamma).size() != d || value(beta).size() != d)
    throw ShapeMismatch("batch_norm: scale/shift width mismatch");
  if (!state.running_mean || !state.running_var ||
      state.running_mean->size() != d || state.running_var->size() != d)
    throw ShapeMismatch("batch_norm: running stats missing or wrong width");

  auto xhat = std::make_shared<Tensor>(Tensor({n, d}));
  auto invstd = std::make_shared<std::vector<double>>(d, 0.0);
  Tensor out({n, d});
  const double* g = value(gamma).data();
  const double* b = value(beta).data();

  if (state.mode == Mode::kTrain) {
    std::vector<double> mean(d, 0.0), var(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      kernels::axpy(mean.data(), tx.data() + i * d, 1.0, d);
    for (std::size_t j = 0; j < d; ++j) mean[j] /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double c = tx[i * d + j] - mean[j];
        var[j] += c * c;
      }
    for (std::size_t j = 0; j < d; ++j) var[j] /= static_cast<double>(n);
    for (std::size_t j = 0; j < d; ++j)
      (*invstd)[j] = 1.0 / std::sqrt(var[j] + state.epsilon);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double xh = (tx[i * d + j] - mean[j]) * (*invstd)[j];
        (*xhat)[i * d + j] = xh;
        out[i * d + j] = g[j] * xh + b[j];
      }
    // Running stats: biased batch variance is used for normalization, the
    // unbiased estimate is what gets tracked.
    Tensor& rm = *state.running_mean;
    Tensor& rv = *state.running_var;
    const double mom = state.momentum;
    const double bessel = n > 1 ? static_cast<double>(n) / static_cast<double>(n - 1) : 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      rm[j] = (1.0 - mom) * rm[j] + mom * mean[j];
      rv[j] = (1.0 - mom) * rv[j] + mom * var[j] * bessel;
    }
  } else {
    const Tensor& rm = *state.running_mean;
    const Tensor& rv = *state.running_var;
    for (std::size_t j = 0; j < d; ++j)
      (*invstd)[j] = 1.0 / std::sqrt(rv[j] + state.epsilon);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double xh = (tx[i * d + j] - rm[j]) * (*invstd)[j];
        (*xhat)[i * d + j] = xh;
        out[i * d + j] = g[j] * xh + b[j];
      }
  }

  bool rg = needs_grad(x) || needs_grad(gamma) || needs_grad(beta);
  const bool train = state.mode == Mode::kTrain;
  Id id = push(std::move(out), rg, nullptr);
  nodes_[id].backward = [x, gamma, beta, id, xhat, invstd, n, d, train](Tape& t) {
    const Tensor& gr = t.nodes_[id].grad;
    std::vector<double> sum_g(d, 0.0), sum_gx(d, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        sum_g[j] += gr[i * d + j];
        sum_gx[j] += gr[i * d + j] * (*xhat)[i * d + j];
      }
    if (t.needs_grad(gamma)) {
      Tensor& dg = t.grad_mut(gamma);
      for (std::size_t j = 0; j < d; ++j) dg[j] += sum_gx[j];
    }
    if (t.needs_grad(beta)) {
      Tensor& db = t.grad_mut(beta);
      for (std::size_t j = 0; j < d; ++j) db[j] += sum_g[j];
    }
    if (t.needs_grad(x)) {
      const double* gm = t.value(gamma).data();
      Tensor& dx = t.grad_mut(x);
      if (train) {
        // Full backward through the batch statistics.
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j) {
            const double term = static_cast<double>(n) * gr[i * d + j] - sum_g[j] -
                                (*xhat)[i * d + j] * sum_gx[j];
            dx[i * d + j] += gm[j] * (*invstd)[j] * inv_n * term;
          }
      } else {
        for (std::size_t i = 0; i < n; ++i)
          for (std::size_t j = 0; j < d; ++j)
            dx[i * d + j] += gr[i * d + j] * gm[j] * (*invstd)[j];
      }
    }
  };
  check_node(id, "batch_norm");
  return id;
}

Tape::Id Tape::l2_normalize_rows(Id a) {
  const Tensor& ta = value(a);
  const std::size_t m = ta.rows(), d = ta.cols();
  auto norms = std::make_shared<std::vector<double>>(m, 0.0);
  Tensor out({m, d});
  for (std::size_t i = 0; i < m; ++i) {
    const double nrm = std::sqrt(kernels::dot(ta.data() + i * d, ta.data() + i * d, d));
    if (nrm < 1e-12) throw NumericError("l2_normalize_rows: zero-norm row");
    (*norms)[i] = nrm;
    kernels::vscale(out.data() + i * d, ta.data() + i * d, 1.0 / nrm, d);
  }
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, norms, m, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& y = t.nodes_[id].value;
    Tensor& da = t.grad_mut(a);
    for (std::size_t i = 0; i < m; ++i) {
      const double gy = kernels::dot(g.data() + i * d, y.data() + i * d, d);
      const double inv = 1.0 / (*norms)[i];
      for (std::size_t j = 0; j < d; ++j)
        da[i * d + j] += (g[i * d + j] - y[i * d + j] * gy) * inv;
    }
  };
  check_node(id, "l2_normalize_rows");
  return id;
}

Tape::Id Tape::logsumexp_rows_masked(Id a, Tensor mask) {
  const Tensor& ta = value(a);
  const std::size_t m = ta.rows(), d = ta.cols();
  if (!ta.same_shape(mask) && !(mask.rows() == m && mask.cols() == d))
    throw ShapeMismatch("logsumexp_rows_masked: mask shape mismatch");
  Tensor out({m});
  for (std::size_t i = 0; i < m; ++i) {
    double mx = -HUGE_VAL;
    for (std::size_t j = 0; j < d; ++j)
      if (mask[i * d + j] != 0.0 && ta[i * d + j] > mx) mx = ta[i * d + j];
    if (mx == -HUGE_VAL)
      throw ShapeMismatch("logsumexp_rows_masked: empty mask row");
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j)
      if (mask[i * d + j] != 0.0) s += std::exp(ta[i * d + j] - mx);
    out[i] = mx + std::log(s);
  }
  auto shared_mask = std::make_shared<Tensor>(std::move(mask));
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, shared_mask, m, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    const Tensor& lse = t.nodes_[id].value;
    const Tensor& ta = t.value(a);
    Tensor& da = t.grad_mut(a);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if ((*shared_mask)[i * d + j] != 0.0)
          da[i * d + j] += g[i] * std::exp(ta[i * d + j] - lse[i]);
  };
  check_node(id, "logsumexp_rows_masked");
  return id;
}

Tape::Id Tape::select_entries(Id a, std::vector<std::size_t> rows, std::vector<std::size_t> cols) {
  const Tensor& ta = value(a);
  if (rows.size() != cols.size())
    throw ShapeMismatch("select_entries: row/col count mismatch");
  const std::size_t m = ta.rows(), d = ta.cols();
  Tensor out({rows.size()});
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k] >= m || cols[k] >= d) throw IndexOutOfRange("select_entries");
    out[k] = ta[rows[k] * d + cols[k]];
  }
  auto sr = std::make_shared<std::vector<std::size_t>>(std::move(rows));
  auto sc = std::make_shared<std::vector<std::size_t>>(std::move(cols));
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, sr, sc, d](Tape& t) {
    if (!t.needs_grad(a)) return;
    const Tensor& g = t.nodes_[id].grad;
    Tensor& da = t.grad_mut(a);
    for (std::size_t k = 0; k < sr->size(); ++k)
      da[(*sr)[k] * d + (*sc)[k]] += g[k];
  };
  check_node(id, "select_entries");
  return id;
}

Tape::Id Tape::mean_all(Id a) {
  const Tensor& ta = value(a);
  const std::size_t n = ta.size();
  if (n == 0) throw ShapeMismatch("mean_all: empty tensor");
  Tensor out = Tensor::scalar(kernels::vsum(ta.data(), n) / static_cast<double>(n));
  Id id = push(std::move(out), needs_grad(a), nullptr);
  nodes_[id].backward = [a, id, n](Tape& t) {
    if (!t.needs_grad(a)) return;
    const double g = t.nodes_[id].grad[0] / static_cast<double>(n);
    Tensor& da = t.grad_mut(a);
    for (std::size_t i = 0; i < n; ++i) da[i] += g;
  };
  check_node(id, "mean_all");
  return id;
}

Tape::Id Tape::cross_entropy(Id logits, std::vector<int> targets) {
  const Tensor& tl = value(logits);
  const std::size_t n = tl.rows(), c = tl.cols();
  if (targets.size() != n) throw BadTarget("cross_entropy: target count != row count");
  for (int t : targets)
    if (t < 0 || static_cast<std::size_t>(t) >= c)
      throw BadTarget("cross_entropy: class index out of range");
  auto lse = std::make_shared<std::vector<double>>(n, 0.0);
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double mx = tl[i * c];
    for (std::size_t j = 1; j < c; ++j) mx = std::max(mx, tl[i * c + j]);
    double s = 0.0;
    for (std::size_t j = 0; j < c; ++j) s += std::exp(tl[i * c + j] - mx);
    (*lse)[i] = mx + std::log(s);
    loss += (*lse)[i] - tl[i * c + targets[i]];
  }
  loss /= static_cast<double>(n);
  auto st = std::make_shared<std::vector<int>>(std::move(targets));
  Id id = push(Tensor::scalar(loss), needs_grad(logits), nullptr);
  nodes_[id].backward = [logits, id, st, lse, n, c](Tape& t) {
    if (!t.needs_grad(logits)) return;
    const double g = t.nodes_[id].grad[0] / static_cast<double>(n);
    const Tensor& tl = t.value(logits);
    Tensor& dl = t.grad_mut(logits);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < c; ++j)
        dl[i * c + j] += g * std::exp(tl[i * c + j] - (*lse)[i]);
      dl[i * c + (*st)[i]] -= g;
    }
  };
  check_node(id, "cross_entropy");
  return id;
}

Tape::Id Tape::mse(Id pred, Tensor target) {
  const Tensor& tp = value(pred);
  if (tp.size() != target.size())
    throw ShapeMismatch("mse: size mismatch");
  const std::size_t n = tp.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = tp[i] - target[i];
    loss += d * d;
  }
  loss /= static_cast<double>(n);
  auto st = std::make_shared<Tensor>(std::move(target));
  Id id = push(Tensor::scalar(loss), needs_grad(pred), nullptr);
  nodes_[id].backward = [pred, id, st, n](Tape& t) {
    if (!t.needs_grad(pred)) return;
    const double g = t.nodes_[id].grad[0] * 2.0 / static_cast<double>(n);
    const Tensor& tp = t.value(pred);
    Tensor& dp = t.grad_mut(pred);
    for (std::size_t i = 0; i < n; ++i) dp[i] += g * (tp[i] - (*st)[i]);
  };
  check_node(id, "mse");
  return id;
}

Tape::Id Tape::bce_with_logits(Id logits, Tensor targets) {
  const Tensor& tl = value(logits);
  if (tl.size() != targets.size())
    throw ShapeMismatch("bce_with_logits: size mismatch");
  const std::size_t n = tl.size();
  double loss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double z = tl[i];
    const double t = targets[i];
    loss += std::max(z, 0.0) - z * t + std::log1p(std::exp(-std::abs(z)));
  }
  loss /= static_cast<double>(n);
  auto st = std::make_shared<Tensor>(std::move(targets));
  Id id = push(Tensor::scalar(loss), needs_grad(logits), nullptr);
  nodes_[id].backward = [logits, id, st, n](Tape& t) {
    if (!t.needs_grad(logits)) return;
    const double g = t.nodes_[id].grad[0] / static_cast<double>(n);
    const Tensor& tl = t.value(logits);
    Tensor& dl = t.grad_mut(logits);
    for (std::size_t i = 0; i < n; ++i) {
      const double sig = 1.0 / (1.0 + std::exp(-tl[i]));
      dl[i] += g * (sig - (*st)[i]);
    }
  };
  check_node(id, "bce_with_logits");
  return id;
}

void Tape::backward(Id root) {
  if (value(root).size() != 1)
    throw ShapeMismatch("backward: root must be a scalar");
  backward_visits_ = 0;
  if (nodes_[root].requires_grad) {
    grad_mut(root).fill(0.0);
    nodes_[root].grad[0] = 1.0;
    for (std::size_t i = root + 1; i-- > 0;) {
      Node& n = nodes_[i];
      // Ops with an empty grad received no flow from the root; skip them.
      if (n.backward && n.requires_grad && !n.grad.empty()) {
        n.backward(*this);
        ++backward_visits_;
      }
    }
  }
  for (auto& [id, bind] : bindings_) {
    const Tensor& src = nodes_[id].grad;
    if (src.empty()) continue;
    Tensor& dst = bind.first->grad(bind.second);
    kernels::axpy(dst.data(), src.data(), 1.0, src.size());
  }
}

}  // namespace gearnetk
