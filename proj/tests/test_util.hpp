//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "gearnetk/rng.hpp"
#include "gearnetk/structure.hpp"
#include "gearnetk/tensor.hpp"

namespace gearnetk::test {

inline Tensor random_tensor(std::vector<std::size_t> dims, Rng& rng) {
  Tensor t(std::move(dims));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.normal();
  return t;
}

// Max relative error between analytic gradients and central finite
// differences of `loss_of(params)`; the flat vector view spans every
// trainable parameter of `params` in name order.
//
// Central differences of a double-precision loss at step h carry an absolute
// noise floor of about eps * |L| / h (~1e-10 for h = 1e-6 and |L| ~ 1), so
// discrepancies below `atol` count as zero: they are indistinguishable from
// quadrature noise for near-zero true gradients, while a real gradient bug
// shows up at the gradient's own scale, orders of magnitude above.
//
// loss_of must be deterministic and must populate gradients through a tape
// bound to `params` when `with_grad` is true.
inline double max_grad_rel_error(
    ParameterStore& params,
    const std::function<double(bool with_grad)>& loss_of,
    double step = 1e-6, double denom_guard = 1e-8, double atol = 1e-7) {
  params.zero_grads();
  loss_of(/*with_grad=*/true);

  double worst = 0.0;
  params.for_each([&](const std::string&, Tensor& value, Tensor& grad, bool trainable) {
    if (!trainable) return;
    for (std::size_t i = 0; i < value.size(); ++i) {
      const double keep = value[i];
      value[i] = keep + step;
      const double up = loss_of(false);
      value[i] = keep - step;
      const double down = loss_of(false);
      value[i] = keep;
      const double fd = (up - down) / (2.0 * step);
      const double diff = std::abs(fd - grad[i]);
      if (diff <= atol) continue;
      const double denom = std::max({std::abs(fd), std::abs(grad[i]), denom_guard});
      worst = std::max(worst, diff / denom);
    }
  });
  return worst;
}

// Random synthetic protein: a self-avoiding-ish random walk with ~3.8 A
// steps, the backbone spacing scale of real chains.
inline ProteinStructure random_protein(std::size_t n, Rng& rng) {
  ProteinStructure s;
  s.id = "synthetic" + std::to_string(rng.seed() & 0xffff);
  Vec3 p{0, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    s.residue_types.push_back(static_cast<int>(rng.bounded(20)));
    s.coords.push_back(p);
    Vec3 dir{rng.normal(), rng.normal(), rng.normal()};
    const double nrm = norm(dir);
    p = p + dir * (3.8 / (nrm > 1e-9 ? nrm : 1.0));
  }
  return s;
}

// Uniform random coordinates in a cubic box; used by the graph oracles.
inline ProteinStructure random_protein_in_box(std::size_t n, double box, Rng& rng) {
  ProteinStructure s;
  s.id = "box";
  for (std::size_t i = 0; i < n; ++i) {
    s.residue_types.push_back(static_cast<int>(rng.bounded(21)));
    s.coords.push_back({rng.uniform(0.0, box), rng.uniform(0.0, box), rng.uniform(0.0, box)});
  }
  return s;
}

}  // namespace gearnetk::test
