//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gearnetk/tensor.hpp"

namespace gearnetk {

// Per-protein per-term scores in [0, 1] plus ground-truth bits.
struct PredictionTable {
  std::size_t num_proteins = 0;
  std::size_t num_terms = 0;
  std::vector<double> scores;        // row-major [num_proteins x num_terms]
  std::vector<std::uint8_t> truth;   // same layout, 0/1

  double score(std::size_t p, std::size_t t) const { return scores[p * num_terms + t]; }
  bool positive(std::size_t p, std::size_t t) const { return truth[p * num_terms + t] != 0; }
  void validate() const;

  // Text format: first line "<proteins> <terms>", then one score row per
  // protein, then one 0/1 truth row per protein.
  static PredictionTable read(std::istream& in);
  static PredictionTable read_file(const std::string& path);
  void write(std::ostream& out) const;
  void write_file(const std::string& path) const;
};

// Protein-centric maximum F-measure over the threshold grid
// {0.00, 0.01, ..., 1.00}. A term is predicted at threshold t when its score
// is >= t. Precision at t averages over proteins with at least one predicted
// term; recall averages over all proteins (0 for a protein with an empty
// truth set). F(t) = 0 when the precision average is empty or p + r = 0.
double fmax(const PredictionTable& table);

// Micro-averaged average precision over all protein-term pairs: descending
// score sweep with tied scores grouped, AP = sum (R_n - R_{n-1}) * P_n.
// Throws NoPositives when the truth matrix is all zero.
double aupr_pair(const PredictionTable& table);

// Argmax match rate; ties break toward the lowest class index.
double accuracy(const Tensor& logits, const std::vector<int>& labels);

}  // namespace gearnetk
