//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace gearnetk {

void PredictionTable::validate() const {
  if (scores.size() != num_proteins * num_terms || truth.size() != scores.size())
    throw ShapeMismatch("prediction table: array sizes do not match dimensions");
  for (double s : scores)
    if (!(s >= 0.0 && s <= 1.0))
      throw OutOfDomain("prediction table: score outside [0, 1]");
  for (std::uint8_t t : truth)
    if (t > 1) throw OutOfDomain("prediction table: truth entries must be 0/1");
}

PredictionTable PredictionTable::read(std::istream& in) {
  PredictionTable table;
  std::string line;
  if (!std::getline(in, line))
    throw SchemaError("prediction table: missing header line");
  {
    std::istringstream header(line);
    if (!(header >> table.num_proteins >> table.num_terms))
      throw SchemaError("prediction table: header must be '<proteins> <terms>'");
  }
  table.scores.reserve(table.num_proteins * table.num_terms);
  table.truth.reserve(table.num_proteins * table.num_terms);
  for (std::size_t p = 0; p < table.num_proteins; ++p) {
    if (!std::getline(in, line))
      throw SchemaError("prediction table: missing score row " + std::to_string(p + 1));
    std::istringstream row(line);
    double v = 0;
    for (std::size_t t = 0; t < table.num_terms; ++t) {
      if (!(row >> v))
        throw SchemaError("prediction table: bad score row " + std::to_string(p + 1));
      table.scores.push_back(v);
    }
  }
  for (std::size_t p = 0; p < table.num_proteins; ++p) {
    if (!std::getline(in, line))
      throw SchemaError("prediction table: missing truth row " + std::to_string(p + 1));
    std::istringstream row(line);
    int v = 0;
    for (std::size_t t = 0; t < table.num_terms; ++t) {
      if (!(row >> v) || (v != 0 && v != 1))
        throw SchemaError("prediction table: bad truth row " + std::to_string(p + 1));
      table.truth.push_back(static_cast<std::uint8_t>(v));
    }
  }
  table.validate();
  return table;
}

PredictionTable PredictionTable::read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open prediction table: " + path);
  return read(in);
}

void PredictionTable::write(std::ostream& out) const {
  out << num_proteins << ' ' << num_terms << '\n';
  char buf[32];
  for (std::size_t p = 0; p < num_proteins; ++p) {
    for (std::size_t t = 0; t < num_terms; ++t) {
      std::snprintf(buf, sizeof(buf), "%.17g", score(p, t));
      out << (t ? " " : "") << buf;
    }
    out << '\n';
  }
  for (std::size_t p = 0; p < num_proteins; ++p) {
    for (std::size_t t = 0; t < num_terms; ++t)
      out << (t ? " " : "") << (positive(p, t) ? 1 : 0);
    out << '\n';
  }
}

void PredictionTable::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write prediction table: " + path);
  write(out);
}

double fmax(const PredictionTable& table) {
  table.validate();
  if (table.num_proteins == 0) throw ShapeMismatch("fmax: empty table");
  const std::size_t n = table.num_proteins;
  double best = 0.0;
  for (int step = 0; step <= 100; ++step) {
    const double t = static_cast<double>(step) / 100.0;
    double precision_sum = 0.0;
    std::size_t with_predictions = 0;  // M(t)
    double recall_sum = 0.0;
    for (std::size_t p = 0; p < n; ++p) {
      std::size_t predicted = 0, true_terms = 0, hits = 0;
      for (std::size_t f = 0; f < table.num_terms; ++f) {
        const bool pred = table.score(p, f) >= t;
        const bool pos = table.positive(p, f);
        predicted += pred;
        true_terms += pos;
        hits += pred && pos;
      }
      if (predicted > 0) {
        precision_sum += static_cast<double>(hits) / static_cast<double>(predicted);
        ++with_predictions;
      }
      if (true_terms > 0)
        recall_sum += static_cast<double>(hits) / static_cast<double>(true_terms);
    }
    if (with_predictions == 0) continue;  // F(t) = 0
    const double precision = precision_sum / static_cast<double>(with_predictions);
    const double recall = recall_sum / static_cast<double>(n);
    if (precision + recall > 0.0)
      best = std::max(best, 2.0 * precision * recall / (precision + recall));
  }
  return best;
}

double aupr_pair(const PredictionTable& table) {
  table.validate();
  std::size_t total_pos = 0;
  for (std::uint8_t t : table.truth) total_pos += t;
  if (total_pos == 0) throw NoPositives("aupr_pair: no positive protein-term pair");

  // Descending score sweep with tied scores grouped as one step.
  std::vector<std::size_t> order(table.scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return table.scores[a] > table.scores[b];
  });

  double ap = 0.0;
  double prev_recall = 0.0;
  std::size_t tp = 0, seen = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j < order.size() && table.scores[order[j]] == table.scores[order[i]]) {
      tp += table.truth[order[j]];
      ++seen;
      ++j;
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(total_pos);
    const double precision = static_cast<double>(tp) / static_cast<double>(seen);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
    i = j;
  }
  return ap;
}

double accuracy(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.rows(), c = logits.cols();
  if (n == 0) throw ShapeMismatch("accuracy: empty logits");
  if (labels.size() != n) throw BadTarget("accuracy: label count != row count");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < c; ++j)
      if (logits.at(i, j) > logits.at(i, arg)) arg = j;  // ties keep the lowest index
    if (labels[i] >= 0 && static_cast<std::size_t>(labels[i]) == arg) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

}  // namespace gearnetk
