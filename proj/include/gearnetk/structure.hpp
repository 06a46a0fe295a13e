//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gearnetk/error.hpp"
#include "gearnetk/geometry.hpp"

namespace gearnetk {

// Residue alphabet: one-letter codes in alphabetical order, indices 0..19;
// 20 is the unknown type.
inline constexpr std::string_view kResidueAlphabet = "ACDEFGHIKLMNPQRSTVWY";
inline constexpr int kUnknownResidue = 20;
inline constexpr int kNumResidueTypes = 21;

// Index for a one-letter code, kUnknownResidue if not in the alphabet.
int residue_code_from_letter(char letter);
// Index for a PDB 3-letter residue name (e.g. "ALA"), kUnknownResidue if unknown.
int residue_code_from_name(std::string_view name);
char residue_letter_from_code(int code);  // 'X' for unknown

// One protein as a residue chain: type codes plus one alpha-carbon
// coordinate per residue.
struct ProteinStructure {
  std::string id;
  std::vector<int> residue_types;  // values in [0, 20]
  std::vector<Vec3> coords;        // angstrom

  std::size_t size() const { return residue_types.size(); }
  void validate() const;  // length/finiteness invariants
};

struct DatasetRecord {
  ProteinStructure structure;
  std::optional<std::vector<std::uint8_t>> labels;  // bit-vector over task terms
};

// Extracts one node per residue from the CA ATOM records of a PDB file.
// First model only, first altLoc kept, residues ordered by
// (chain, residue sequence number, insertion code).
// Throws MalformedRecord on non-numeric mandatory fields of a CA record and
// EmptyStructure when no CA atom is found.
ProteinStructure parse_pdb(std::istream& in, const std::string& id = "");
ProteinStructure parse_pdb_string(std::string_view text, const std::string& id = "");
ProteinStructure parse_pdb_file(const std::string& path);

// JSON-Lines dataset: one record per line with fields
//   id:        string
//   residue_types: [int]  (or "sequence": string of one-letter codes)
//   coords:    [[x,y,z], ...]
//   labels:    [0/1, ...]   (optional)
// Throws SchemaError with the 1-based line number on any invalid record.
std::vector<DatasetRecord> read_jsonl_dataset(const std::string& path);
std::vector<DatasetRecord> read_jsonl_dataset(std::istream& in);
void write_jsonl_dataset(const std::vector<DatasetRecord>& records, const std::string& path);
void write_jsonl_dataset(const std::vector<DatasetRecord>& records, std::ostream& out);

}  // namespace gearnetk
