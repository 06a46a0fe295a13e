//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/structure.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <compare>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace gearnetk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

const std::map<std::string_view, char, std::less<>> kThreeLetter = {
    {"ALA", 'A'}, {"ARG", 'R'}, {"ASN", 'N'}, {"ASP", 'D'}, {"CYS", 'C'},
    {"GLN", 'Q'}, {"GLU", 'E'}, {"GLY", 'G'}, {"HIS", 'H'}, {"ILE", 'I'},
    {"LEU", 'L'}, {"LYS", 'K'}, {"MET", 'M'}, {"PHE", 'F'}, {"PRO", 'P'},
    {"SER", 'S'}, {"THR", 'T'}, {"TRP", 'W'}, {"TYR", 'Y'}, {"VAL", 'V'}};

}  // namespace

int residue_code_from_letter(char letter) {
  const auto pos = kResidueAlphabet.find(static_cast<char>(std::toupper(
      static_cast<unsigned char>(letter))));
  return pos == std::string_view::npos ? kUnknownResidue : static_cast<int>(pos);
}

int residue_code_from_name(std::string_view name) {
  const auto it = kThreeLetter.find(trim(name));
  return it == kThreeLetter.end() ? kUnknownResidue : residue_code_from_letter(it->second);
}

char residue_letter_from_code(int code) {
  if (code < 0 || code >= static_cast<int>(kResidueAlphabet.size())) return 'X';
  return kResidueAlphabet[static_cast<std::size_t>(code)];
}

void ProteinStructure::validate() const {
  if (residue_types.size() != coords.size())
    throw SchemaError("structure " + id + ": residue/coordinate count mismatch");
  if (residue_types.empty()) throw EmptyStructure("structure " + id + ": no residues");
  for (int t : residue_types)
    if (t < 0 || t > kUnknownResidue)
      throw SchemaError("structure " + id + ": residue code out of range");
  for (const Vec3& c : coords)
    if (!c.finite()) throw SchemaError("structure " + id + ": non-finite coordinate");
}

// ---------------------------------------------------------------------------
// PDB
// ---------------------------------------------------------------------------

namespace {

// Fixed-column field (1-based, inclusive), blank-trimmed. Returns an empty
// view when the line is too short.
std::string_view field(const std::string& line, std::size_t from, std::size_t to) {
  if (line.size() < from) return {};
  const std::size_t begin = from - 1;
  const std::size_t len = std::min(to, line.size()) - begin;
  return trim(std::string_view(line).substr(begin, len));
}

double parse_coord(const std::string& line, std::size_t from, std::size_t to,
                   const char* what) {
  const std::string_view f = field(line, from, to);
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), out);
  if (ec != std::errc{} || ptr != f.data() + f.size() || f.empty())
    throw MalformedRecord(std::string("non-numeric ") + what + " field in ATOM record: '" +
                          std::string(f) + "'");
  return out;
}

struct ResidueKey {
  char chain;
  int seq;
  char icode;
  auto operator<=>(const ResidueKey&) const = default;
};

}  // namespace

ProteinStructure parse_pdb(std::istream& in, const std::string& id) {
  struct Entry {
    int type;
    Vec3 coord;
  };
  std::map<ResidueKey, Entry> residues;  // ordered by (chain, seq, icode)
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("ENDMDL", 0) == 0) break;  // first model only
    if (line.rfind("ATOM", 0) != 0 || field(line, 1, 6) != "ATOM") continue;
    if (field(line, 13, 16) != "CA") continue;
    ResidueKey key;
    key.chain = line.size() >= 22 ? line[21] : ' ';
    const std::string_view seq = field(line, 23, 26);
    int seqnum = 0;
    const auto [ptr, ec] = std::from_chars(seq.data(), seq.data() + seq.size(), seqnum);
    if (ec != std::errc{} || ptr != seq.data() + seq.size() || seq.empty())
      throw MalformedRecord("non-numeric residue sequence number in ATOM record: '" +
                            std::string(seq) + "'");
    key.seq = seqnum;
    key.icode = line.size() >= 27 ? line[26] : ' ';
    if (residues.count(key)) continue;  // first altLoc kept
    Entry e;
    e.type = residue_code_from_name(field(line, 18, 20));
    e.coord = {parse_coord(line, 31, 38, "x"), parse_coord(line, 39, 46, "y"),
               parse_coord(line, 47, 54, "z")};
    residues.emplace(key, e);
  }
  if (residues.empty())
    throw EmptyStructure(id.empty() ? "no CA atoms found" : "no CA atoms found in " + id);
  ProteinStructure s;
  s.id = id;
  s.residue_types.reserve(residues.size());
  s.coords.reserve(residues.size());
  for (const auto& [key, e] : residues) {
    s.residue_types.push_back(e.type);
    s.coords.push_back(e.coord);
  }
  return s;
}

ProteinStructure parse_pdb_string(std::string_view text, const std::string& id) {
  std::istringstream in{std::string(text)};
  return parse_pdb(in, id);
}

ProteinStructure parse_pdb_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open PDB file: " + path);
  return parse_pdb(in, path);
}

// ---------------------------------------------------------------------------
// JSONL
// ---------------------------------------------------------------------------

namespace {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

DatasetRecord record_from_json(const nlohmann::json& j, std::size_t line_no) {
  const auto fail = [line_no](const std::string& msg) -> SchemaError {
    return SchemaError("line " + std::to_string(line_no) + ": " + msg);
  };
  if (!j.is_object()) throw fail("record is not a JSON object");
  DatasetRecord rec;
  if (!j.contains("id") || !j.at("id").is_string()) throw fail("missing string field 'id'");
  rec.structure.id = j.at("id").get<std::string>();

  if (j.contains("residue_types")) {
    for (const auto& v : j.at("residue_types")) {
      if (!v.is_number_integer()) throw fail("residue_types entries must be integers");
      const int code = v.get<int>();
      if (code < 0 || code > kUnknownResidue) throw fail("residue code out of range [0, 20]");
      rec.structure.residue_types.push_back(code);
    }
  } else if (j.contains("sequence")) {
    if (!j.at("sequence").is_string()) throw fail("'sequence' must be a string");
    for (char c : j.at("sequence").get<std::string>())
      rec.structure.residue_types.push_back(residue_code_from_letter(c));
  } else {
    throw fail("record needs 'residue_types' or 'sequence'");
  }

  if (!j.contains("coords") || !j.at("coords").is_array()) throw fail("missing array 'coords'");
  for (const auto& c : j.at("coords")) {
    if (!c.is_array() || c.size() != 3) throw fail("each coordinate must be a 3-array");
    Vec3 p{c[0].get<double>(), c[1].get<double>(), c[2].get<double>()};
    if (!p.finite()) throw fail("non-finite coordinate");
    rec.structure.coords.push_back(p);
  }
  if (rec.structure.coords.size() != rec.structure.residue_types.size())
    throw fail("coords length != sequence length");
  if (rec.structure.residue_types.empty()) throw fail("empty structure");

  if (j.contains("labels")) {
    if (!j.at("labels").is_array()) throw fail("'labels' must be an array");
    std::vector<std::uint8_t> labels;
    for (const auto& v : j.at("labels")) {
      if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
        throw fail("labels must be 0/1");
      labels.push_back(static_cast<std::uint8_t>(v.get<int>()));
    }
    rec.labels = std::move(labels);
  }
  return rec;
}

}  // namespace

std::vector<DatasetRecord> read_jsonl_dataset(std::istream& in) {
  std::vector<DatasetRecord> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError("line " + std::to_string(line_no) + ": invalid JSON: " + e.what());
    }
    out.push_back(record_from_json(j, line_no));
  }
  return out;
}

std::vector<DatasetRecord> read_jsonl_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset: " + path);
  return read_jsonl_dataset(in);
}

void write_jsonl_dataset(const std::vector<DatasetRecord>& records, std::ostream& out) {
  for (const DatasetRecord& rec : records) {
    // Hand-assembled so coordinates are always written with 17 significant
    // digits (value-preserving round trip).
    out << "{\"id\":" << nlohmann::json(rec.structure.id).dump() << ",\"residue_types\":[";
    for (std::size_t i = 0; i < rec.structure.residue_types.size(); ++i) {
      if (i) out << ',';
      out << rec.structure.residue_types[i];
    }
    out << "],\"coords\":[";
    for (std::size_t i = 0; i < rec.structure.coords.size(); ++i) {
      const Vec3& c = rec.structure.coords[i];
      if (i) out << ',';
      out << '[' << format_double(c.x) << ',' << format_double(c.y) << ','
          << format_double(c.z) << ']';
    }
    out << ']';
    if (rec.labels) {
      out << ",\"labels\":[";
      for (std::size_t i = 0; i < rec.labels->size(); ++i) {
        if (i) out << ',';
        out << static_cast<int>((*rec.labels)[i]);
      }
      out << ']';
    }
    out << "}\n";
  }
}

void write_jsonl_dataset(const std::vector<DatasetRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset: " + path);
  write_jsonl_dataset(records, out);
}

}  // namespace gearnetk
