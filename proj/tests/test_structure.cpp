//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/structure.hpp"

#include <gtest/gtest.h>

#include <cstring>
#include <sstream>

#include "gearnetk/checkpoint.hpp"
#include "test_util.hpp"

namespace gearnetk {
namespace {

// 80-column ATOM line with the given fields in the standard positions.
std::string atom_line(int serial, const std::string& atom, const std::string& res,
                      char chain, int resseq, double x, double y, double z,
                      char altloc = ' ', char icode = ' ') {
  char buf[128];
  std::snprintf(buf, sizeof(buf),
                "ATOM  %5d %-4s%c%-3s %c%4d%c   %8.3f%8.3f%8.3f  1.00  0.00",
                serial, atom.c_str(), altloc, res.c_str(), chain, resseq, icode, x, y, z);
  return buf;
}

TEST(ParsePdb, SingleCaLine) {
  const std::string text =
      "ATOM      1  CA  ALA A   1      11.104  13.207   2.100  1.00  0.00\n";
  const ProteinStructure s = parse_pdb_string(text);
  ASSERT_EQ(s.size(), 1u);
  EXPECT_EQ(s.residue_types[0], 0);  // ALA -> A -> 0
  EXPECT_DOUBLE_EQ(s.coords[0].x, 11.104);
  EXPECT_DOUBLE_EQ(s.coords[0].y, 13.207);
  EXPECT_DOUBLE_EQ(s.coords[0].z, 2.100);
}

TEST(ParsePdb, NonCaAtomsIgnored) {
  std::ostringstream text;
  text << atom_line(1, "N", "ALA", 'A', 1, 1, 1, 1) << "\n"
       << atom_line(2, "CA", "ALA", 'A', 1, 2, 2, 2) << "\n"
       << atom_line(3, "CB", "ALA", 'A', 1, 3, 3, 3) << "\n";
  const ProteinStructure s = parse_pdb_string(text.str());
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.coords[0].x, 2.0);
}

TEST(ParsePdb, ResidueAlphabetMapping) {
  std::ostringstream text;
  text << atom_line(1, "CA", "ALA", 'A', 1, 0, 0, 0) << "\n"
       << atom_line(2, "CA", "GLY", 'A', 2, 1, 0, 0) << "\n"
       << atom_line(3, "CA", "XXX", 'A', 3, 2, 0, 0) << "\n";
  const ProteinStructure s = parse_pdb_string(text.str());
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.residue_types[0], 0);   // A
  EXPECT_EQ(s.residue_types[1], 5);   // G
  EXPECT_EQ(s.residue_types[2], 20);  // unknown
}

TEST(ParsePdb, FirstAltLocKept) {
  std::ostringstream text;
  text << atom_line(1, "CA", "ALA", 'A', 1, 1, 0, 0, 'A') << "\n"
       << atom_line(2, "CA", "ALA", 'A', 1, 9, 0, 0, 'B') << "\n";
  const ProteinStructure s = parse_pdb_string(text.str());
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.coords[0].x, 1.0);
}

TEST(ParsePdb, FirstModelOnly) {
  std::ostringstream text;
  text << "MODEL        1\n"
       << atom_line(1, "CA", "ALA", 'A', 1, 1, 0, 0) << "\n"
       << "ENDMDL\n"
       << "MODEL        2\n"
       << atom_line(1, "CA", "ALA", 'A', 1, 9, 9, 9) << "\n"
       << "ENDMDL\n";
  const ProteinStructure s = parse_pdb_string(text.str());
  ASSERT_EQ(s.size(), 1u);
  EXPECT_DOUBLE_EQ(s.coords[0].x, 1.0);
}

TEST(ParsePdb, ResiduesOrderedByChainSeqIcode) {
  std::ostringstream text;
  text << atom_line(1, "CA", "ALA", 'B', 1, 4, 0, 0) << "\n"
       << atom_line(2, "CA", "GLY", 'A', 2, 2, 0, 0) << "\n"
       << atom_line(3, "CA", "CYS", 'A', 1, 1, 0, 0) << "\n"
       << atom_line(4, "CA", "SER", 'A', 2, 3, 0, 0, ' ', 'A') << "\n";
  const ProteinStructure s = parse_pdb_string(text.str());
  ASSERT_EQ(s.size(), 4u);
  EXPECT_DOUBLE_EQ(s.coords[0].x, 1.0);  // A/1
  EXPECT_DOUBLE_EQ(s.coords[1].x, 2.0);  // A/2
  EXPECT_DOUBLE_EQ(s.coords[2].x, 3.0);  // A/2 icode A
  EXPECT_DOUBLE_EQ(s.coords[3].x, 4.0);  // B/1
}

TEST(ParsePdb, PermutingNonAtomLinesIsANoop) {
  const std::string a = atom_line(1, "CA", "ALA", 'A', 1, 1, 0, 0);
  const std::string b = atom_line(2, "CA", "GLY", 'A', 2, 2, 0, 0);
  const std::string v1 = "REMARK notes\n" + a + "\nHETATM    1 FE   HEM A 900\n" + b + "\nTER\n";
  const std::string v2 = a + "\nTER\n" + b + "\nREMARK notes\nHETATM    1 FE   HEM A 900\n";
  const ProteinStructure s1 = parse_pdb_string(v1);
  const ProteinStructure s2 = parse_pdb_string(v2);
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1.residue_types[i], s2.residue_types[i]);
    EXPECT_DOUBLE_EQ(s1.coords[i].x, s2.coords[i].x);
  }
}

TEST(ParsePdb, MalformedCoordinateThrows) {
  std::string line = atom_line(1, "CA", "ALA", 'A', 1, 1, 2, 3);
  line.replace(30, 8, "  xx.yyy");
  EXPECT_THROW(parse_pdb_string(line + "\n"), MalformedRecord);
}

TEST(ParsePdb, EmptyStructureThrows) {
  EXPECT_THROW(parse_pdb_string("REMARK nothing here\n"), EmptyStructure);
  EXPECT_THROW(parse_pdb_string(""), EmptyStructure);
}

TEST(Jsonl, EmptyFileGivesEmptyList) {
  std::istringstream in("");
  EXPECT_TRUE(read_jsonl_dataset(in).empty());
}

TEST(Jsonl, SingleRecordRoundTrip) {
  std::istringstream in(
      R"({"id":"p1","residue_types":[0,5],"coords":[[0,0,0],[3.8,0,0]],"labels":[1,0,1]})"
      "\n");
  const auto records = read_jsonl_dataset(in);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].structure.size(), 2u);
  ASSERT_TRUE(records[0].labels.has_value());
  EXPECT_EQ(records[0].labels->size(), 3u);
}

TEST(Jsonl, SequenceFieldAccepted) {
  std::istringstream in(R"({"id":"p","sequence":"AGX","coords":[[0,0,0],[1,0,0],[2,0,0]]})"
                        "\n");
  const auto records = read_jsonl_dataset(in);
  ASSERT_EQ(records.size(), 1u);
  EXPECT_EQ(records[0].structure.residue_types, (std::vector<int>{0, 5, 20}));
}

TEST(Jsonl, LengthMismatchReportsLineNumber) {
  std::istringstream in(
      "{\"id\":\"ok\",\"residue_types\":[0],\"coords\":[[0,0,0]]}\n"
      "{\"id\":\"bad\",\"residue_types\":[0,1],\"coords\":[[0,0,0]]}\n");
  try {
    read_jsonl_dataset(in);
    FAIL() << "expected SchemaError";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(Jsonl, RoundTripPreservesData) {
  Rng rng(29);
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<DatasetRecord> records;
    const std::size_t count = 1 + rng.bounded(5);
    for (std::size_t i = 0; i < count; ++i) {
      DatasetRecord rec;
      rec.structure = test::random_protein(1 + rng.bounded(20), rng);
      rec.structure.id = "protein/" + std::to_string(i) + "\"quoted\"";
      if (rng.bounded(2)) {
        std::vector<std::uint8_t> labels(1 + rng.bounded(4));
        for (auto& l : labels) l = static_cast<std::uint8_t>(rng.bounded(2));
        rec.labels = labels;
      }
      records.push_back(std::move(rec));
    }
    std::ostringstream out;
    write_jsonl_dataset(records, out);
    std::istringstream in(out.str());
    const auto back = read_jsonl_dataset(in);
    ASSERT_EQ(back.size(), records.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(back[i].structure.id, records[i].structure.id);
      EXPECT_EQ(back[i].structure.residue_types, records[i].structure.residue_types);
      EXPECT_EQ(back[i].labels, records[i].labels);
      for (std::size_t j = 0; j < back[i].structure.size(); ++j) {
        EXPECT_EQ(back[i].structure.coords[j].x, records[i].structure.coords[j].x);
        EXPECT_EQ(back[i].structure.coords[j].y, records[i].structure.coords[j].y);
        EXPECT_EQ(back[i].structure.coords[j].z, records[i].structure.coords[j].z);
      }
    }
  }
}

TEST(Checkpoint, RoundTripIsBitExact) {
  Rng rng(31);
  for (int rep = 0; rep < 5; ++rep) {
    ParameterStore store;
    const std::size_t tensors = 1 + rng.bounded(6);
    for (std::size_t i = 0; i < tensors; ++i) {
      std::vector<std::size_t> dims(1 + rng.bounded(3));
      for (auto& d : dims) d = 1 + rng.bounded(7);
      store.add("tensor/" + std::to_string(i), test::random_tensor(dims, rng));
    }
    std::stringstream buf;
    save_checkpoint(store, buf);
    const ParameterStore back = load_checkpoint(buf);
    EXPECT_EQ(back.names(), store.names());
    store.for_each([&](const std::string& name, const Tensor& value, const Tensor&, bool) {
      const Tensor& loaded = back.value(name);
      ASSERT_TRUE(loaded.same_shape(value));
      EXPECT_EQ(std::memcmp(loaded.data(), value.data(), value.size() * sizeof(double)), 0);
    });
  }
}

TEST(Checkpoint, BadMagicThrows) {
  std::stringstream buf;
  buf << "XXXXXXXX";
  EXPECT_THROW(load_checkpoint(buf), BadMagic);
}

TEST(Checkpoint, VersionMismatchThrows) {
  ParameterStore store;
  store.add("w", Tensor({1}, {1.0}));
  std::stringstream buf;
  save_checkpoint(store, buf);
  std::string bytes = buf.str();
  bytes[8] = 99;  // bump the version field
  std::stringstream bad(bytes);
  EXPECT_THROW(load_checkpoint(bad), VersionMismatch);
}

TEST(Checkpoint, TruncationThrows) {
  ParameterStore store;
  store.add("weights", Tensor({4}, {1, 2, 3, 4}));
  std::stringstream buf;
  save_checkpoint(store, buf);
  const std::string bytes = buf.str();
  // Truncate inside the header, the name, and the values.
  for (std::size_t cut : {13u, 22u, static_cast<unsigned>(bytes.size() - 5)}) {
    std::stringstream part(bytes.substr(0, cut));
    EXPECT_THROW(load_checkpoint(part), TruncatedFile) << "cut at " << cut;
  }
}

}  // namespace
}  // namespace gearnetk
