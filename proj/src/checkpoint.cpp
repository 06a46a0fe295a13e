//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#include "gearnetk/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace gearnetk {

static_assert(std::endian::native == std::endian::little,
              "checkpoint io assumes a little-endian host");

namespace {

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

void write_u32(std::ostream& out, std::uint32_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw TruncatedFile("checkpoint truncated while reading a u64");
  return v;
}

}  // namespace

void save_checkpoint(const ParameterStore& params, std::ostream& out) {
  out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
  write_u32(out, kCheckpointVersion);
  params.for_each([&](const std::string& name, const Tensor& value, const Tensor&, bool) {
    write_u64(out, name.size());
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    write_u64(out, value.rank());
    for (std::size_t d : value.dims()) write_u64(out, d);
    out.write(reinterpret_cast<const char*>(value.data()),
              static_cast<std::streamsize>(value.size() * sizeof(double)));
  });
  if (!out) throw IoError("checkpoint write failed");
}

void save_checkpoint(const ParameterStore& params, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write checkpoint: " + path);
  save_checkpoint(params, out);
}

ParameterStore load_checkpoint(std::istream& in) {
  char magic[sizeof(kCheckpointMagic)] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0)
    throw BadMagic("not a checkpoint file");
  std::uint32_t version = 0;
  in.read(reinterpret_cast<char*>(&version), sizeof(version));
  if (!in) throw TruncatedFile("checkpoint truncated in header");
  if (version != kCheckpointVersion)
    throw VersionMismatch("unsupported checkpoint version " + std::to_string(version));

  ParameterStore store;
  while (true) {
    std::uint64_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (in.gcount() == 0 && in.eof()) break;  // clean end of file
    if (!in) throw TruncatedFile("checkpoint truncated in tensor header");
    if (name_len > (1u << 20)) throw TruncatedFile("implausible tensor name length");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    if (!in) throw TruncatedFile("checkpoint truncated in tensor name");
    const std::uint64_t rank = read_u64(in);
    if (rank > 8) throw TruncatedFile("implausible tensor rank");
    std::vector<std::size_t> dims(rank);
    std::size_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      dims[i] = static_cast<std::size_t>(read_u64(in));
      count *= dims[i];
    }
    std::vector<double> values(count);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
    if (!in) throw TruncatedFile("checkpoint truncated in tensor values");
    store.add(name, Tensor(std::move(dims), std::move(values)));
  }
  return store;
}

ParameterStore load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  return load_checkpoint(in);
}

}  // namespace gearnetk
