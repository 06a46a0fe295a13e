//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <iosfwd>
#include <string>

#include "gearnetk/tensor.hpp"

namespace gearnetk {

// Binary checkpoint container.
//
// Layout: magic "GEARNETK", format version as u32 little-endian, then for
// each tensor (in the store's name order): name length (u64 LE), UTF-8 name
// bytes, rank (u64 LE), dims (u64 LE each), values (IEEE-754 f64 LE).
// Round trips are bit-exact.
inline constexpr char kCheckpointMagic[8] = {'G', 'E', 'A', 'R', 'N', 'E', 'T', 'K'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

void save_checkpoint(const ParameterStore& params, const std::string& path);
void save_checkpoint(const ParameterStore& params, std::ostream& out);

// Throws BadMagic / VersionMismatch / TruncatedFile. All loaded tensors are
// registered as trainable; consumers re-typing them (running statistics vs
// weights) copy values into their own store by name.
ParameterStore load_checkpoint(const std::string& path);
ParameterStore load_checkpoint(std::istream& in);

}  // namespace gearnetk
