//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <stdexcept>
#include <string>

namespace gearnetk {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// struct_io
struct MalformedRecord : Error { using Error::Error; };
struct EmptyStructure : Error { using Error::Error; };
struct SchemaError : Error { using Error::Error; };
struct BadMagic : Error { using Error::Error; };
struct VersionMismatch : Error { using Error::Error; };
struct TruncatedFile : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

// geometry
struct DegenerateGeometry : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };

// tensor_core
struct ShapeMismatch : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct BadTarget : Error { using Error::Error; };
struct NumericError : Error { using Error::Error; };
struct UninitializedParams : Error { using Error::Error; };

// ssl_pretrain
struct ZeroNormEmbedding : Error { using Error::Error; };
struct NoEdges : Error { using Error::Error; };
struct NoAdjacentPairs : Error { using Error::Error; };
struct NoTriplets : Error { using Error::Error; };

// tasks_metrics / cli
struct NoPositives : Error { using Error::Error; };
struct EmptyDataset : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

}  // namespace gearnetk
