//
// Copyright 2026 The GearNetK Authors
// SPDX-License-Identifier: Apache-2.0
//
#pragma once

#include <string>

#include "gearnetk/train.hpp"

namespace gearnetk {

// JSON run configuration with sections graph / encoder / pretrain / train /
// paths. Every key has a default; unknown sections or keys are hard errors.
struct RunConfig {
  GraphConfig graph;
  EncoderConfig encoder;  // relation counts are tied to `graph`
  PretrainConfig pretrain;
  TrainConfig train;
  struct Paths {
    std::string dataset;
    std::string checkpoint;
    std::string output;
  } paths;
};

RunConfig parse_run_config(const std::string& json_text);
RunConfig load_run_config(const std::string& path);
RunConfig default_run_config();

// The full key reference (printed by the CLI's help).
std::string run_config_reference();

}  // namespace gearnetk
