// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "consnet/model.hpp"

namespace consnet {

/// Binary checkpoint: magic "CNSB", u32 version, u64 seed, length-prefixed
/// config JSON, then named tensors (name, rows, cols, raw little-endian
/// values). Loading restores values bitwise.
void save_checkpoint(Model& model, const std::string& config_json, std::uint64_t seed,
                     const std::string& path);

struct LoadedCheckpoint {
  std::string config_json;
  std::uint64_t seed = 0;
};

/// Restores tensors into a model whose architecture already matches the
/// checkpoint; throws on any name or shape mismatch.
LoadedCheckpoint load_checkpoint(Model& model, const std::string& path);

/// Reads only the header (config + seed), for reconstructing the model
/// before loading tensors.
LoadedCheckpoint peek_checkpoint(const std::string& path);

}  // namespace consnet
