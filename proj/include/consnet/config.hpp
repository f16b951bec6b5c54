// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>

#include "consnet/model.hpp"
#include "consnet/pipeline.hpp"
#include "consnet/synth.hpp"
#include "consnet/trainer.hpp"

namespace consnet {

/// Graph construction knobs.
struct GraphConfig {
  int eps_action = 5;
  int eps_object = 5;
  int eps_interaction = 10;
  real rho_v = real(1);
  real rho_s = real(1);
};

/// Every tunable of a run. A RunConfig plus the input files fully determines
/// all outputs.
struct RunConfig {
  std::uint64_t seed = 1;
  GraphConfig graph;
  ModelConfig model;
  TrainConfig train;
  PipelineConfig pipeline;
  SynthConfig synth;
  int rare_threshold = 10;

  static RunConfig from_json_file(const std::string& path);
  static RunConfig from_json_text(const std::string& text);
  std::string to_json() const;
  void save(const std::string& path) const;
};

}  // namespace consnet
