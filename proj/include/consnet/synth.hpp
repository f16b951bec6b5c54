// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "consnet/embeddings.hpp"
#include "consnet/evaluator.hpp"
#include "consnet/label_space.hpp"
#include "consnet/pipeline.hpp"

namespace consnet {

/// Synthetic compositional corpus. Visual interaction prototypes are planted
/// as alpha * action_proto + beta * object_proto + residual, so interaction
/// appearance is a linear function of its constituents plus a small
/// class-specific remainder; features are prototypes plus Gaussian noise.
struct SynthConfig {
  int n_actions = 8;
  int n_objects = 10;
  real combo_density = real(0.5);  // fraction of the action x object grid used
  int d_a = 64;                    // visual feature dimension
  int d_e = 64;                    // word vector dimension
  int images = 400;                // training images
  int test_images = 200;
  int candidates_per_image = 10;
  real noise_sigma = real(0.08);
  real alpha = real(0.6);
  real beta = real(0.6);
  real residual_sigma = real(0.12);
  real interaction_gain = real(0.8);  // how strongly the pair prototype shows in both crops
  std::uint64_t seed = 7;
};

struct SynthCorpus {
  LabelSpace space;
  WordVectorTable words;
  std::vector<FeatureRecord> features;  // universal-rep source (train images only)
  std::vector<ImageDetections> train_images;
  std::vector<GroundTruthPair> train_gt;
  std::vector<ImageDetections> test_images;
  std::vector<GroundTruthPair> test_gt;
};

SynthCorpus generate_corpus(const SynthConfig& cfg);

}  // namespace consnet
