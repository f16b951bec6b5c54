// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "consnet/config.hpp"
#include "consnet/corpus.hpp"
#include "consnet/evaluator.hpp"
#include "consnet/synth.hpp"
#include "consnet/trainer.hpp"

namespace consnet {

/// Fixed file names inside a data directory.
struct DataFiles {
  static constexpr const char* label_space = "labelspace.json";
  static constexpr const char* words = "words.jsonl";
  static constexpr const char* features = "features.jsonl";
  static constexpr const char* train_detections = "train_detections.jsonl";
  static constexpr const char* train_gt = "train_gt.jsonl";
  static constexpr const char* test_detections = "test_detections.jsonl";
  static constexpr const char* test_gt = "test_gt.jsonl";
};

void save_corpus(const SynthCorpus& corpus, const std::string& dir);
SynthCorpus load_corpus(const std::string& dir);

struct SemanticInputs {
  ConsistencyGraph graph;
  Tensor Z;
};

/// Universal reps from the (split-filtered) record corpus, joint node
/// features, graph, and the word-embedding node matrix.
SemanticInputs build_semantic_inputs(const LabelSpace& space,
                                     const std::vector<FeatureRecord>& records,
                                     const WordVectorTable& words, const ZeroShotSplit& split,
                                     const GraphConfig& gcfg);

/// Fills in the data-dependent model fields (num_classes, d_a, d_e).
ModelConfig resolve_model_config(const RunConfig& cfg, const SynthCorpus& corpus);

/// Assembles and split-filters the training corpus, builds semantic inputs,
/// initializes the model from cfg.seed and trains it.
struct TrainOutput {
  Model model;
  TrainResult result;
};
TrainOutput train_on_corpus(const SynthCorpus& corpus, const ZeroShotSplit& split,
                            const RunConfig& cfg);

/// Rebuilds semantic inputs deterministically and runs the pipeline over the
/// test images.
std::vector<Detection> detect_on_corpus(Model& model, const SynthCorpus& corpus,
                                        const ZeroShotSplit& split, const RunConfig& cfg);

/// Score-shuffled control: detections with scores permuted at random
/// (seeded), destroying the ranking signal while keeping the detection set.
std::vector<Detection> shuffle_scores(const std::vector<Detection>& detections,
                                      std::uint64_t seed);

/// Toy-dimension gradient check of the full training objective; returns the
/// max relative error over all trainable parameters.
real full_loss_grad_check(const RunConfig& cfg, real eps);

}  // namespace consnet
