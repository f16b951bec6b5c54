// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "consnet/label_space.hpp"
#include "consnet/tensor.hpp"

namespace consnet {

/// Pre-trained word vectors, one fixed dimension across the table.
struct WordVectorTable {
  std::unordered_map<std::string, std::vector<real>> vectors;
  int dim = 0;

  void insert(const std::string& token, std::vector<real> vec);
  const std::vector<real>& lookup(const std::string& token) const;
  bool contains(const std::string& token) const { return vectors.count(token) > 0; }
};

/// One detected human or object crop with its pre-extracted feature.
struct FeatureRecord {
  std::string image_id;
  std::array<real, 4> box{};  // x1, y1, x2, y2 in pixels
  std::string label;          // action name for human crops, object name for object crops
  enum class Kind { human, object } kind = Kind::object;
  real score = 0;
  std::vector<real> feature;
};

void validate(const FeatureRecord& rec);

/// Per-label means of the visual features. Human crops feed action
/// representations, object crops feed object representations.
struct UniversalVisualReps {
  std::map<std::string, std::vector<real>> action_reps;
  std::map<std::string, std::vector<real>> object_reps;
  int dim = 0;
};

UniversalVisualReps universal_visual_rep(const std::vector<FeatureRecord>& records);

/// Weighted token fusion; uniform mean unless per-token weights are given
/// (missing tokens in the weight map default to weight 1).
std::vector<real> fuse_word_embedding(const WordVectorTable& table,
                                      const std::vector<std::string>& tokens,
                                      const std::map<std::string, real>* weights = nullptr);

/// z = (rho_v * q/|q|) ++ (rho_s * e/|e|)
std::vector<real> joint_feature(const std::vector<real>& q, const std::vector<real>& e,
                                real rho_v, real rho_s);

/// Fallback for labels with no visual records: visual half zeroed.
std::vector<real> joint_feature_semantic_only(const std::vector<real>& e, real rho_s, int d_q);

/// Joint features for every non-human graph node, indexed by node id.
/// Interaction visual half is the concatenation of its action and object
/// reps; missing reps fall back to zeros.
struct NodeJointFeatures {
  std::vector<std::vector<real>> by_node;  // empty vector for the human node
};

NodeJointFeatures build_node_joint_features(const LabelSpace& space,
                                            const UniversalVisualReps& reps,
                                            const WordVectorTable& words, real rho_v, real rho_s,
                                            const std::map<std::string, real>* fusion_weights = nullptr);

/// Word-embedding rows for every node (N x d_e). Interaction rows fuse the
/// token list ["human"] + action tokens + object tokens.
Tensor node_feature_matrix(const LabelSpace& space, const WordVectorTable& words,
                           const std::map<std::string, real>* fusion_weights = nullptr);

}  // namespace consnet
