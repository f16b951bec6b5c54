// SPDX-License-Identifier: Apache-2.0
#include "consnet/embeddings.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace consnet {

void WordVectorTable::insert(const std::string& token, std::vector<real> vec) {
  if (vec.empty()) throw std::invalid_argument("WordVectorTable: empty vector for '" + token + "'");
  if (l2_norm(vec) == 0) {
    throw std::invalid_argument("WordVectorTable: zero vector for '" + token + "'");
  }
  if (dim == 0) {
    dim = static_cast<int>(vec.size());
  } else if (dim != static_cast<int>(vec.size())) {
    throw std::invalid_argument("WordVectorTable: dimension mismatch for '" + token + "'");
  }
  vectors[token] = std::move(vec);
}

const std::vector<real>& WordVectorTable::lookup(const std::string& token) const {
  const auto it = vectors.find(token);
  if (it == vectors.end()) {
    throw std::out_of_range("WordVectorTable: missing token '" + token + "'");
  }
  return it->second;
}

void validate(const FeatureRecord& rec) {
  if (!(rec.box[0] < rec.box[2]) || !(rec.box[1] < rec.box[3])) {
    throw std::invalid_argument("FeatureRecord: degenerate box in image '" + rec.image_id + "'");
  }
  if (rec.score < 0 || rec.score > 1) {
    throw std::invalid_argument("FeatureRecord: score outside [0,1]");
  }
  if (rec.feature.empty()) throw std::invalid_argument("FeatureRecord: empty feature");
  if (rec.label.empty()) throw std::invalid_argument("FeatureRecord: empty label");
}

UniversalVisualReps universal_visual_rep(const std::vector<FeatureRecord>& records) {
  UniversalVisualReps reps;
  std::map<std::string, int> action_counts;
  std::map<std::string, int> object_counts;
  for (const auto& rec : records) {
    if (rec.feature.empty()) throw std::invalid_argument("universal_visual_rep: empty feature");
    if (reps.dim == 0) reps.dim = static_cast<int>(rec.feature.size());
    if (reps.dim != static_cast<int>(rec.feature.size())) {
      throw std::invalid_argument("universal_visual_rep: feature dimension mismatch");
    }
    auto& table = rec.kind == FeatureRecord::Kind::human ? reps.action_reps : reps.object_reps;
    auto& counts = rec.kind == FeatureRecord::Kind::human ? action_counts : object_counts;
    auto [it, inserted] = table.try_emplace(rec.label, std::vector<real>(reps.dim, real(0)));
    for (int i = 0; i < reps.dim; ++i) it->second[i] += rec.feature[i];
    counts[rec.label]++;
  }
  for (auto& [label, vec] : reps.action_reps) {
    const real inv = real(1) / action_counts[label];
    for (auto& x : vec) x *= inv;
  }
  for (auto& [label, vec] : reps.object_reps) {
    const real inv = real(1) / object_counts[label];
    for (auto& x : vec) x *= inv;
  }
  return reps;
}

std::vector<real> fuse_word_embedding(const WordVectorTable& table,
                                      const std::vector<std::string>& tokens,
                                      const std::map<std::string, real>* weights) {
  if (tokens.empty()) throw std::invalid_argument("fuse_word_embedding: no tokens");
  std::vector<real> out(table.dim, real(0));
  real total_weight = 0;
  for (const auto& token : tokens) {
    const auto& vec = table.lookup(token);
    real w = 1;
    if (weights) {
      const auto it = weights->find(token);
      if (it != weights->end()) w = it->second;
    }
    for (int i = 0; i < table.dim; ++i) out[i] += w * vec[i];
    total_weight += w;
  }
  if (total_weight <= 0) throw std::invalid_argument("fuse_word_embedding: non-positive weight sum");
  for (auto& x : out) x /= total_weight;
  return out;
}

std::vector<real> joint_feature(const std::vector<real>& q, const std::vector<real>& e,
                                real rho_v, real rho_s) {
  if (rho_v < 0 || rho_s < 0) throw std::invalid_argument("joint_feature: negative weight");
  const real qn = l2_norm(q);
  const real en = l2_norm(e);
  if (qn == 0 || en == 0) throw std::invalid_argument("joint_feature: zero-norm input");
  std::vector<real> z;
  z.reserve(q.size() + e.size());
  for (real x : q) z.push_back(rho_v * x / qn);
  for (real x : e) z.push_back(rho_s * x / en);
  return z;
}

std::vector<real> joint_feature_semantic_only(const std::vector<real>& e, real rho_s, int d_q) {
  const real en = l2_norm(e);
  if (en == 0) throw std::invalid_argument("joint_feature_semantic_only: zero-norm input");
  std::vector<real> z(d_q, real(0));
  z.reserve(d_q + e.size());
  for (real x : e) z.push_back(rho_s * x / en);
  return z;
}

namespace {

// interaction visual rep: action rep ++ object rep, zeros where a rep is missing
std::vector<real> interaction_visual_rep(const UniversalVisualReps& reps,
                                         const std::string& action, const std::string& object,
                                         bool* any_present) {
  std::vector<real> q(2 * reps.dim, real(0));
  *any_present = false;
  if (const auto it = reps.action_reps.find(action); it != reps.action_reps.end()) {
    std::copy(it->second.begin(), it->second.end(), q.begin());
    *any_present = true;
  }
  if (const auto it = reps.object_reps.find(object); it != reps.object_reps.end()) {
    std::copy(it->second.begin(), it->second.end(), q.begin() + reps.dim);
    *any_present = true;
  }
  return q;
}

}  // namespace

NodeJointFeatures build_node_joint_features(const LabelSpace& space,
                                            const UniversalVisualReps& reps,
                                            const WordVectorTable& words, real rho_v, real rho_s,
                                            const std::map<std::string, real>* fusion_weights) {
  NodeJointFeatures out;
  out.by_node.resize(space.num_nodes());

  auto entity_feature = [&](const std::string& label, bool is_action) {
    const auto& table = is_action ? reps.action_reps : reps.object_reps;
    const auto e = fuse_word_embedding(words, tokenize_label(label), fusion_weights);
    const auto it = table.find(label);
    if (it == table.end()) return joint_feature_semantic_only(e, rho_s, reps.dim);
    return joint_feature(it->second, e, rho_v, rho_s);
  };

  for (int a = 0; a < space.num_actions(); ++a) {
    out.by_node[space.action_node(a)] = entity_feature(space.actions[a], true);
  }
  for (int o = 0; o < space.num_objects(); ++o) {
    out.by_node[space.object_node(o)] = entity_feature(space.objects[o], false);
  }
  for (int t = 0; t < space.num_classes(); ++t) {
    const auto& [a, o] = space.hois[t];
    std::vector<std::string> tokens{"human"};
    for (auto& tok : tokenize_label(space.actions[a])) tokens.push_back(tok);
    for (auto& tok : tokenize_label(space.objects[o])) tokens.push_back(tok);
    const auto e = fuse_word_embedding(words, tokens, fusion_weights);
    bool any = false;
    const auto q = interaction_visual_rep(reps, space.actions[a], space.objects[o], &any);
    out.by_node[space.interaction_node(t)] =
        any ? joint_feature(q, e, rho_v, rho_s)
            : joint_feature_semantic_only(e, rho_s, static_cast<int>(q.size()));
  }
  return out;
}

Tensor node_feature_matrix(const LabelSpace& space, const WordVectorTable& words,
                           const std::map<std::string, real>* fusion_weights) {
  Tensor z(space.num_nodes(), words.dim);
  auto set_row = [&](int node, const std::vector<real>& vec) {
    for (int c = 0; c < words.dim; ++c) z.at(node, c) = vec[c];
  };
  set_row(space.human_node(), fuse_word_embedding(words, {"human"}, fusion_weights));
  for (int a = 0; a < space.num_actions(); ++a) {
    set_row(space.action_node(a),
            fuse_word_embedding(words, tokenize_label(space.actions[a]), fusion_weights));
  }
  for (int o = 0; o < space.num_objects(); ++o) {
    set_row(space.object_node(o),
            fuse_word_embedding(words, tokenize_label(space.objects[o]), fusion_weights));
  }
  for (int t = 0; t < space.num_classes(); ++t) {
    const auto& [a, o] = space.hois[t];
    std::vector<std::string> tokens{"human"};
    for (auto& tok : tokenize_label(space.actions[a])) tokens.push_back(tok);
    for (auto& tok : tokenize_label(space.objects[o])) tokens.push_back(tok);
    set_row(space.interaction_node(t), fuse_word_embedding(words, tokens, fusion_weights));
  }
  return z;
}

}  // namespace consnet
