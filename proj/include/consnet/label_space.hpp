// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace consnet {

enum class NodeKind { human, action, object, interaction };

struct NodeId {
  NodeKind kind;
  int index;
};

/// HOI vocabulary and the node universe of the consistency graph.
/// Node order is fixed: human, actions, objects, interactions.
/// Immutable after construction; safe for concurrent reads.
struct LabelSpace {
  std::vector<std::string> actions;
  std::vector<std::string> objects;
  std::vector<std::pair<int, int>> hois;  // (action_index, object_index)

  int num_actions() const { return static_cast<int>(actions.size()); }
  int num_objects() const { return static_cast<int>(objects.size()); }
  int num_classes() const { return static_cast<int>(hois.size()); }
  int num_nodes() const { return 1 + num_actions() + num_objects() + num_classes(); }

  int human_node() const { return 0; }
  int action_node(int a) const { return 1 + a; }
  int object_node(int o) const { return 1 + num_actions() + o; }
  int interaction_node(int t) const { return 1 + num_actions() + num_objects() + t; }
  NodeId node_id(int node) const;
  std::string node_label(int node) const;

  /// Class index for an (action, object) pair, or -1.
  int class_of(int action, int object) const;
};

/// Case-normalized, underscore-tokenized label words ("sit_on" -> {"sit","on"}).
std::vector<std::string> tokenize_label(const std::string& label);

LabelSpace build_label_space(const std::vector<std::string>& actions,
                             const std::vector<std::string>& objects,
                             const std::vector<std::pair<std::string, std::string>>& hoi_pairs);

enum class ZeroShotScenario { UC, UO, UA, full };

struct ZeroShotSplit {
  ZeroShotScenario scenario = ZeroShotScenario::full;
  std::set<int> unseen_hoi_ids;
  std::uint64_t seed = 0;

  bool is_unseen(int hoi) const { return unseen_hoi_ids.count(hoi) > 0; }
};

ZeroShotScenario scenario_from_string(const std::string& s);
std::string scenario_to_string(ZeroShotScenario s);

/// Deterministic given (space, scenario, k, seed). UC feasibility (every
/// action and object still seen) is enforced by rejection sampling.
ZeroShotSplit make_zero_shot_split(const LabelSpace& space, ZeroShotScenario scenario, int k,
                                   std::uint64_t seed);

/// Action categories that appear only in unseen HOIs (the UA holdout set).
std::set<int> unseen_actions(const LabelSpace& space, const ZeroShotSplit& split);
/// Object categories that appear only in unseen HOIs (the UO holdout set).
std::set<int> unseen_objects(const LabelSpace& space, const ZeroShotSplit& split);

}  // namespace consnet
