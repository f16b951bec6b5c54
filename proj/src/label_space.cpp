// SPDX-License-Identifier: Apache-2.0
#include "consnet/label_space.hpp"

#include <algorithm>
#include <cctype>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "consnet/rng.hpp"

namespace consnet {

NodeId LabelSpace::node_id(int node) const {
  if (node == 0) return {NodeKind::human, 0};
  node -= 1;
  if (node < num_actions()) return {NodeKind::action, node};
  node -= num_actions();
  if (node < num_objects()) return {NodeKind::object, node};
  node -= num_objects();
  if (node < num_classes()) return {NodeKind::interaction, node};
  throw std::out_of_range("LabelSpace::node_id: node out of range");
}

std::string LabelSpace::node_label(int node) const {
  const NodeId id = node_id(node);
  switch (id.kind) {
    case NodeKind::human:
      return "human";
    case NodeKind::action:
      return actions[id.index];
    case NodeKind::object:
      return objects[id.index];
    case NodeKind::interaction: {
      const auto& [a, o] = hois[id.index];
      return "human " + actions[a] + " " + objects[o];
    }
  }
  throw std::logic_error("unreachable");
}

int LabelSpace::class_of(int action, int object) const {
  for (int t = 0; t < num_classes(); ++t) {
    if (hois[t].first == action && hois[t].second == object) return t;
  }
  return -1;
}

std::vector<std::string> tokenize_label(const std::string& label) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : label) {
    if (ch == '_' || ch == ' ') {
      if (!cur.empty()) tokens.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
  }
  if (!cur.empty()) tokens.push_back(cur);
  if (tokens.empty()) throw std::invalid_argument("tokenize_label: empty label");
  return tokens;
}

LabelSpace build_label_space(const std::vector<std::string>& actions,
                             const std::vector<std::string>& objects,
                             const std::vector<std::pair<std::string, std::string>>& hoi_pairs) {
  if (actions.empty() || objects.empty() || hoi_pairs.empty()) {
    throw std::invalid_argument("build_label_space: empty inputs");
  }
  auto index_names = [](const std::vector<std::string>& names, const char* what) {
    std::unordered_map<std::string, int> idx;
    for (int i = 0; i < static_cast<int>(names.size()); ++i) {
      if (names[i].empty()) throw std::invalid_argument(std::string(what) + ": empty name");
      if (!idx.emplace(names[i], i).second) {
        throw std::invalid_argument(std::string(what) + ": duplicate name '" + names[i] + "'");
      }
    }
    return idx;
  };
  const auto action_idx = index_names(actions, "actions");
  const auto object_idx = index_names(objects, "objects");

  LabelSpace space;
  space.actions = actions;
  space.objects = objects;
  std::set<std::pair<int, int>> seen;
  for (const auto& [a_name, o_name] : hoi_pairs) {
    const auto ai = action_idx.find(a_name);
    const auto oi = object_idx.find(o_name);
    if (ai == action_idx.end()) {
      throw std::invalid_argument("build_label_space: unknown action '" + a_name + "'");
    }
    if (oi == object_idx.end()) {
      throw std::invalid_argument("build_label_space: unknown object '" + o_name + "'");
    }
    const std::pair<int, int> pair{ai->second, oi->second};
    if (!seen.insert(pair).second) {
      throw std::invalid_argument("build_label_space: duplicate HOI pair '" + a_name + "," +
                                  o_name + "'");
    }
    space.hois.push_back(pair);
  }
  return space;
}

ZeroShotScenario scenario_from_string(const std::string& s) {
  if (s == "UC" || s == "uc") return ZeroShotScenario::UC;
  if (s == "UO" || s == "uo") return ZeroShotScenario::UO;
  if (s == "UA" || s == "ua") return ZeroShotScenario::UA;
  if (s == "full") return ZeroShotScenario::full;
  throw std::invalid_argument("unknown zero-shot scenario '" + s + "'");
}

std::string scenario_to_string(ZeroShotScenario s) {
  switch (s) {
    case ZeroShotScenario::UC:
      return "UC";
    case ZeroShotScenario::UO:
      return "UO";
    case ZeroShotScenario::UA:
      return "UA";
    case ZeroShotScenario::full:
      return "full";
  }
  throw std::logic_error("unreachable");
}

namespace {

// true when every action and object still appears in some seen HOI
bool covers_all_categories(const LabelSpace& space, const std::set<int>& unseen) {
  std::vector<char> action_seen(space.num_actions(), 0);
  std::vector<char> object_seen(space.num_objects(), 0);
  for (int t = 0; t < space.num_classes(); ++t) {
    if (unseen.count(t)) continue;
    action_seen[space.hois[t].first] = 1;
    object_seen[space.hois[t].second] = 1;
  }
  return std::all_of(action_seen.begin(), action_seen.end(), [](char c) { return c != 0; }) &&
         std::all_of(object_seen.begin(), object_seen.end(), [](char c) { return c != 0; });
}

std::set<int> sample_distinct(Rng& rng, int population, int k) {
  std::vector<int> ids(population);
  for (int i = 0; i < population; ++i) ids[i] = i;
  rng.shuffle(ids);
  return std::set<int>(ids.begin(), ids.begin() + k);
}

}  // namespace

ZeroShotSplit make_zero_shot_split(const LabelSpace& space, ZeroShotScenario scenario, int k,
                                   std::uint64_t seed) {
  ZeroShotSplit split;
  split.scenario = scenario;
  split.seed = seed;
  if (k < 0) throw std::invalid_argument("make_zero_shot_split: k must be >= 0");
  Rng rng(seed);

  switch (scenario) {
    case ZeroShotScenario::full:
      if (k != 0) throw std::invalid_argument("make_zero_shot_split: full scenario needs k=0");
      break;
    case ZeroShotScenario::UC: {
      if (k > space.num_classes()) {
        throw std::invalid_argument("make_zero_shot_split: k exceeds class count");
      }
      if (k == 0) break;
      constexpr int kMaxAttempts = 10000;
      bool found = false;
      for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
        std::set<int> candidate = sample_distinct(rng, space.num_classes(), k);
        if (covers_all_categories(space, candidate)) {
          split.unseen_hoi_ids = std::move(candidate);
          found = true;
          break;
        }
      }
      if (!found) {
        throw std::invalid_argument(
            "make_zero_shot_split: infeasible UC split (some action or object would lose all "
            "seen HOIs)");
      }
      break;
    }
    case ZeroShotScenario::UO: {
      if (k >= space.num_objects()) {
        throw std::invalid_argument("make_zero_shot_split: k must leave at least one object");
      }
      const std::set<int> held = sample_distinct(rng, space.num_objects(), k);
      for (int t = 0; t < space.num_classes(); ++t) {
        if (held.count(space.hois[t].second)) split.unseen_hoi_ids.insert(t);
      }
      break;
    }
    case ZeroShotScenario::UA: {
      if (k >= space.num_actions()) {
        throw std::invalid_argument("make_zero_shot_split: k must leave at least one action");
      }
      const std::set<int> held = sample_distinct(rng, space.num_actions(), k);
      for (int t = 0; t < space.num_classes(); ++t) {
        if (held.count(space.hois[t].first)) split.unseen_hoi_ids.insert(t);
      }
      break;
    }
  }

  if (static_cast<int>(split.unseen_hoi_ids.size()) == space.num_classes()) {
    throw std::invalid_argument("make_zero_shot_split: no seen HOIs remain");
  }
  return split;
}

std::set<int> unseen_actions(const LabelSpace& space, const ZeroShotSplit& split) {
  std::vector<char> seen(space.num_actions(), 0);
  for (int t = 0; t < space.num_classes(); ++t) {
    if (!split.is_unseen(t)) seen[space.hois[t].first] = 1;
  }
  std::set<int> out;
  for (int a = 0; a < space.num_actions(); ++a) {
    bool appears = false;
    for (int t = 0; t < space.num_classes(); ++t) {
      if (space.hois[t].first == a) {
        appears = true;
        break;
      }
    }
    if (appears && !seen[a]) out.insert(a);
  }
  return out;
}

std::set<int> unseen_objects(const LabelSpace& space, const ZeroShotSplit& split) {
  std::vector<char> seen(space.num_objects(), 0);
  for (int t = 0; t < space.num_classes(); ++t) {
    if (!split.is_unseen(t)) seen[space.hois[t].second] = 1;
  }
  std::set<int> out;
  for (int o = 0; o < space.num_objects(); ++o) {
    bool appears = false;
    for (int t = 0; t < space.num_classes(); ++t) {
      if (space.hois[t].second == o) {
        appears = true;
        break;
      }
    }
    if (appears && !seen[o]) out.insert(o);
  }
  return out;
}

}  // namespace consnet
