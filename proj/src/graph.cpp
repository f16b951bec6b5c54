// SPDX-License-Identifier: Apache-2.0
#include "consnet/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace consnet {

std::string edge_tag_to_string(EdgeTag tag) {
  switch (tag) {
    case EdgeTag::compositional:
      return "compositional";
    case EdgeTag::functional:
      return "functional";
    case EdgeTag::behavioral:
      return "behavioral";
    case EdgeTag::interactional:
      return "interactional";
  }
  throw std::logic_error("unreachable");
}

EdgeTag edge_tag_from_string(const std::string& s) {
  if (s == "compositional") return EdgeTag::compositional;
  if (s == "functional") return EdgeTag::functional;
  if (s == "behavioral") return EdgeTag::behavioral;
  if (s == "interactional") return EdgeTag::interactional;
  throw std::invalid_argument("unknown edge tag '" + s + "'");
}

bool ConsistencyGraph::has_edge(int i, int j) const {
  const auto& nbrs = adj[i];
  return std::binary_search(nbrs.begin(), nbrs.end(), j);
}

void ConsistencyGraph::finalize() {
  for (auto& nbrs : adj) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
  }
  adjacency_ = std::make_shared<const Adjacency>(adj);
}

real consistency(const std::vector<real>& z_i, const std::vector<real>& z_j) {
  if (z_i.size() != z_j.size()) throw std::invalid_argument("consistency: dimension mismatch");
  const real ni = l2_norm(z_i);
  const real nj = l2_norm(z_j);
  if (ni == 0 || nj == 0) throw std::invalid_argument("consistency: zero vector");
  const real c = dot(z_i, z_j) / (ni * nj);
  return std::clamp(c, real(-1), real(1));
}

namespace {

struct KindSlice {
  int first_node;
  int count;
  EdgeTag tag;
};

void add_edge(ConsistencyGraph& g, int i, int j, EdgeTag tag) {
  if (i == j) return;
  const auto key = std::minmax(i, j);
  g.adj[i].push_back(j);
  g.adj[j].push_back(i);
  // compositional tags take precedence; same-kind selections never collide with them
  g.edge_tags.emplace(std::pair<int, int>{key.first, key.second}, tag);
}

}  // namespace

ConsistencyGraph build_graph(const LabelSpace& space, const NodeJointFeatures& features,
                             int eps_action, int eps_object, int eps_interaction) {
  const int n = space.num_nodes();
  if (static_cast<int>(features.by_node.size()) != n) {
    throw std::invalid_argument("build_graph: joint feature count does not match node universe");
  }
  for (int node = 1; node < n; ++node) {
    if (features.by_node[node].empty()) {
      throw std::invalid_argument("build_graph: missing joint feature for node " +
                                  std::to_string(node));
    }
  }

  ConsistencyGraph g;
  g.n_actions = space.num_actions();
  g.n_objects = space.num_objects();
  g.n_interactions = space.num_classes();
  g.adj.assign(n, {});
  for (int i = 0; i < n; ++i) g.adj[i].push_back(i);  // self-loops

  // compositional edges: each interaction to its human, action and object nodes
  for (int t = 0; t < space.num_classes(); ++t) {
    const int tn = space.interaction_node(t);
    add_edge(g, space.human_node(), tn, EdgeTag::compositional);
    add_edge(g, space.action_node(space.hois[t].first), tn, EdgeTag::compositional);
    add_edge(g, space.object_node(space.hois[t].second), tn, EdgeTag::compositional);
  }

  const KindSlice slices[3] = {
      {space.action_node(0), space.num_actions(), EdgeTag::behavioral},
      {space.object_node(0), space.num_objects(), EdgeTag::functional},
      {space.interaction_node(0), space.num_classes(), EdgeTag::interactional},
  };
  const int eps_by_kind[3] = {eps_action, eps_object, eps_interaction};

  for (int s = 0; s < 3; ++s) {
    const auto& slice = slices[s];
    const int eps = eps_by_kind[s];
    if (eps < 0) throw std::invalid_argument("build_graph: negative eps");
    if (eps == 0) continue;
    if (eps >= slice.count) {
      throw std::invalid_argument("build_graph: eps " + std::to_string(eps) +
                                  " >= population " + std::to_string(slice.count));
    }
    for (int i = 0; i < slice.count; ++i) {
      const int node_i = slice.first_node + i;
      std::vector<std::pair<real, int>> peers;  // (consistency, node id)
      peers.reserve(slice.count - 1);
      for (int j = 0; j < slice.count; ++j) {
        if (j == i) continue;
        const int node_j = slice.first_node + j;
        peers.emplace_back(consistency(features.by_node[node_i], features.by_node[node_j]),
                           node_j);
      }
      std::sort(peers.begin(), peers.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;  // tie: lower node index wins
      });
      for (int r = 0; r < eps; ++r) add_edge(g, node_i, peers[r].second, slice.tag);
    }
  }

  g.finalize();
  return g;
}

}  // namespace consnet
