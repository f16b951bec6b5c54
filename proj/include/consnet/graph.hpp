// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "consnet/embeddings.hpp"
#include "consnet/label_space.hpp"
#include "consnet/tape.hpp"

namespace consnet {

enum class EdgeTag { compositional, functional, behavioral, interactional };

std::string edge_tag_to_string(EdgeTag tag);
EdgeTag edge_tag_from_string(const std::string& s);

/// Undirected consistency graph over the node universe of a LabelSpace.
/// Adjacency lists are sorted and include a self-loop for every node.
struct ConsistencyGraph {
  int n_actions = 0;
  int n_objects = 0;
  int n_interactions = 0;
  std::vector<std::vector<int>> adj;
  std::map<std::pair<int, int>, EdgeTag> edge_tags;  // key (i, j) with i < j; self-loops untagged

  int num_nodes() const { return 1 + n_actions + n_objects + n_interactions; }
  bool has_edge(int i, int j) const;
  /// shared_ptr view of the adjacency for masked softmax ops
  AdjacencyRef adjacency_ref() const { return adjacency_; }
  void finalize();  // sorts lists, installs adjacency_ref

private:
  AdjacencyRef adjacency_;
};

/// Cosine of two joint features, clamped to [-1, 1]. Throws on zero vectors
/// or dimension mismatch.
real consistency(const std::vector<real>& z_i, const std::vector<real>& z_j);

/// Compositional edges for every HOI plus, per node kind, edges to the
/// eps_k most consistent same-kind peers (directed selection symmetrized by
/// union, ties broken by lower node index).
ConsistencyGraph build_graph(const LabelSpace& space, const NodeJointFeatures& features,
                             int eps_action, int eps_object, int eps_interaction);

}  // namespace consnet
