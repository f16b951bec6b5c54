// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "consnet/gat.hpp"
#include "consnet/graph.hpp"
#include "consnet/label_space.hpp"
#include "consnet/visual_net.hpp"

namespace consnet {

enum class EmbedderType { gat, mlp, none };

EmbedderType embedder_from_string(const std::string& s);
std::string embedder_to_string(EmbedderType t);

struct ModelConfig {
  EmbedderType embedder = EmbedderType::gat;
  VisualNetConfig visual;
  GatConfig gat;
  int d_e = 64;          // word embedding dimension
  int num_classes = 0;   // required for the direct (embedder=none) head
  real gamma = real(8);  // cosine scale factor
};

/// Per-node MLP used by the embedder ablation: same depth as the GAT stack,
/// hidden width equal to the GAT concat width, ReLU after every layer.
struct MlpEmbedderParams {
  std::vector<LinearParams> layers;
};

struct MlpEmbedderVars {
  std::vector<LinearVars> layers;
};

/// All learnable state for one run.
struct Model {
  ModelConfig cfg;
  VisualNetParams visual;
  GatStackParams gat;        // embedder == gat
  MlpEmbedderParams mlp;     // embedder == mlp
  LinearParams direct_head;  // embedder == none: concat of 4 embeddings -> C logits

  static Model init(const ModelConfig& cfg, std::uint64_t seed);
  void visit_params(ParamVisitor& v);
};

struct ModelVars {
  VisualNetVars visual;
  GatStackVars gat;
  MlpEmbedderVars mlp;
  LinearVars direct_head;
};

ModelVars bind(BindCtx& ctx, Model& model);

/// Node rows of the semantic matrix for each HOI class: human, object,
/// action, interaction templates.
struct ClassNodeIndices {
  std::vector<int> human, object, action, interaction;
};

ClassNodeIndices class_node_indices(const LabelSpace& space);

/// Semantic embedding matrix S (N x d_v) for similarity-based embedders.
/// Invalid for embedder == none.
Var embed_semantics(Tape& tape, Model& model, const ModelVars& vars,
                    const ConsistencyGraph& graph, Var Z);

/// Classification scores r (rows x C): sigmoid of gamma-scaled sum of the
/// four visual-semantic cosines, or the direct classifier head when
/// embedder == none.
Var classification_scores(Tape& tape, Model& model, const ModelVars& vars, const VisualForward& vf,
                          const std::vector<int>& rows, Var semantic_matrix,
                          const ClassNodeIndices& cls);

}  // namespace consnet
