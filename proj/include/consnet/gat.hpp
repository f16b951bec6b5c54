// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "consnet/graph.hpp"
#include "consnet/nn.hpp"
#include "consnet/tape.hpp"

namespace consnet {

/// One attention head: shared projection plus the scoring vector split into
/// its source and destination halves, so that
/// score(i, j) = att_src . (W h_i) + att_dst . (W h_j).
struct GatHeadParams {
  Tensor W;        // d_in x d_head
  Tensor att_src;  // d_head x 1
  Tensor att_dst;  // d_head x 1
};

struct GatLayerParams {
  std::vector<GatHeadParams> heads;
  bool average_merge = false;  // hidden layers concatenate, final layer averages
};

struct GatStackParams {
  std::vector<GatLayerParams> layers;
};

struct GatConfig {
  int depth = 3;
  int heads = 8;
  int head_dim = 128;   // hidden layers; concat width = heads * head_dim
  int out_dim = 1024;   // final layer head width (heads are averaged)
  real leaky_slope = real(0.2);
};

GatStackParams init_gat(const GatConfig& cfg, int input_dim, Rng& rng);

struct GatHeadVars {
  Var W, att_src, att_dst;
};

struct GatLayerVars {
  std::vector<GatHeadVars> heads;
  bool average_merge = false;
};

struct GatStackVars {
  std::vector<GatLayerVars> layers;
};

GatStackVars bind(BindCtx& ctx, const GatStackParams& params);

/// Per-head attention matrices (N x N); each row is a distribution over the
/// row's neighbourhood and exactly zero elsewhere.
std::vector<Var> attention_coefficients(Tape& tape, Var H, const AdjacencyRef& adj,
                                        const GatLayerVars& layer, real leaky_slope);

Var gat_layer_forward(Tape& tape, Var H, const AdjacencyRef& adj, const GatLayerVars& layer,
                      real leaky_slope);

/// Runs the full stack on the node feature matrix. The final layer must use
/// average merge.
Var semantic_embed(Tape& tape, const ConsistencyGraph& graph, Var Z, const GatStackVars& stack,
                   real leaky_slope);

void visit_params(const std::string& prefix, GatStackParams& p, ParamVisitor& v);

}  // namespace consnet
