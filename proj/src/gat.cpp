// SPDX-License-Identifier: Apache-2.0
#include "consnet/gat.hpp"

#include <stdexcept>

namespace consnet {

GatStackParams init_gat(const GatConfig& cfg, int input_dim, Rng& rng) {
  if (cfg.depth < 1) throw std::invalid_argument("init_gat: depth must be >= 1");
  if (cfg.heads < 1) throw std::invalid_argument("init_gat: heads must be >= 1");
  GatStackParams stack;
  int d_in = input_dim;
  for (int layer = 0; layer < cfg.depth; ++layer) {
    const bool last = layer == cfg.depth - 1;
    const int d_head = last ? cfg.out_dim : cfg.head_dim;
    GatLayerParams lp;
    lp.average_merge = last;
    for (int h = 0; h < cfg.heads; ++h) {
      GatHeadParams head;
      head.W = glorot_uniform(d_in, d_head, rng);
      head.att_src = glorot_uniform(d_head, 1, rng);
      head.att_dst = glorot_uniform(d_head, 1, rng);
      lp.heads.push_back(std::move(head));
    }
    stack.layers.push_back(std::move(lp));
    d_in = last ? cfg.out_dim : cfg.heads * cfg.head_dim;
  }
  return stack;
}

GatStackVars bind(BindCtx& ctx, const GatStackParams& params) {
  GatStackVars vars;
  for (const auto& layer : params.layers) {
    GatLayerVars lv;
    lv.average_merge = layer.average_merge;
    for (const auto& head : layer.heads) {
      lv.heads.push_back(
          GatHeadVars{ctx.leaf(head.W), ctx.leaf(head.att_src), ctx.leaf(head.att_dst)});
    }
    vars.layers.push_back(std::move(lv));
  }
  return vars;
}

namespace {

struct HeadForward {
  Var mu;         // N x N attention
  Var projected;  // N x d_head
};

HeadForward head_attention(Tape& tape, Var H, const AdjacencyRef& adj, const GatHeadVars& head,
                           real leaky_slope) {
  const int n = tape.value(H).rows();
  Var hw = tape.matmul(H, head.W);                    // N x d_head
  Var score_src = tape.matmul(hw, head.att_src);      // N x 1
  Var score_dst = tape.matmul(hw, head.att_dst);      // N x 1
  Var ones_row = tape.input(Tensor::full(1, n, real(1)));
  Var ones_col = tape.input(Tensor::full(n, 1, real(1)));
  // logits(i, j) = score_src_i + score_dst_j as two rank-one products
  Var logits = tape.add(tape.matmul(score_src, ones_row),
                        tape.matmul(ones_col, tape.transpose(score_dst)));
  Var activated = tape.leaky_relu(logits, leaky_slope);
  Var mu = tape.masked_row_softmax(activated, adj);
  return {mu, hw};
}

}  // namespace

std::vector<Var> attention_coefficients(Tape& tape, Var H, const AdjacencyRef& adj,
                                        const GatLayerVars& layer, real leaky_slope) {
  std::vector<Var> out;
  out.reserve(layer.heads.size());
  for (const auto& head : layer.heads) {
    out.push_back(head_attention(tape, H, adj, head, leaky_slope).mu);
  }
  return out;
}

Var gat_layer_forward(Tape& tape, Var H, const AdjacencyRef& adj, const GatLayerVars& layer,
                      real leaky_slope) {
  if (layer.heads.empty()) throw std::invalid_argument("gat_layer_forward: no heads");
  std::vector<Var> head_outputs;
  head_outputs.reserve(layer.heads.size());
  for (const auto& head : layer.heads) {
    const HeadForward fwd = head_attention(tape, H, adj, head, leaky_slope);
    head_outputs.push_back(tape.relu(tape.matmul(fwd.mu, fwd.projected)));
  }
  if (!layer.average_merge) return tape.concat_cols(head_outputs);
  Var acc = head_outputs[0];
  for (std::size_t h = 1; h < head_outputs.size(); ++h) acc = tape.add(acc, head_outputs[h]);
  return tape.scale(acc, real(1) / static_cast<real>(head_outputs.size()));
}

Var semantic_embed(Tape& tape, const ConsistencyGraph& graph, Var Z, const GatStackVars& stack,
                   real leaky_slope) {
  if (stack.layers.empty()) throw std::invalid_argument("semantic_embed: empty stack");
  if (!stack.layers.back().average_merge) {
    throw std::invalid_argument("semantic_embed: final layer must use average merge");
  }
  const AdjacencyRef adj = graph.adjacency_ref();
  if (!adj) throw std::logic_error("semantic_embed: graph not finalized");
  if (tape.value(Z).rows() != graph.num_nodes()) {
    throw std::invalid_argument("semantic_embed: Z row count must equal node count");
  }
  Var h = Z;
  for (const auto& layer : stack.layers) {
    h = gat_layer_forward(tape, h, adj, layer, leaky_slope);
  }
  return h;
}

void visit_params(const std::string& prefix, GatStackParams& p, ParamVisitor& v) {
  for (std::size_t layer = 0; layer < p.layers.size(); ++layer) {
    for (std::size_t head = 0; head < p.layers[layer].heads.size(); ++head) {
      auto& hp = p.layers[layer].heads[head];
      const std::string base =
          prefix + ".layer" + std::to_string(layer) + ".head" + std::to_string(head);
      v.visit(base + ".W", hp.W, ParamKind::weight);
      // attention vectors are excluded from weight decay
      v.visit(base + ".att_src", hp.att_src, ParamKind::bias);
      v.visit(base + ".att_dst", hp.att_dst, ParamKind::bias);
    }
  }
}

}  // namespace consnet
