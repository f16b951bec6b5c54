// SPDX-License-Identifier: Apache-2.0
#include "consnet/model.hpp"

#include <stdexcept>

namespace consnet {

EmbedderType embedder_from_string(const std::string& s) {
  if (s == "gat") return EmbedderType::gat;
  if (s == "mlp") return EmbedderType::mlp;
  if (s == "none") return EmbedderType::none;
  throw std::invalid_argument("unknown embedder '" + s + "'");
}

std::string embedder_to_string(EmbedderType t) {
  switch (t) {
    case EmbedderType::gat:
      return "gat";
    case EmbedderType::mlp:
      return "mlp";
    case EmbedderType::none:
      return "none";
  }
  throw std::logic_error("unreachable");
}

Model Model::init(const ModelConfig& cfg, std::uint64_t seed) {
  Model m;
  m.cfg = cfg;
  Rng rng(seed);
  m.visual = init_visual_net(cfg.visual, rng);
  switch (cfg.embedder) {
    case EmbedderType::gat:
      m.gat = init_gat(cfg.gat, cfg.d_e, rng);
      break;
    case EmbedderType::mlp: {
      const int hidden = cfg.gat.heads * cfg.gat.head_dim;
      int d_in = cfg.d_e;
      for (int layer = 0; layer < cfg.gat.depth; ++layer) {
        const bool last = layer == cfg.gat.depth - 1;
        const int d_out = last ? cfg.gat.out_dim : hidden;
        m.mlp.layers.push_back(init_linear(d_in, d_out, rng));
        d_in = d_out;
      }
      break;
    }
    case EmbedderType::none:
      if (cfg.num_classes < 1) {
        throw std::invalid_argument("Model::init: embedder=none needs num_classes");
      }
      m.direct_head = init_linear(4 * cfg.visual.d_v, cfg.num_classes, rng);
      break;
  }
  return m;
}

void Model::visit_params(ParamVisitor& v) {
  consnet::visit_params("visual", visual, v);
  switch (cfg.embedder) {
    case EmbedderType::gat:
      consnet::visit_params("gat", gat, v);
      break;
    case EmbedderType::mlp:
      for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
        consnet::visit_params("mlp.layer" + std::to_string(i), mlp.layers[i], v);
      }
      break;
    case EmbedderType::none:
      consnet::visit_params("direct_head", direct_head, v);
      break;
  }
}

ModelVars bind(BindCtx& ctx, Model& model) {
  ModelVars vars;
  vars.visual = bind(ctx, model.visual);
  switch (model.cfg.embedder) {
    case EmbedderType::gat:
      vars.gat = bind(ctx, model.gat);
      break;
    case EmbedderType::mlp:
      for (const auto& layer : model.mlp.layers) vars.mlp.layers.push_back(bind(ctx, layer));
      break;
    case EmbedderType::none:
      vars.direct_head = bind(ctx, model.direct_head);
      break;
  }
  return vars;
}

ClassNodeIndices class_node_indices(const LabelSpace& space) {
  ClassNodeIndices idx;
  for (int t = 0; t < space.num_classes(); ++t) {
    idx.human.push_back(space.human_node());
    idx.action.push_back(space.action_node(space.hois[t].first));
    idx.object.push_back(space.object_node(space.hois[t].second));
    idx.interaction.push_back(space.interaction_node(t));
  }
  return idx;
}

Var embed_semantics(Tape& tape, Model& model, const ModelVars& vars,
                    const ConsistencyGraph& graph, Var Z) {
  switch (model.cfg.embedder) {
    case EmbedderType::gat:
      return semantic_embed(tape, graph, Z, vars.gat, model.cfg.gat.leaky_slope);
    case EmbedderType::mlp: {
      Var h = Z;
      for (const auto& layer : vars.mlp.layers) h = tape.relu(linear(tape, h, layer));
      return h;
    }
    case EmbedderType::none:
      throw std::logic_error("embed_semantics: no semantic net for embedder=none");
  }
  throw std::logic_error("unreachable");
}

Var classification_scores(Tape& tape, Model& model, const ModelVars& vars, const VisualForward& vf,
                          const std::vector<int>& rows, Var semantic_matrix,
                          const ClassNodeIndices& cls) {
  auto pick = [&](Var v) { return tape.gather_rows(v, rows); };
  const Var v_h = pick(vf.human.v);
  const Var v_o = pick(vf.object.v);
  const Var v_a = pick(vf.action.v);
  const Var v_t = pick(vf.interaction.v);

  if (model.cfg.embedder == EmbedderType::none) {
    Var joint = tape.concat_cols({v_h, v_o, v_a, v_t});
    return tape.sigmoid(linear(tape, joint, vars.direct_head));
  }

  auto cosines = [&](Var v, const std::vector<int>& nodes) {
    Var templates = tape.row_l2_normalize(tape.gather_rows(semantic_matrix, nodes));
    return tape.matmul_nt(tape.row_l2_normalize(v), templates);  // rows x C
  };
  Var total = cosines(v_h, cls.human);
  total = tape.add(total, cosines(v_o, cls.object));
  total = tape.add(total, cosines(v_a, cls.action));
  total = tape.add(total, cosines(v_t, cls.interaction));
  return tape.sigmoid(tape.scale(total, model.cfg.gamma));
}

}  // namespace consnet
