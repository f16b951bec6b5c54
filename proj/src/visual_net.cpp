// SPDX-License-Identifier: Apache-2.0
#include "consnet/visual_net.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace consnet {

std::array<real, 8> spatial_config(const Box& b_h, const Box& b_o) {
  for (const Box* b : {&b_h, &b_o}) {
    if (!((*b)[0] < (*b)[2]) || !((*b)[1] < (*b)[3])) {
      throw std::invalid_argument("spatial_config: degenerate box");
    }
  }
  const real dx = std::min(b_h[0], b_o[0]);
  const real dy = std::min(b_h[1], b_o[1]);
  const real x2 = std::max(b_h[2], b_o[2]);
  const real y2 = std::max(b_h[3], b_o[3]);
  const real psi = (x2 - dx) * (y2 - dy);
  if (!(psi > 0)) throw std::invalid_argument("spatial_config: zero-area union box");
  std::array<real, 8> s{};
  int i = 0;
  for (const Box* b : {&b_h, &b_o}) {
    s[i++] = ((*b)[0] - dx) / psi;
    s[i++] = ((*b)[2] - dx) / psi;
    s[i++] = ((*b)[1] - dy) / psi;
    s[i++] = ((*b)[3] - dy) / psi;
  }
  return s;
}

real interactiveness(real phi_h, real phi_o, real phi_a, real phi_t) {
  const real x = phi_h + phi_o + phi_a + phi_t;
  if (!std::isfinite(x)) throw std::invalid_argument("interactiveness: non-finite logit");
  if (x >= 0) return real(1) / (real(1) + std::exp(-x));
  const real e = std::exp(x);
  return e / (real(1) + e);
}

VisualNetParams init_visual_net(const VisualNetConfig& cfg, Rng& rng) {
  auto make_mapper = [&](int d_in) {
    MapperParams m;
    m.hidden = init_proj(d_in, cfg.mapper_hidden, rng);
    m.bn = init_batch_norm(cfg.mapper_hidden);
    m.phi_head = init_linear(cfg.mapper_hidden, 1, rng);
    m.embed_head = init_linear(cfg.mapper_hidden, cfg.d_v, rng);
    return m;
  };
  auto make_fusion = [&]() {
    FusionParams f;
    f.in_h = init_proj(cfg.d_a, cfg.fusion_h, rng);
    f.bn_h = init_batch_norm(cfg.fusion_h);
    f.in_o = init_proj(cfg.d_a, cfg.fusion_o, rng);
    f.bn_o = init_batch_norm(cfg.fusion_o);
    f.in_s = init_proj(8, cfg.fusion_s, rng);
    f.bn_s = init_batch_norm(cfg.fusion_s);
    f.trunk = init_proj(cfg.fusion_h + cfg.fusion_o + cfg.fusion_s, cfg.trunk_hidden, rng);
    f.bn_trunk = init_batch_norm(cfg.trunk_hidden);
    f.phi_head = init_linear(cfg.trunk_hidden, 1, rng);
    f.embed_head = init_linear(cfg.trunk_hidden, cfg.d_v, rng);
    return f;
  };
  VisualNetParams p;
  p.human = make_mapper(cfg.d_a);
  p.object = make_mapper(cfg.d_a);
  p.action = make_fusion();
  p.interaction = make_fusion();
  return p;
}

VisualNetVars bind(BindCtx& ctx, const VisualNetParams& params) {
  auto bind_mapper = [&](const MapperParams& m) {
    return MapperVars{bind(ctx, m.hidden), bind(ctx, m.bn), bind(ctx, m.phi_head),
                      bind(ctx, m.embed_head)};
  };
  auto bind_fusion = [&](const FusionParams& f) {
    FusionVars v;
    v.in_h = bind(ctx, f.in_h);
    v.in_o = bind(ctx, f.in_o);
    v.in_s = bind(ctx, f.in_s);
    v.bn_h = bind(ctx, f.bn_h);
    v.bn_o = bind(ctx, f.bn_o);
    v.bn_s = bind(ctx, f.bn_s);
    v.trunk = bind(ctx, f.trunk);
    v.bn_trunk = bind(ctx, f.bn_trunk);
    v.phi_head = bind(ctx, f.phi_head);
    v.embed_head = bind(ctx, f.embed_head);
    return v;
  };
  return VisualNetVars{bind_mapper(params.human), bind_mapper(params.object),
                       bind_fusion(params.action), bind_fusion(params.interaction)};
}

BlockOut mapper_forward(Tape& tape, Var features, const MapperVars& vars, MapperParams& params,
                        BnMode mode) {
  Var hidden = tape.relu(batch_norm(tape, proj(tape, features, vars.hidden), vars.bn,
                                    params.bn, mode));
  return BlockOut{linear(tape, hidden, vars.phi_head), linear(tape, hidden, vars.embed_head)};
}

BlockOut fusion_forward(Tape& tape, Var a_h, Var a_o, Var s, const FusionVars& vars,
                        FusionParams& params, BnMode mode) {
  Var ih = tape.relu(batch_norm(tape, proj(tape, a_h, vars.in_h), vars.bn_h, params.bn_h, mode));
  Var io = tape.relu(batch_norm(tape, proj(tape, a_o, vars.in_o), vars.bn_o, params.bn_o, mode));
  Var is = tape.relu(batch_norm(tape, proj(tape, s, vars.in_s), vars.bn_s, params.bn_s, mode));
  Var joint = tape.concat_cols({ih, io, is});
  Var trunk = tape.relu(
      batch_norm(tape, proj(tape, joint, vars.trunk), vars.bn_trunk, params.bn_trunk, mode));
  return BlockOut{linear(tape, trunk, vars.phi_head), linear(tape, trunk, vars.embed_head)};
}

VisualForward visual_forward(Tape& tape, Var a_h, Var a_o, Var s, const VisualNetVars& vars,
                             VisualNetParams& params, BnMode mode) {
  VisualForward out;
  out.human = mapper_forward(tape, a_h, vars.human, params.human, mode);
  out.object = mapper_forward(tape, a_o, vars.object, params.object, mode);
  out.action = fusion_forward(tape, a_h, a_o, s, vars.action, params.action, mode);
  out.interaction = fusion_forward(tape, a_h, a_o, s, vars.interaction, params.interaction, mode);
  Var logits = tape.add(tape.add(out.human.phi, out.object.phi),
                        tape.add(out.action.phi, out.interaction.phi));
  out.phi_pair = tape.sigmoid(logits);
  return out;
}

void visit_params(const std::string& prefix, VisualNetParams& p, ParamVisitor& v) {
  auto mapper = [&](const std::string& name, MapperParams& m) {
    visit_params(name + ".hidden", m.hidden, v);
    visit_params(name + ".bn", m.bn, v);
    visit_params(name + ".phi", m.phi_head, v);
    visit_params(name + ".embed", m.embed_head, v);
  };
  auto fusion = [&](const std::string& name, FusionParams& f) {
    visit_params(name + ".in_h", f.in_h, v);
    visit_params(name + ".bn_h", f.bn_h, v);
    visit_params(name + ".in_o", f.in_o, v);
    visit_params(name + ".bn_o", f.bn_o, v);
    visit_params(name + ".in_s", f.in_s, v);
    visit_params(name + ".bn_s", f.bn_s, v);
    visit_params(name + ".trunk", f.trunk, v);
    visit_params(name + ".bn_trunk", f.bn_trunk, v);
    visit_params(name + ".phi", f.phi_head, v);
    visit_params(name + ".embed", f.embed_head, v);
  };
  mapper(prefix + ".mapper_h", p.human);
  mapper(prefix + ".mapper_o", p.object);
  fusion(prefix + ".fusion_a", p.action);
  fusion(prefix + ".fusion_t", p.interaction);
}

}  // namespace consnet
