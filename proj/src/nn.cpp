// SPDX-License-Identifier: Apache-2.0
#include "consnet/nn.hpp"

#include <cmath>

namespace consnet {

Tensor glorot_uniform(int rows, int cols, Rng& rng) {
  Tensor t(rows, cols);
  const real a = std::sqrt(real(6) / (rows + cols));
  for (int i = 0; i < t.size(); ++i) t[i] = rng.uniform(-a, a);
  return t;
}

LinearParams init_linear(int in, int out, Rng& rng) {
  return LinearParams{glorot_uniform(in, out, rng), Tensor::zeros(1, out)};
}

ProjParams init_proj(int in, int out, Rng& rng) { return ProjParams{glorot_uniform(in, out, rng)}; }

BatchNormParams init_batch_norm(int features) {
  return BatchNormParams{Tensor::full(1, features, real(1)), Tensor::zeros(1, features),
                         BatchNormState(features)};
}

LinearVars bind(BindCtx& ctx, const LinearParams& p) {
  return LinearVars{ctx.leaf(p.W), ctx.leaf(p.b)};
}

ProjVars bind(BindCtx& ctx, const ProjParams& p) { return ProjVars{ctx.leaf(p.W)}; }

BatchNormVars bind(BindCtx& ctx, const BatchNormParams& p) {
  return BatchNormVars{ctx.leaf(p.gamma), ctx.leaf(p.beta)};
}

Var linear(Tape& tape, Var x, const LinearVars& p) {
  return tape.add_row_bias(tape.matmul(x, p.W), p.b);
}

Var proj(Tape& tape, Var x, const ProjVars& p) { return tape.matmul(x, p.W); }

Var batch_norm(Tape& tape, Var x, const BatchNormVars& v, BatchNormParams& p, BnMode mode) {
  return tape.batch_norm(x, v.gamma, v.beta, p.state, mode);
}

void visit_params(const std::string& prefix, LinearParams& p, ParamVisitor& v) {
  v.visit(prefix + ".W", p.W, ParamKind::weight);
  v.visit(prefix + ".b", p.b, ParamKind::bias);
}

void visit_params(const std::string& prefix, ProjParams& p, ParamVisitor& v) {
  v.visit(prefix + ".W", p.W, ParamKind::weight);
}

void visit_params(const std::string& prefix, BatchNormParams& p, ParamVisitor& v) {
  v.visit(prefix + ".gamma", p.gamma, ParamKind::bn_gamma);
  v.visit(prefix + ".beta", p.beta, ParamKind::bn_beta);
  v.visit(prefix + ".running_mean", p.state.running_mean, ParamKind::bn_running);
  v.visit(prefix + ".running_var", p.state.running_var, ParamKind::bn_running);
}

}  // namespace consnet
