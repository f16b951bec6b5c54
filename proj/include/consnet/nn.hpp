// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "consnet/rng.hpp"
#include "consnet/tape.hpp"
#include "consnet/tensor.hpp"

namespace consnet {

/// y = x . W + b
struct LinearParams {
  Tensor W;  // in x out
  Tensor b;  // 1 x out
};

struct LinearVars {
  Var W, b;
};

/// Bias-free projection for layers feeding a normalization: a bias there is
/// cancelled by the mean subtraction and would only carry gradient noise.
struct ProjParams {
  Tensor W;
};

struct ProjVars {
  Var W;
};

struct BatchNormParams {
  Tensor gamma;  // 1 x features
  Tensor beta;   // 1 x features
  BatchNormState state;
};

struct BatchNormVars {
  Var gamma, beta;
};

LinearParams init_linear(int in, int out, Rng& rng);
ProjParams init_proj(int in, int out, Rng& rng);
BatchNormParams init_batch_norm(int features);

/// Uniform Glorot-style fan-based init in [-a, a], a = sqrt(6 / (fan_in + fan_out)).
Tensor glorot_uniform(int rows, int cols, Rng& rng);

/// Creates tape leaves for parameters and remembers which Var belongs to
/// which parameter tensor, so optimizers can read gradients back.
struct BindCtx {
  explicit BindCtx(Tape& t) : tape(t) {}

  Tape& tape;
  std::unordered_map<const Tensor*, Var> leaves;

  Var leaf(const Tensor& t) {
    Var v = tape.input(t);
    leaves.emplace(&t, v);
    return v;
  }
};

LinearVars bind(BindCtx& ctx, const LinearParams& p);
ProjVars bind(BindCtx& ctx, const ProjParams& p);
BatchNormVars bind(BindCtx& ctx, const BatchNormParams& p);

Var linear(Tape& tape, Var x, const LinearVars& p);
Var proj(Tape& tape, Var x, const ProjVars& p);
Var batch_norm(Tape& tape, Var x, const BatchNormVars& v, BatchNormParams& p, BnMode mode);

enum class ParamKind { weight, bias, bn_gamma, bn_beta, bn_running };

/// Visitor over named tensors. bn_running entries are saved in checkpoints
/// but receive no gradients; weight entries are the only ones weight decay
/// applies to.
struct ParamVisitor {
  virtual ~ParamVisitor() = default;
  virtual void visit(const std::string& name, Tensor& tensor, ParamKind kind) = 0;
};

void visit_params(const std::string& prefix, LinearParams& p, ParamVisitor& v);
void visit_params(const std::string& prefix, ProjParams& p, ParamVisitor& v);
void visit_params(const std::string& prefix, BatchNormParams& p, ParamVisitor& v);

}  // namespace consnet
