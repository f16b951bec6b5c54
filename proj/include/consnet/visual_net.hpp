// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>

#include "consnet/nn.hpp"
#include "consnet/tape.hpp"

namespace consnet {

using Box = std::array<real, 4>;  // x1, y1, x2, y2

/// Both boxes expressed relative to the origin of their union box and
/// divided by its area: ((x1-dx)/psi, (x2-dx)/psi, (y1-dy)/psi, (y2-dy)/psi)
/// for the human then the object.
std::array<real, 8> spatial_config(const Box& b_h, const Box& b_o);

/// phi_{h,o} = sigmoid(phi_h + phi_o + phi_a + phi_t)
real interactiveness(real phi_h, real phi_o, real phi_a, real phi_t);

struct VisualNetConfig {
  int d_a = 64;            // input feature dimension
  int d_v = 1024;          // embedding dimension
  int mapper_hidden = 1024;
  int fusion_h = 512;
  int fusion_o = 512;
  int fusion_s = 256;
  int trunk_hidden = 1024;
};

/// Mapper block: feature -> hidden (BN + ReLU) -> (interactiveness logit,
/// embedding).
struct MapperParams {
  ProjParams hidden;        // bias-free, feeds the BN
  BatchNormParams bn;
  LinearParams phi_head;    // hidden -> 1
  LinearParams embed_head;  // hidden -> d_v
};

/// Fusion block: (human, object, spatial) each mapped and normalized, then
/// concatenated into a trunk that emits the same two outputs.
struct FusionParams {
  ProjParams in_h, in_o, in_s;  // bias-free, each feeds a BN
  BatchNormParams bn_h, bn_o, bn_s;
  ProjParams trunk;
  BatchNormParams bn_trunk;
  LinearParams phi_head;
  LinearParams embed_head;
};

/// Human and object mappers have separate parameters; one fusion block each
/// for the action and interaction levels.
struct VisualNetParams {
  MapperParams human;
  MapperParams object;
  FusionParams action;
  FusionParams interaction;
};

VisualNetParams init_visual_net(const VisualNetConfig& cfg, Rng& rng);

struct MapperVars {
  ProjVars hidden;
  BatchNormVars bn;
  LinearVars phi_head, embed_head;
};

struct FusionVars {
  ProjVars in_h, in_o, in_s;
  BatchNormVars bn_h, bn_o, bn_s;
  ProjVars trunk;
  BatchNormVars bn_trunk;
  LinearVars phi_head, embed_head;
};

struct VisualNetVars {
  MapperVars human, object;
  FusionVars action, interaction;
};

VisualNetVars bind(BindCtx& ctx, const VisualNetParams& params);

struct BlockOut {
  Var phi;  // B x 1 logits
  Var v;    // B x d_v embeddings
};

BlockOut mapper_forward(Tape& tape, Var features, const MapperVars& vars, MapperParams& params,
                        BnMode mode);

BlockOut fusion_forward(Tape& tape, Var a_h, Var a_o, Var s, const FusionVars& vars,
                        FusionParams& params, BnMode mode);

/// All four embedding levels for a batch of candidates.
struct VisualForward {
  BlockOut human, object, action, interaction;
  Var phi_pair;  // B x 1, post-sigmoid interactiveness
};

VisualForward visual_forward(Tape& tape, Var a_h, Var a_o, Var s, const VisualNetVars& vars,
                             VisualNetParams& params, BnMode mode);

void visit_params(const std::string& prefix, VisualNetParams& p, ParamVisitor& v);

}  // namespace consnet
