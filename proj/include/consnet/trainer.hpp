// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "consnet/corpus.hpp"
#include "consnet/model.hpp"
#include "consnet/pipeline.hpp"

namespace consnet {

struct TrainConfig {
  real lr0 = real(0.01);
  real momentum = real(0.9);
  real weight_decay = real(1e-4);
  real warmup_start_lr = real(0.001);
  int warmup_iters = 500;
  int epochs = 5;
  int batch_size = 64;
  int pos_ratio = 1;
  int neg_ratio = 3;
  real eta = real(1);
  enum class ClassWeighting { uniform, inverse_frequency };
  ClassWeighting weighting = ClassWeighting::uniform;
  std::uint64_t seed = 0;
};

/// Linear warm-up from warmup_start_lr to lr0 over [0, warmup_iters], then
/// cosine annealing of lr0 down to zero over the remaining steps.
real lr_at(long step, const TrainConfig& cfg, long total_steps);

// scalar reference forms of Eq. 11-13 (clamped to [1e-12, 1-1e-12])
real interactiveness_loss(real phi, int u);
real classification_loss(const std::vector<real>& r, const std::vector<int>& y);
real total_loss(real l_i, real l_c, real eta);

struct LossRecord {
  real interactiveness = 0;
  real classification = 0;
  real total = 0;
};

/// One assembled mini-batch. Positive rows come first; y_pos and pos_weights
/// are empty when the batch has no positives.
struct StepBatch {
  Tensor a_h, a_o, s;         // B x d_a, B x d_a, B x 8
  Tensor u;                   // B x 1
  std::vector<int> pos_rows;
  Tensor y_pos;               // P x C
  Tensor pos_weights;         // P x 1, sums to 1
};

StepBatch make_step_batch(const std::vector<Candidate>& corpus, const std::vector<int>& rows,
                          const LabelSpace& space, const std::map<int, int>* class_counts,
                          TrainConfig::ClassWeighting weighting);

struct StepLoss {
  Var total, interactiveness, classification;
};

/// Full Eq. 13 objective on one batch: interactiveness BCE over every row,
/// classification BCE over positive rows only. graph/Z may be null for
/// embedder == none.
StepLoss model_loss(Tape& tape, Model& model, const ModelVars& vars, const StepBatch& batch,
                    const ConsistencyGraph* graph, const Tensor* Z, const ClassNodeIndices& cls,
                    real eta, BnMode mode);

/// v <- momentum * v + (g + weight_decay * w); w <- w - lr * v
void sgd_update(Tensor& weights, Tensor& velocity, const Tensor& grad, real lr, real momentum,
                real weight_decay);

struct TrainResult {
  std::vector<LossRecord> history;
  long steps_per_epoch = 0;
  long total_steps = 0;
};

/// SGD with momentum and weight decay over all trainable parameters;
/// semantic embeddings are recomputed inside every step's tape. Deterministic
/// given cfg.seed. Throws on non-finite loss.
TrainResult train(Model& model, const std::vector<Candidate>& corpus,
                  const ConsistencyGraph* graph, const Tensor* Z, const LabelSpace& space,
                  const TrainConfig& cfg);

}  // namespace consnet
