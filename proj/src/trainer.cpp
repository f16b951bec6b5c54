// SPDX-License-Identifier: Apache-2.0
#include "consnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "consnet/rng.hpp"
#include "consnet/visual_net.hpp"

namespace consnet {

namespace {
constexpr real kClampEps = real(1e-12);
constexpr real kPi = real(3.14159265358979323846);

real clamp_prob(real p) {
  return std::min(std::max(p, kClampEps), real(1) - kClampEps);
}
}  // namespace

real lr_at(long step, const TrainConfig& cfg, long total_steps) {
  if (step < 0) throw std::invalid_argument("lr_at: negative step");
  if (step < cfg.warmup_iters) {
    const real t = static_cast<real>(step) / cfg.warmup_iters;
    return cfg.warmup_start_lr + (cfg.lr0 - cfg.warmup_start_lr) * t;
  }
  if (total_steps <= cfg.warmup_iters) return cfg.lr0;
  real progress =
      static_cast<real>(step - cfg.warmup_iters) / static_cast<real>(total_steps - cfg.warmup_iters);
  progress = std::clamp(progress, real(0), real(1));
  return cfg.lr0 * real(0.5) * (real(1) + std::cos(kPi * progress));
}

real interactiveness_loss(real phi, int u) {
  if (u != 0 && u != 1) throw std::invalid_argument("interactiveness_loss: u must be 0 or 1");
  const real p = clamp_prob(phi);
  return -(u * std::log(p) + (1 - u) * std::log(real(1) - p));
}

real classification_loss(const std::vector<real>& r, const std::vector<int>& y) {
  if (r.size() != y.size() || r.empty()) {
    throw std::invalid_argument("classification_loss: shape mismatch");
  }
  real acc = 0;
  for (std::size_t k = 0; k < r.size(); ++k) {
    acc += interactiveness_loss(r[k], y[k]);
  }
  return acc / static_cast<real>(r.size());
}

real total_loss(real l_i, real l_c, real eta) {
  if (eta < 0) throw std::invalid_argument("total_loss: eta must be >= 0");
  return l_i + eta * l_c;
}

StepBatch make_step_batch(const std::vector<Candidate>& corpus, const std::vector<int>& rows,
                          const LabelSpace& space, const std::map<int, int>* class_counts,
                          TrainConfig::ClassWeighting weighting) {
  if (rows.empty()) throw std::invalid_argument("make_step_batch: empty batch");
  const int B = static_cast<int>(rows.size());
  const int d_a = static_cast<int>(corpus[rows[0]].a_h.size());
  const int C = space.num_classes();

  StepBatch batch;
  batch.a_h = Tensor(B, d_a);
  batch.a_o = Tensor(B, d_a);
  batch.s = Tensor(B, 8);
  batch.u = Tensor(B, 1);
  for (int r = 0; r < B; ++r) {
    const Candidate& cand = corpus[rows[r]];
    if (!cand.u.has_value()) throw std::invalid_argument("make_step_batch: unlabeled candidate");
    if (static_cast<int>(cand.a_h.size()) != d_a || static_cast<int>(cand.a_o.size()) != d_a) {
      throw std::invalid_argument("make_step_batch: feature dimension mismatch");
    }
    std::copy(cand.a_h.begin(), cand.a_h.end(), &batch.a_h.at(r, 0));
    std::copy(cand.a_o.begin(), cand.a_o.end(), &batch.a_o.at(r, 0));
    const auto sc = spatial_config(cand.b_h, cand.b_o);
    std::copy(sc.begin(), sc.end(), &batch.s.at(r, 0));
    batch.u.at(r, 0) = static_cast<real>(*cand.u);
    if (*cand.u == 1) batch.pos_rows.push_back(r);
  }

  const int P = static_cast<int>(batch.pos_rows.size());
  if (P > 0) {
    batch.y_pos = Tensor::zeros(P, C);
    std::vector<real> weights(P, real(1));
    for (int p = 0; p < P; ++p) {
      const Candidate& cand = corpus[rows[batch.pos_rows[p]]];
      for (int id : cand.y) {
        if (id < 0 || id >= C) throw std::invalid_argument("make_step_batch: invalid class id");
        batch.y_pos.at(p, id) = real(1);
      }
      if (weighting == TrainConfig::ClassWeighting::inverse_frequency) {
        if (!class_counts) {
          throw std::invalid_argument("make_step_batch: inverse_frequency needs class counts");
        }
        real mean_freq = 0;
        for (int id : cand.y) {
          const auto it = class_counts->find(id);
          mean_freq += static_cast<real>(it == class_counts->end() ? 0 : it->second);
        }
        mean_freq = std::max(real(1), mean_freq / static_cast<real>(cand.y.size()));
        weights[p] = real(1) / mean_freq;
      }
    }
    real sum = 0;
    for (real w : weights) sum += w;
    batch.pos_weights = Tensor(P, 1);
    for (int p = 0; p < P; ++p) batch.pos_weights.at(p, 0) = weights[p] / sum;
  }
  return batch;
}

namespace {

/// -(y log p + (1-y) log(1-p)) elementwise, with p clamped.
Var bce_matrix(Tape& tape, Var p, Var y) {
  const Tensor& vp = tape.value(p);
  Var ones = tape.input(Tensor::full(vp.rows(), vp.cols(), real(1)));
  Var pc = tape.clamp(p, kClampEps, real(1) - kClampEps);
  Var pos_term = tape.mul(y, tape.log(pc));
  Var neg_term = tape.mul(tape.sub(ones, y), tape.log(tape.sub(ones, pc)));
  return tape.scale(tape.add(pos_term, neg_term), real(-1));
}

}  // namespace

StepLoss model_loss(Tape& tape, Model& model, const ModelVars& vars, const StepBatch& batch,
                    const ConsistencyGraph* graph, const Tensor* Z, const ClassNodeIndices& cls,
                    real eta, BnMode mode) {
  Var a_h = tape.input(batch.a_h);
  Var a_o = tape.input(batch.a_o);
  Var s = tape.input(batch.s);
  VisualForward vf = visual_forward(tape, a_h, a_o, s, vars.visual, model.visual, mode);

  // Eq. 11 over the whole batch
  Var u = tape.input(batch.u);
  StepLoss loss;
  loss.interactiveness = tape.mean_all(bce_matrix(tape, vf.phi_pair, u));

  // Eq. 12 over positive rows only
  if (!batch.pos_rows.empty()) {
    Var sem{};
    if (model.cfg.embedder != EmbedderType::none) {
      if (graph == nullptr || Z == nullptr) {
        throw std::invalid_argument("model_loss: graph and Z required for semantic embedders");
      }
      sem = embed_semantics(tape, model, vars, *graph, tape.input(*Z));
    }
    Var r = classification_scores(tape, model, vars, vf, batch.pos_rows, sem, cls);
    Var bce = bce_matrix(tape, r, tape.input(batch.y_pos));
    const int C = tape.value(bce).cols();
    Var row_means = tape.scale(tape.matmul(bce, tape.input(Tensor::full(C, 1, real(1)))),
                               real(1) / static_cast<real>(C));
    loss.classification = tape.matmul(tape.transpose(tape.input(batch.pos_weights)), row_means);
  } else {
    loss.classification = tape.input(Tensor::scalar(real(0)));
  }

  loss.total = tape.add(loss.interactiveness, tape.scale(loss.classification, eta));
  return loss;
}

namespace {

struct ParamEntry {
  std::string name;
  Tensor* value;
  ParamKind kind;
};

struct RegistryCollector : ParamVisitor {
  std::vector<ParamEntry> entries;
  void visit(const std::string& name, Tensor& tensor, ParamKind kind) override {
    entries.push_back({name, &tensor, kind});
  }
};

class PoolSampler {
public:
  PoolSampler(std::vector<int> pool, Rng& rng) : pool_(std::move(pool)), rng_(&rng) {
    rng_->shuffle(pool_);
  }
  bool empty() const { return pool_.empty(); }
  int size() const { return static_cast<int>(pool_.size()); }
  int next() {
    if (cursor_ == pool_.size()) {
      rng_->shuffle(pool_);
      cursor_ = 0;
    }
    return pool_[cursor_++];
  }

private:
  std::vector<int> pool_;
  std::size_t cursor_ = 0;
  Rng* rng_;
};

}  // namespace

TrainResult train(Model& model, const std::vector<Candidate>& corpus,
                  const ConsistencyGraph* graph, const Tensor* Z, const LabelSpace& space,
                  const TrainConfig& cfg) {
  if (corpus.empty()) throw std::invalid_argument("train: empty corpus");
  if (cfg.batch_size < 1 || cfg.pos_ratio < 0 || cfg.neg_ratio < 0 ||
      cfg.pos_ratio + cfg.neg_ratio == 0) {
    throw std::invalid_argument("train: bad batch configuration");
  }

  RegistryCollector registry;
  model.visit_params(registry);
  std::vector<Tensor> momentum_buffers;
  for (const auto& entry : registry.entries) {
    momentum_buffers.push_back(Tensor::zeros(entry.value->rows(), entry.value->cols()));
  }

  std::vector<int> pos_pool, neg_pool;
  for (int i = 0; i < static_cast<int>(corpus.size()); ++i) {
    if (!corpus[i].u.has_value()) throw std::invalid_argument("train: unlabeled candidate");
    (*corpus[i].u == 1 ? pos_pool : neg_pool).push_back(i);
  }

  int pos_per_batch = cfg.batch_size * cfg.pos_ratio / (cfg.pos_ratio + cfg.neg_ratio);
  int neg_per_batch = cfg.batch_size - pos_per_batch;
  if (pos_pool.empty()) {
    pos_per_batch = 0;
    neg_per_batch = cfg.batch_size;
  }
  if (neg_pool.empty()) {
    neg_per_batch = 0;
    pos_per_batch = cfg.batch_size;
    if (pos_pool.empty()) throw std::invalid_argument("train: no labeled samples");
  }

  long steps_per_epoch = 1;
  if (pos_per_batch > 0) {
    steps_per_epoch = std::max<long>(
        steps_per_epoch, (static_cast<long>(pos_pool.size()) + pos_per_batch - 1) / pos_per_batch);
  }
  if (neg_per_batch > 0) {
    steps_per_epoch = std::max<long>(
        steps_per_epoch, (static_cast<long>(neg_pool.size()) + neg_per_batch - 1) / neg_per_batch);
  }
  const long total_steps = steps_per_epoch * cfg.epochs;

  const ClassNodeIndices cls = class_node_indices(space);
  const std::map<int, int> counts = train_positive_counts(corpus, space.num_classes());

  Rng rng(cfg.seed);
  PoolSampler pos_sampler(pos_pool, rng);
  PoolSampler neg_sampler(neg_pool, rng);

  TrainResult result;
  result.steps_per_epoch = steps_per_epoch;
  result.total_steps = total_steps;
  result.history.reserve(total_steps);

  for (long step = 0; step < total_steps; ++step) {
    std::vector<int> rows;
    rows.reserve(cfg.batch_size);
    for (int i = 0; i < pos_per_batch; ++i) rows.push_back(pos_sampler.next());
    for (int i = 0; i < neg_per_batch; ++i) rows.push_back(neg_sampler.next());

    const StepBatch batch = make_step_batch(corpus, rows, space, &counts, cfg.weighting);

    Tape tape;
    BindCtx ctx{tape};
    ModelVars vars = bind(ctx, model);
    const StepLoss loss = model_loss(tape, model, vars, batch, graph, Z, cls, cfg.eta,
                                     BnMode::train);

    LossRecord rec;
    rec.interactiveness = tape.value(loss.interactiveness).item();
    rec.classification = tape.value(loss.classification).item();
    rec.total = tape.value(loss.total).item();
    if (!std::isfinite(rec.total)) {
      throw std::runtime_error("train: non-finite loss at step " + std::to_string(step));
    }
    result.history.push_back(rec);

    tape.backward(loss.total);

    const real lr = lr_at(step, cfg, total_steps);
    for (std::size_t i = 0; i < registry.entries.size(); ++i) {
      const ParamEntry& entry = registry.entries[i];
      if (entry.kind == ParamKind::bn_running) continue;  // updated by BN itself
      const auto it = ctx.leaves.find(entry.value);
      if (it == ctx.leaves.end()) continue;  // embedder branch not in use
      const Tensor g = tape.grad(it->second);
      // decay applies to weights only, not biases, BN affines or attention vectors
      const bool decay = entry.kind == ParamKind::weight;
      sgd_update(*entry.value, momentum_buffers[i], g, lr, cfg.momentum,
                 decay ? cfg.weight_decay : real(0));
    }
  }
  return result;
}

void sgd_update(Tensor& weights, Tensor& velocity, const Tensor& grad, real lr, real momentum,
                real weight_decay) {
  if (!weights.same_shape(velocity) || !weights.same_shape(grad)) {
    throw std::invalid_argument("sgd_update: shape mismatch");
  }
  for (int j = 0; j < weights.size(); ++j) {
    velocity[j] = momentum * velocity[j] + (grad[j] + weight_decay * weights[j]);
    weights[j] -= lr * velocity[j];
  }
}

}  // namespace consnet
