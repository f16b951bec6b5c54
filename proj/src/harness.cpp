// SPDX-License-Identifier: Apache-2.0
#include "consnet/harness.hpp"

#include <filesystem>
#include <stdexcept>

#include "consnet/checkpoint.hpp"
#include "consnet/io.hpp"

namespace consnet {

namespace fs = std::filesystem;

namespace {
std::string join(const std::string& dir, const char* name) {
  return (fs::path(dir) / name).string();
}
}  // namespace

void save_corpus(const SynthCorpus& corpus, const std::string& dir) {
  fs::create_directories(dir);
  save_label_space(corpus.space, join(dir, DataFiles::label_space));
  save_word_vectors(corpus.words, join(dir, DataFiles::words));
  save_feature_records(corpus.features, join(dir, DataFiles::features));
  save_image_detections(corpus.train_images, join(dir, DataFiles::train_detections));
  save_ground_truth(corpus.train_gt, join(dir, DataFiles::train_gt));
  save_image_detections(corpus.test_images, join(dir, DataFiles::test_detections));
  save_ground_truth(corpus.test_gt, join(dir, DataFiles::test_gt));
}

SynthCorpus load_corpus(const std::string& dir) {
  SynthCorpus corpus;
  corpus.space = load_label_space(join(dir, DataFiles::label_space));
  corpus.words = load_word_vectors(join(dir, DataFiles::words));
  corpus.features = load_feature_records(join(dir, DataFiles::features));
  corpus.train_images = load_image_detections(join(dir, DataFiles::train_detections));
  corpus.train_gt = load_ground_truth(join(dir, DataFiles::train_gt));
  corpus.test_images = load_image_detections(join(dir, DataFiles::test_detections));
  corpus.test_gt = load_ground_truth(join(dir, DataFiles::test_gt));
  return corpus;
}

SemanticInputs build_semantic_inputs(const LabelSpace& space,
                                     const std::vector<FeatureRecord>& records,
                                     const WordVectorTable& words, const ZeroShotSplit& split,
                                     const GraphConfig& gcfg) {
  const auto filtered = filter_feature_records(records, space, split);
  const auto reps = universal_visual_rep(filtered);
  const auto joint = build_node_joint_features(space, reps, words, gcfg.rho_v, gcfg.rho_s);
  SemanticInputs out;
  out.graph = build_graph(space, joint, gcfg.eps_action, gcfg.eps_object, gcfg.eps_interaction);
  out.Z = node_feature_matrix(space, words);
  return out;
}

ModelConfig resolve_model_config(const RunConfig& cfg, const SynthCorpus& corpus) {
  ModelConfig model_cfg = cfg.model;
  model_cfg.num_classes = corpus.space.num_classes();
  model_cfg.d_e = corpus.words.dim;
  // feature dimension from the data itself
  int d_a = model_cfg.visual.d_a;
  for (const auto& image : corpus.train_images) {
    if (!image.humans.empty()) {
      d_a = static_cast<int>(image.humans.front().feature.size());
      break;
    }
  }
  model_cfg.visual.d_a = d_a;
  model_cfg.gat.out_dim = model_cfg.visual.d_v;
  return model_cfg;
}

TrainOutput train_on_corpus(const SynthCorpus& corpus, const ZeroShotSplit& split,
                            const RunConfig& cfg) {
  const auto candidates =
      assemble_training_candidates(corpus.train_images, corpus.train_gt, cfg.pipeline.train_theta);
  const auto filtered = filter_training_corpus(candidates, split);

  TrainOutput out;
  const ModelConfig model_cfg = resolve_model_config(cfg, corpus);
  out.model = Model::init(model_cfg, cfg.seed);

  if (model_cfg.embedder == EmbedderType::none) {
    out.result = train(out.model, filtered, nullptr, nullptr, corpus.space, cfg.train);
    return out;
  }
  const SemanticInputs inputs =
      build_semantic_inputs(corpus.space, corpus.features, corpus.words, split, cfg.graph);
  out.result =
      train(out.model, filtered, &inputs.graph, &inputs.Z, corpus.space, cfg.train);
  return out;
}

std::vector<Detection> detect_on_corpus(Model& model, const SynthCorpus& corpus,
                                        const ZeroShotSplit& split, const RunConfig& cfg) {
  Tensor semantic;
  if (model.cfg.embedder != EmbedderType::none) {
    const SemanticInputs inputs =
        build_semantic_inputs(corpus.space, corpus.features, corpus.words, split, cfg.graph);
    semantic = compute_semantic_matrix(model, inputs.graph, inputs.Z);
  }
  return detect_all(corpus.test_images, model, semantic, corpus.space, cfg.pipeline);
}

std::vector<Detection> shuffle_scores(const std::vector<Detection>& detections,
                                      std::uint64_t seed) {
  std::vector<real> scores;
  scores.reserve(detections.size());
  for (const auto& det : detections) scores.push_back(det.score);
  Rng rng(seed);
  rng.shuffle(scores);
  std::vector<Detection> shuffled = detections;
  for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].score = scores[i];
  return shuffled;
}

real full_loss_grad_check(const RunConfig& cfg, real eps) {
  SynthCorpus corpus = generate_corpus(cfg.synth);
  const ZeroShotSplit split;  // full supervision
  const auto candidates =
      assemble_training_candidates(corpus.train_images, corpus.train_gt, cfg.pipeline.train_theta);

  // a 4-sample batch with both positives and negatives
  std::vector<int> pos, neg;
  for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
    ((*candidates[i].u == 1) ? pos : neg).push_back(i);
  }
  if (pos.size() < 2 || neg.size() < 2) {
    throw std::runtime_error("full_loss_grad_check: corpus too small for a mixed batch");
  }
  const std::vector<int> rows{pos[0], pos[1], neg[0], neg[1]};
  const StepBatch batch = make_step_batch(candidates, rows, corpus.space, nullptr,
                                          TrainConfig::ClassWeighting::uniform);

  const ModelConfig model_cfg = resolve_model_config(cfg, corpus);
  Model model = Model::init(model_cfg, cfg.seed);
  const SemanticInputs inputs =
      build_semantic_inputs(corpus.space, corpus.features, corpus.words, split, cfg.graph);
  const ClassNodeIndices cls = class_node_indices(corpus.space);

  struct Collector : ParamVisitor {
    std::vector<Tensor*> trainable;
    void visit(const std::string&, Tensor& tensor, ParamKind kind) override {
      if (kind != ParamKind::bn_running) trainable.push_back(&tensor);
    }
  } collector;
  model.visit_params(collector);

  GradCheckProblem problem;
  problem.params = collector.trainable;
  problem.build = [&](Tape& tape, std::vector<Var>& vars) {
    BindCtx ctx{tape};
    ModelVars mv = bind(ctx, model);
    for (Tensor* t : collector.trainable) vars.push_back(ctx.leaves.at(t));
    const StepLoss loss = model_loss(tape, model, mv, batch,
                                     model.cfg.embedder == EmbedderType::none ? nullptr
                                                                              : &inputs.graph,
                                     model.cfg.embedder == EmbedderType::none ? nullptr
                                                                              : &inputs.Z,
                                     cls, cfg.train.eta, BnMode::train_static);
    return loss.total;
  };
  return grad_check(problem, eps);
}

}  // namespace consnet
