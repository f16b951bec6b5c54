// SPDX-License-Identifier: Apache-2.0
//
// consnet: zero-shot human-object interaction scoring on pre-extracted
// features. Subcommands cover corpus synthesis, graph construction,
// training, detection, evaluation, gradient checking, and embedder
// ablations.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "consnet/checkpoint.hpp"
#include "consnet/harness.hpp"
#include "consnet/io.hpp"

namespace fs = std::filesystem;
using namespace consnet;

namespace {

RunConfig load_config(const std::string& path) {
  if (path.empty()) return RunConfig{};
  return RunConfig::from_json_file(path);
}

ZeroShotSplit load_split_or_full(const std::string& path) {
  if (path.empty()) return ZeroShotSplit{};
  return load_split(path);
}

void write_loss_history(const TrainResult& result, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write loss history: " + path);
  for (std::size_t i = 0; i < result.history.size(); ++i) {
    const auto& rec = result.history[i];
    out << nlohmann::json{{"step", i},
                          {"loss_i", rec.interactiveness},
                          {"loss_c", rec.classification},
                          {"loss", rec.total}}
               .dump()
        << "\n";
  }
}

int run_synth(const std::string& config_path, const std::string& out_dir,
              const std::string& scenario, int holdout, const std::string& split_out) {
  const RunConfig cfg = load_config(config_path);
  const SynthCorpus corpus = generate_corpus(cfg.synth);
  save_corpus(corpus, out_dir);
  std::printf("wrote corpus: %d classes, %zu train images, %zu test images -> %s\n",
              corpus.space.num_classes(), corpus.train_images.size(),
              corpus.test_images.size(), out_dir.c_str());
  if (!scenario.empty()) {
    const ZeroShotSplit split = make_zero_shot_split(
        corpus.space, scenario_from_string(scenario), holdout, cfg.seed);
    const std::string path =
        split_out.empty() ? (fs::path(out_dir) / "split.json").string() : split_out;
    save_split(split, path);
    std::printf("wrote split: %zu unseen of %d classes -> %s\n", split.unseen_hoi_ids.size(),
                corpus.space.num_classes(), path.c_str());
  }
  return 0;
}

int run_build_graph(const std::string& config_path, const std::string& data_dir,
                    const std::string& split_path, const std::string& out_path) {
  const RunConfig cfg = load_config(config_path);
  const SynthCorpus corpus = load_corpus(data_dir);
  const ZeroShotSplit split = load_split_or_full(split_path);
  const SemanticInputs inputs =
      build_semantic_inputs(corpus.space, corpus.features, corpus.words, split, cfg.graph);
  save_graph(inputs.graph, corpus.space, out_path);
  std::printf("wrote graph: %d nodes, %zu edges -> %s\n", inputs.graph.num_nodes(),
              inputs.graph.edge_tags.size(), out_path.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& data_dir,
              const std::string& split_path, const std::string& out_path,
              const std::string& embedder, const std::string& history_path) {
  RunConfig cfg = load_config(config_path);
  if (!embedder.empty()) cfg.model.embedder = embedder_from_string(embedder);
  const SynthCorpus corpus = load_corpus(data_dir);
  const ZeroShotSplit split = load_split_or_full(split_path);
  const TrainOutput out = train_on_corpus(corpus, split, cfg);
  Model model = out.model;
  save_checkpoint(model, cfg.to_json(), cfg.seed, out_path);
  if (!history_path.empty()) write_loss_history(out.result, history_path);
  const auto& history = out.result.history;
  std::printf("trained %ld steps (%ld/epoch): loss %.4f -> %.4f; checkpoint -> %s\n",
              out.result.total_steps, out.result.steps_per_epoch,
              history.empty() ? 0.0 : static_cast<double>(history.front().total),
              history.empty() ? 0.0 : static_cast<double>(history.back().total),
              out_path.c_str());
  return 0;
}

int run_detect(const std::string& model_path, const std::string& data_dir,
               const std::string& split_path, const std::string& out_path) {
  const LoadedCheckpoint header = peek_checkpoint(model_path);
  const RunConfig cfg = RunConfig::from_json_text(header.config_json);
  const SynthCorpus corpus = load_corpus(data_dir);
  Model model = Model::init(resolve_model_config(cfg, corpus), header.seed);
  load_checkpoint(model, model_path);
  const ZeroShotSplit split = load_split_or_full(split_path);
  const auto detections = detect_on_corpus(model, corpus, split, cfg);
  save_detections(detections, out_path);
  std::printf("wrote %zu detections -> %s\n", detections.size(), out_path.c_str());
  return 0;
}

int run_eval(const std::string& dets_path, const std::string& gt_path,
             const std::string& labels_path, const std::string& split_path,
             const std::string& train_gt_path, int rare_threshold,
             const std::string& out_path) {
  const LabelSpace space = load_label_space(labels_path);
  const auto detections = load_detections(dets_path);
  const auto gt = load_ground_truth(gt_path);

  ZeroShotSplit split;
  EvalOptions options;
  options.rare_threshold = rare_threshold;
  if (!split_path.empty()) {
    split = load_split(split_path);
    options.split = &split;
  }
  std::map<int, int> counts;
  if (!train_gt_path.empty()) {
    const auto train_gt = load_ground_truth(train_gt_path);
    for (int c = 0; c < space.num_classes(); ++c) counts[c] = 0;
    for (const auto& pair : train_gt) {
      for (int id : pair.hoi_ids) counts[id]++;
    }
    options.train_positive_counts = &counts;
  }
  const EvalReport report = evaluate(detections, gt, space, options);
  if (!out_path.empty()) save_report(report, out_path);
  std::printf("map_full=%.4f", static_cast<double>(report.map_full));
  if (report.map_seen) std::printf(" map_seen=%.4f", static_cast<double>(*report.map_seen));
  if (report.map_unseen) std::printf(" map_unseen=%.4f", static_cast<double>(*report.map_unseen));
  if (report.map_rare) std::printf(" map_rare=%.4f", static_cast<double>(*report.map_rare));
  if (report.map_nonrare) {
    std::printf(" map_nonrare=%.4f", static_cast<double>(*report.map_nonrare));
  }
  std::printf("\n");
  return 0;
}

int run_gradcheck(const std::string& config_path) {
  RunConfig cfg = load_config(config_path);
  if (config_path.empty()) {
    // toy dimensions keep the parameter count small enough for central
    // differences over every coordinate
    cfg.seed = 2;
    cfg.synth.n_actions = 2;
    cfg.synth.n_objects = 3;
    cfg.synth.combo_density = real(0.7);
    cfg.synth.d_a = 5;
    cfg.synth.d_e = 4;
    cfg.synth.images = 8;
    cfg.synth.test_images = 2;
    cfg.model.visual.d_a = 5;
    cfg.model.d_e = 4;
    cfg.model.visual.d_v = 8;
    cfg.model.visual.mapper_hidden = 8;
    cfg.model.visual.fusion_h = 6;
    cfg.model.visual.fusion_o = 6;
    cfg.model.visual.fusion_s = 4;
    cfg.model.visual.trunk_hidden = 8;
    cfg.model.gat.depth = 3;
    cfg.model.gat.heads = 2;
    cfg.model.gat.head_dim = 4;
    cfg.model.gat.out_dim = 8;
    cfg.graph.eps_action = 1;
    cfg.graph.eps_object = 1;
    cfg.graph.eps_interaction = 2;
  }
  const real err = full_loss_grad_check(cfg, real(1e-5));
  std::printf("max_relative_error=%.3e\n", static_cast<double>(err));
  return err < real(1e-4) ? 0 : 1;
}

int run_ablate(const std::string& config_path, const std::string& data_dir,
               const std::string& split_path, const std::string& embedder, int depth,
               const std::string& out_path) {
  RunConfig cfg = load_config(config_path);
  cfg.model.embedder = embedder_from_string(embedder);
  if (depth > 0) cfg.model.gat.depth = depth;
  const SynthCorpus corpus = load_corpus(data_dir);
  const ZeroShotSplit split = load_split_or_full(split_path);
  const TrainOutput out = train_on_corpus(corpus, split, cfg);
  Model model = out.model;
  const auto detections = detect_on_corpus(model, corpus, split, cfg);

  EvalOptions options;
  if (!split.unseen_hoi_ids.empty()) options.split = &split;
  const EvalReport report = evaluate(detections, corpus.test_gt, corpus.space, options);
  if (!out_path.empty()) save_report(report, out_path);
  std::printf("embedder=%s depth=%d map_full=%.4f", embedder.c_str(), cfg.model.gat.depth,
              static_cast<double>(report.map_full));
  if (report.map_seen) std::printf(" map_seen=%.4f", static_cast<double>(*report.map_seen));
  if (report.map_unseen) std::printf(" map_unseen=%.4f", static_cast<double>(*report.map_unseen));
  std::printf("\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"knowledge-aware human-object interaction scoring"};
  app.require_subcommand(1);

  std::string config_path, data_dir, split_path, out_path, model_path;
  std::string scenario, embedder, history_path;
  std::string dets_path, gt_path, labels_path, train_gt_path;
  int holdout = 0;
  int depth = 0;
  int rare_threshold = 10;

  auto* synth = app.add_subcommand("synth", "generate a synthetic compositional corpus");
  synth->add_option("--config", config_path, "run configuration JSON");
  synth->add_option("--out", out_path, "output data directory")->required();
  synth->add_option("--scenario", scenario, "also write a zero-shot split: UC, UO, UA");
  synth->add_option("--holdout", holdout, "held-out count for the split");
  synth->add_option("--split-out", split_path, "split file path (default <out>/split.json)");

  auto* build = app.add_subcommand("build-graph", "build and export the consistency graph");
  build->add_option("--config", config_path, "run configuration JSON");
  build->add_option("--data", data_dir, "data directory")->required();
  build->add_option("--split", split_path, "zero-shot split file");
  build->add_option("--out", out_path, "graph JSON output")->required();

  auto* train_cmd = app.add_subcommand("train", "train the model end to end");
  train_cmd->add_option("--config", config_path, "run configuration JSON");
  train_cmd->add_option("--data", data_dir, "data directory")->required();
  train_cmd->add_option("--split", split_path, "zero-shot split file");
  train_cmd->add_option("--embedder", embedder, "override embedder: gat, mlp, none");
  train_cmd->add_option("--history", history_path, "per-step loss JSONL output");
  train_cmd->add_option("--out", out_path, "checkpoint output")->required();

  auto* detect_cmd = app.add_subcommand("detect", "run the three-stage pipeline on test images");
  detect_cmd->add_option("--model", model_path, "checkpoint")->required();
  detect_cmd->add_option("--data", data_dir, "data directory")->required();
  detect_cmd->add_option("--split", split_path, "zero-shot split file");
  detect_cmd->add_option("--out", out_path, "detections JSONL output")->required();

  auto* eval_cmd = app.add_subcommand("eval", "score detections against ground truth");
  eval_cmd->add_option("--dets", dets_path, "detections JSONL")->required();
  eval_cmd->add_option("--gt", gt_path, "ground truth JSONL")->required();
  eval_cmd->add_option("--labels", labels_path, "labelspace.json")->required();
  eval_cmd->add_option("--split", split_path, "zero-shot split file");
  eval_cmd->add_option("--train-gt", train_gt_path, "train GT for rare/non-rare buckets");
  eval_cmd->add_option("--rare-threshold", rare_threshold, "positives below this are rare");
  eval_cmd->add_option("--out", out_path, "report JSON output");

  auto* gradcheck_cmd =
      app.add_subcommand("gradcheck", "finite-difference check of the full training objective");
  gradcheck_cmd->add_option("--config", config_path, "run configuration JSON (toy dims)");

  auto* ablate_cmd = app.add_subcommand("ablate", "train/detect/eval with an embedder variant");
  ablate_cmd->add_option("--config", config_path, "run configuration JSON");
  ablate_cmd->add_option("--data", data_dir, "data directory")->required();
  ablate_cmd->add_option("--split", split_path, "zero-shot split file");
  ablate_cmd->add_option("--embedder", embedder, "gat, mlp or none")->required();
  ablate_cmd->add_option("--depth", depth, "semantic net depth override");
  ablate_cmd->add_option("--out", out_path, "report JSON output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth->parsed()) return run_synth(config_path, out_path, scenario, holdout, split_path);
    if (build->parsed()) return run_build_graph(config_path, data_dir, split_path, out_path);
    if (train_cmd->parsed()) {
      return run_train(config_path, data_dir, split_path, out_path, embedder, history_path);
    }
    if (detect_cmd->parsed()) return run_detect(model_path, data_dir, split_path, out_path);
    if (eval_cmd->parsed()) {
      return run_eval(dets_path, gt_path, labels_path, split_path, train_gt_path, rare_threshold,
                      out_path);
    }
    if (gradcheck_cmd->parsed()) return run_gradcheck(config_path);
    if (ablate_cmd->parsed()) {
      return run_ablate(config_path, data_dir, split_path, embedder, depth, out_path);
    }
  } catch (const std::exception& e) {
    std::cerr << nlohmann::json{{"error", e.what()}}.dump() << "\n";
    return 1;
  }
  return 1;
}
