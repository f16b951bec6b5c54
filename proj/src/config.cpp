// SPDX-License-Identifier: Apache-2.0
#include "consnet/config.hpp"

#include <json.hpp>

#include <fstream>
#include <stdexcept>

namespace consnet {

using nlohmann::json;

namespace {

template <class T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void parse_graph(const json& j, GraphConfig& g) {
  get_if_present(j, "eps_action", g.eps_action);
  get_if_present(j, "eps_object", g.eps_object);
  get_if_present(j, "eps_interaction", g.eps_interaction);
  get_if_present(j, "rho_v", g.rho_v);
  get_if_present(j, "rho_s", g.rho_s);
}

void parse_model(const json& j, ModelConfig& m) {
  if (j.contains("embedder")) m.embedder = embedder_from_string(j.at("embedder").get<std::string>());
  get_if_present(j, "d_e", m.d_e);
  get_if_present(j, "num_classes", m.num_classes);
  get_if_present(j, "gamma", m.gamma);
  get_if_present(j, "d_a", m.visual.d_a);
  get_if_present(j, "d_v", m.visual.d_v);
  get_if_present(j, "mapper_hidden", m.visual.mapper_hidden);
  get_if_present(j, "fusion_h", m.visual.fusion_h);
  get_if_present(j, "fusion_o", m.visual.fusion_o);
  get_if_present(j, "fusion_s", m.visual.fusion_s);
  get_if_present(j, "trunk_hidden", m.visual.trunk_hidden);
  get_if_present(j, "gat_depth", m.gat.depth);
  get_if_present(j, "gat_heads", m.gat.heads);
  get_if_present(j, "gat_head_dim", m.gat.head_dim);
  get_if_present(j, "leaky_slope", m.gat.leaky_slope);
  m.gat.out_dim = m.visual.d_v;  // semantic and visual embeddings share one space
}

void parse_train(const json& j, TrainConfig& t) {
  get_if_present(j, "lr0", t.lr0);
  get_if_present(j, "momentum", t.momentum);
  get_if_present(j, "weight_decay", t.weight_decay);
  get_if_present(j, "warmup_start_lr", t.warmup_start_lr);
  get_if_present(j, "warmup_iters", t.warmup_iters);
  get_if_present(j, "epochs", t.epochs);
  get_if_present(j, "batch_size", t.batch_size);
  if (j.contains("pos_neg_ratio")) {
    const auto ratio = j.at("pos_neg_ratio").get<std::vector<int>>();
    if (ratio.size() != 2) throw std::invalid_argument("pos_neg_ratio must be [pos, neg]");
    t.pos_ratio = ratio[0];
    t.neg_ratio = ratio[1];
  }
  get_if_present(j, "eta", t.eta);
  if (j.contains("class_weighting")) {
    const auto s = j.at("class_weighting").get<std::string>();
    if (s == "uniform") {
      t.weighting = TrainConfig::ClassWeighting::uniform;
    } else if (s == "inverse_frequency") {
      t.weighting = TrainConfig::ClassWeighting::inverse_frequency;
    } else {
      throw std::invalid_argument("unknown class_weighting '" + s + "'");
    }
  }
  get_if_present(j, "seed", t.seed);
}

void parse_pipeline(const json& j, PipelineConfig& p) {
  get_if_present(j, "theta_h", p.theta_h);
  get_if_present(j, "theta_o", p.theta_o);
  get_if_present(j, "n_h", p.n_h);
  get_if_present(j, "n_o", p.n_o);
  get_if_present(j, "theta_pair", p.theta_pair);
  get_if_present(j, "train_theta", p.train_theta);
  get_if_present(j, "batch_rows", p.batch_rows);
}

void parse_synth(const json& j, SynthConfig& s) {
  get_if_present(j, "n_actions", s.n_actions);
  get_if_present(j, "n_objects", s.n_objects);
  get_if_present(j, "combo_density", s.combo_density);
  get_if_present(j, "d_a", s.d_a);
  get_if_present(j, "d_e", s.d_e);
  get_if_present(j, "images", s.images);
  get_if_present(j, "test_images", s.test_images);
  get_if_present(j, "candidates_per_image", s.candidates_per_image);
  get_if_present(j, "noise_sigma", s.noise_sigma);
  get_if_present(j, "alpha", s.alpha);
  get_if_present(j, "beta", s.beta);
  get_if_present(j, "residual_sigma", s.residual_sigma);
  get_if_present(j, "interaction_gain", s.interaction_gain);
  get_if_present(j, "seed", s.seed);
}

}  // namespace

RunConfig RunConfig::from_json_text(const std::string& text) {
  json j = json::parse(text);
  RunConfig cfg;
  get_if_present(j, "seed", cfg.seed);
  get_if_present(j, "rare_threshold", cfg.rare_threshold);
  if (j.contains("graph")) parse_graph(j.at("graph"), cfg.graph);
  if (j.contains("model")) parse_model(j.at("model"), cfg.model);
  if (j.contains("train")) parse_train(j.at("train"), cfg.train);
  if (j.contains("pipeline")) parse_pipeline(j.at("pipeline"), cfg.pipeline);
  if (j.contains("synth")) parse_synth(j.at("synth"), cfg.synth);
  // keep the model input dims consistent with the corpus the synth section describes
  if (!j.contains("model") || !j.at("model").contains("d_a")) cfg.model.visual.d_a = cfg.synth.d_a;
  if (!j.contains("model") || !j.at("model").contains("d_e")) cfg.model.d_e = cfg.synth.d_e;
  cfg.model.gat.out_dim = cfg.model.visual.d_v;
  if (cfg.train.seed == 0) cfg.train.seed = cfg.seed;
  return cfg;
}

RunConfig RunConfig::from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json_text(text);
}

std::string RunConfig::to_json() const {
  json j;
  j["seed"] = seed;
  j["rare_threshold"] = rare_threshold;
  j["graph"] = {{"eps_action", graph.eps_action},
                {"eps_object", graph.eps_object},
                {"eps_interaction", graph.eps_interaction},
                {"rho_v", graph.rho_v},
                {"rho_s", graph.rho_s}};
  j["model"] = {{"embedder", embedder_to_string(model.embedder)},
                {"d_e", model.d_e},
                {"num_classes", model.num_classes},
                {"gamma", model.gamma},
                {"d_a", model.visual.d_a},
                {"d_v", model.visual.d_v},
                {"mapper_hidden", model.visual.mapper_hidden},
                {"fusion_h", model.visual.fusion_h},
                {"fusion_o", model.visual.fusion_o},
                {"fusion_s", model.visual.fusion_s},
                {"trunk_hidden", model.visual.trunk_hidden},
                {"gat_depth", model.gat.depth},
                {"gat_heads", model.gat.heads},
                {"gat_head_dim", model.gat.head_dim},
                {"leaky_slope", model.gat.leaky_slope}};
  j["train"] = {
      {"lr0", train.lr0},
      {"momentum", train.momentum},
      {"weight_decay", train.weight_decay},
      {"warmup_start_lr", train.warmup_start_lr},
      {"warmup_iters", train.warmup_iters},
      {"epochs", train.epochs},
      {"batch_size", train.batch_size},
      {"pos_neg_ratio", std::vector<int>{train.pos_ratio, train.neg_ratio}},
      {"eta", train.eta},
      {"class_weighting",
       train.weighting == TrainConfig::ClassWeighting::uniform ? "uniform" : "inverse_frequency"},
      {"seed", train.seed}};
  j["pipeline"] = {{"theta_h", pipeline.theta_h},   {"theta_o", pipeline.theta_o},
                   {"n_h", pipeline.n_h},           {"n_o", pipeline.n_o},
                   {"theta_pair", pipeline.theta_pair}, {"train_theta", pipeline.train_theta},
                   {"batch_rows", pipeline.batch_rows}};
  j["synth"] = {{"n_actions", synth.n_actions},
                {"n_objects", synth.n_objects},
                {"combo_density", synth.combo_density},
                {"d_a", synth.d_a},
                {"d_e", synth.d_e},
                {"images", synth.images},
                {"test_images", synth.test_images},
                {"candidates_per_image", synth.candidates_per_image},
                {"noise_sigma", synth.noise_sigma},
                {"alpha", synth.alpha},
                {"beta", synth.beta},
                {"residual_sigma", synth.residual_sigma},
                {"interaction_gain", synth.interaction_gain},
                {"seed", synth.seed}};
  return j.dump(2);
}

void RunConfig::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << to_json() << "\n";
}

}  // namespace consnet
