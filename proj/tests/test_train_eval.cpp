// SPDX-License-Identifier: Apache-2.0
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <map>
#include <set>

#include "consnet/checkpoint.hpp"
#include "consnet/harness.hpp"
#include "consnet/io.hpp"
#include "consnet/rng.hpp"

using namespace consnet;

namespace {

// independent evaluator written straight from the definition: greedy score
// ordering, exhaustive one-to-one matching, rectangle integration of the
// interpolated PR curve
real brute_force_ap(std::vector<Detection> dets, std::vector<GroundTruthPair> gts,
                    real iou_threshold) {
  std::stable_sort(dets.begin(), dets.end(),
                   [](const Detection& a, const Detection& b) { return a.score > b.score; });
  std::vector<bool> used(gts.size(), false);
  std::vector<int> tps;
  for (const auto& det : dets) {
    int pick = -1;
    real pick_iou = iou_threshold;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (used[g] || gts[g].image_id != det.image_id) continue;
      const real iou_h = box_iou(det.b_h, gts[g].b_h);
      const real iou_o = box_iou(det.b_o, gts[g].b_o);
      const real pair_iou = iou_h < iou_o ? iou_h : iou_o;
      if (pair_iou > pick_iou) {
        pick_iou = pair_iou;
        pick = static_cast<int>(g);
      }
    }
    if (pick >= 0) {
      used[pick] = true;
      tps.push_back(1);
    } else {
      tps.push_back(0);
    }
  }
  if (gts.empty()) return 0;
  real ap = 0;
  int tp_count = 0;
  for (std::size_t i = 0; i < tps.size(); ++i) {
    if (!tps[i]) continue;
    tp_count++;
    // precision at the best-ranked point with recall >= here
    real best_precision = 0;
    int tp2 = 0;
    for (std::size_t j = 0; j < tps.size(); ++j) {
      tp2 += tps[j];
      const real precision = static_cast<real>(tp2) / static_cast<real>(j + 1);
      if (j >= i && precision > best_precision) best_precision = precision;
    }
    ap += best_precision / static_cast<real>(gts.size());
  }
  return ap;
}

Box rand_box(Rng& rng) {
  const real x1 = rng.uniform(0, 80);
  const real y1 = rng.uniform(0, 80);
  return Box{x1, y1, x1 + rng.uniform(5, 40), y1 + rng.uniform(5, 40)};
}

SynthConfig tiny_synth() {
  SynthConfig cfg;
  cfg.n_actions = 3;
  cfg.n_objects = 4;
  cfg.combo_density = real(0.6);
  cfg.d_a = 12;
  cfg.d_e = 10;
  cfg.images = 30;
  cfg.test_images = 10;
  cfg.candidates_per_image = 8;
  cfg.seed = 5;
  return cfg;
}

RunConfig tiny_run() {
  RunConfig cfg;
  cfg.seed = 3;
  cfg.synth = tiny_synth();
  cfg.model.visual.d_a = cfg.synth.d_a;
  cfg.model.d_e = cfg.synth.d_e;
  cfg.model.visual.d_v = 16;
  cfg.model.visual.mapper_hidden = 24;
  cfg.model.visual.fusion_h = 16;
  cfg.model.visual.fusion_o = 16;
  cfg.model.visual.fusion_s = 8;
  cfg.model.visual.trunk_hidden = 24;
  cfg.model.gat.depth = 2;
  cfg.model.gat.heads = 2;
  cfg.model.gat.head_dim = 8;
  cfg.model.gat.out_dim = 16;
  cfg.graph.eps_action = 1;
  cfg.graph.eps_object = 1;
  cfg.graph.eps_interaction = 2;
  cfg.train.epochs = 1;
  cfg.train.batch_size = 16;
  cfg.train.warmup_iters = 5;
  cfg.train.seed = 11;
  return cfg;
}

}  // namespace

TEST_CASE("lr schedule endpoints and shape") {
  TrainConfig cfg;  // warmup 0.001 -> 0.01 over 500
  const long total = 2000;
  CHECK(lr_at(0, cfg, total) == real(0.001));
  CHECK(lr_at(500, cfg, total) == real(0.01));
  CHECK(lr_at(250, cfg, total) == doctest::Approx(0.0055).epsilon(1e-12));
  CHECK(lr_at(total, cfg, total) <= real(1e-12));  // cosine floor
  CHECK(lr_at(1250, cfg, total) == doctest::Approx(0.005).epsilon(1e-12));  // mid-cosine
  // monotone decay after warmup
  real prev = lr_at(500, cfg, total);
  for (long s = 600; s <= total; s += 100) {
    const real cur = lr_at(s, cfg, total);
    CHECK(cur <= prev);
    prev = cur;
  }
  CHECK_THROWS(lr_at(-1, cfg, total));
}

TEST_CASE("loss scalar closed forms") {
  CHECK(interactiveness_loss(real(0.5), 1) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(interactiveness_loss(real(0.5), 0) == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  CHECK(interactiveness_loss(real(0.9), 1) == doctest::Approx(-std::log(0.9)).epsilon(1e-12));
  CHECK(std::isfinite(interactiveness_loss(real(0), 1)));  // clamped, not inf
  CHECK_THROWS(interactiveness_loss(real(0.5), 2));

  const std::vector<real> r{real(0.9), real(0.1), real(0.5)};
  const std::vector<int> y{1, 0, 1};
  const real expect = (-std::log(0.9) - std::log(0.9) + std::log(2.0)) / 3;
  CHECK(classification_loss(r, y) == doctest::Approx(expect).epsilon(1e-9));
  // r == 0.5 everywhere gives ln 2 regardless of labels
  CHECK(classification_loss({real(0.5), real(0.5)}, {1, 0}) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-12));

  CHECK(total_loss(1, 2, real(0.5)) == real(2));
  CHECK(total_loss(real(1.25), 99, 0) == real(1.25));
  CHECK_THROWS(total_loss(1, 1, -1));
}

TEST_CASE("momentum SGD matches the hand-computed quadratic trajectory") {
  // f(w) = 0.5 k w^2, g = k w, lr and momentum fixed; no decay
  const real k = real(2), lr = real(0.1), mu = real(0.9);
  Tensor w = Tensor::scalar(real(1));
  Tensor v = Tensor::zeros(1, 1);
  real w_ref = 1, v_ref = 0;
  for (int step = 0; step < 6; ++step) {
    sgd_update(w, v, Tensor::scalar(k * w.item()), lr, mu, 0);
    const real g = k * w_ref;
    v_ref = mu * v_ref + g;
    w_ref -= lr * v_ref;
    CHECK(w.item() == doctest::Approx(w_ref).epsilon(1e-15));
  }
  // explicit first two steps by hand: w0=1 -> v=2, w=0.8 -> v=0.9*2+1.6=3.4, w=0.46
  Tensor w2 = Tensor::scalar(real(1));
  Tensor v2 = Tensor::zeros(1, 1);
  sgd_update(w2, v2, Tensor::scalar(real(2)), lr, mu, 0);
  CHECK(w2.item() == doctest::Approx(0.8).epsilon(1e-12));
  sgd_update(w2, v2, Tensor::scalar(real(1.6)), lr, mu, 0);
  CHECK(w2.item() == doctest::Approx(0.46).epsilon(1e-12));

  // weight decay contributes wd * w to the gradient
  Tensor w3 = Tensor::scalar(real(1));
  Tensor v3 = Tensor::zeros(1, 1);
  sgd_update(w3, v3, Tensor::scalar(real(0)), lr, 0, real(0.5));
  CHECK(w3.item() == doctest::Approx(0.95).epsilon(1e-12));
}

TEST_CASE("box_iou closed forms") {
  CHECK(box_iou({0, 0, 2, 2}, {0, 0, 2, 2}) == real(1));
  CHECK(box_iou({0, 0, 1, 1}, {5, 5, 6, 6}) == real(0));
  CHECK(box_iou({0, 0, 2, 2}, {1, 0, 3, 2}) == doctest::Approx(2.0 / 6.0).epsilon(1e-12));
  CHECK_THROWS(box_iou({0, 0, 0, 1}, {0, 0, 1, 1}));
}

TEST_CASE("match_detections: exact hit, duplicate suppression") {
  GroundTruthPair gt{"img", {0, 0, 10, 10}, {5, 0, 15, 10}, {0}};
  Detection hit{"img", {0, 0, 10, 10}, {5, 0, 15, 10}, 0, real(0.9)};
  auto flags = match_detections({hit}, {gt}, real(0.5));
  CHECK(flags == std::vector<char>{1});

  Detection dup = hit;
  dup.score = real(0.8);
  flags = match_detections({hit, dup}, {gt}, real(0.5));
  CHECK(flags == std::vector<char>{1, 0});  // one GT matches once

  Detection wrong_image = hit;
  wrong_image.image_id = "other";
  flags = match_detections({wrong_image}, {gt}, real(0.5));
  CHECK(flags == std::vector<char>{0});
}

TEST_CASE("average_precision closed forms") {
  CHECK(average_precision({1}, 1) == real(1));
  CHECK(average_precision({}, 3) == real(0));
  CHECK(average_precision({1, 0, 1}, 2) == doctest::Approx(1.0 * 0.5 + (2.0 / 3.0) * 0.5));
  CHECK(average_precision({0, 1}, 1) == doctest::Approx(0.5));
  CHECK(average_precision({1, 1}, 0) == real(0));  // no GT -> excluded upstream
}

TEST_CASE("evaluate equals the brute-force evaluator on random sets") {
  Rng rng(12345);
  const LabelSpace space =
      build_label_space({"a0", "a1"}, {"o0", "o1"},
                        {{"a0", "o0"}, {"a0", "o1"}, {"a1", "o0"}, {"a1", "o1"}});
  for (int trial = 0; trial < 40; ++trial) {
    std::vector<GroundTruthPair> gts;
    const int n_images = 1 + rng.uniform_int(4);
    for (int img = 0; img < n_images; ++img) {
      const int n_gt = rng.uniform_int(4);
      for (int g = 0; g < n_gt; ++g) {
        GroundTruthPair pair;
        pair.image_id = "img" + std::to_string(img);
        pair.b_h = rand_box(rng);
        pair.b_o = rand_box(rng);
        pair.hoi_ids = {rng.uniform_int(space.num_classes())};
        if (rng.uniform() < real(0.3)) {
          const int extra = rng.uniform_int(space.num_classes());
          if (extra != pair.hoi_ids[0]) pair.hoi_ids.push_back(extra);
        }
        gts.push_back(std::move(pair));
      }
    }
    std::vector<Detection> dets;
    const int n_det = rng.uniform_int(30);
    for (int d = 0; d < n_det; ++d) {
      Detection det;
      det.image_id = "img" + std::to_string(rng.uniform_int(n_images));
      if (!gts.empty() && rng.uniform() < real(0.6)) {
        const auto& src = gts[rng.uniform_int(static_cast<int>(gts.size()))];
        det.b_h = src.b_h;
        det.b_o = src.b_o;
        det.image_id = src.image_id;
        for (auto& c : det.b_h) c += rng.uniform(-3, 3);
        for (auto& c : det.b_o) c += rng.uniform(-3, 3);
      } else {
        det.b_h = rand_box(rng);
        det.b_o = rand_box(rng);
      }
      det.hoi_class = rng.uniform_int(space.num_classes());
      det.score = rng.uniform(0, 1);
      dets.push_back(std::move(det));
    }

    const EvalReport report = evaluate(dets, gts, space, {});
    real expected_map = 0;
    int evaluated = 0;
    for (int c = 0; c < space.num_classes(); ++c) {
      std::vector<Detection> class_dets;
      for (const auto& d : dets) {
        if (d.hoi_class == c) class_dets.push_back(d);
      }
      std::vector<GroundTruthPair> class_gts;
      for (const auto& g : gts) {
        if (std::count(g.hoi_ids.begin(), g.hoi_ids.end(), c)) class_gts.push_back(g);
      }
      const real ap = brute_force_ap(class_dets, class_gts, real(0.5));
      CHECK(report.per_class_ap[c] == doctest::Approx(ap).epsilon(1e-9));
      if (!class_gts.empty()) {
        expected_map += ap;
        evaluated++;
      }
    }
    if (evaluated > 0) {
      CHECK(report.map_full == doctest::Approx(expected_map / evaluated).epsilon(1e-9));
    } else {
      CHECK(report.map_full == real(0));
    }
  }
}

TEST_CASE("evaluate: empty and perfect detections, subset consistency") {
  const LabelSpace space = build_label_space({"a"}, {"x", "y"}, {{"a", "x"}, {"a", "y"}});
  std::vector<GroundTruthPair> gts;
  gts.push_back({"i0", {0, 0, 10, 10}, {10, 0, 20, 10}, {0}});
  gts.push_back({"i1", {0, 0, 10, 10}, {10, 0, 20, 10}, {1}});

  CHECK(evaluate({}, gts, space, {}).map_full == real(0));

  std::vector<Detection> perfect;
  for (const auto& gt : gts) {
    perfect.push_back({gt.image_id, gt.b_h, gt.b_o, gt.hoi_ids[0], real(0.9)});
  }
  const EvalReport full = evaluate(perfect, gts, space, {});
  CHECK(full.map_full == real(1));

  ZeroShotSplit split;
  split.scenario = ZeroShotScenario::UC;
  split.unseen_hoi_ids = {1};
  EvalOptions opts;
  opts.split = &split;
  const EvalReport zs = evaluate(perfect, gts, space, opts);
  REQUIRE(zs.map_seen.has_value());
  REQUIRE(zs.map_unseen.has_value());
  // map_full is consistent with the subset means
  CHECK(zs.map_full ==
        doctest::Approx((*zs.map_seen * 1 + *zs.map_unseen * 1) / 2).epsilon(1e-12));

  std::map<int, int> counts{{0, 3}, {1, 20}};
  EvalOptions rare_opts;
  rare_opts.train_positive_counts = &counts;
  const EvalReport rare = evaluate(perfect, gts, space, rare_opts);
  REQUIRE(rare.map_rare.has_value());
  CHECK(*rare.map_rare == real(1));  // class 0 has < 10 positives
}

TEST_CASE("detection score permutation with distinct scores leaves AP unchanged") {
  Rng rng(55);
  const LabelSpace space = build_label_space({"a"}, {"x"}, {{"a", "x"}});
  std::vector<GroundTruthPair> gts{{"i", {0, 0, 10, 10}, {5, 0, 15, 10}, {0}}};
  std::vector<Detection> dets;
  for (int i = 0; i < 8; ++i) {
    dets.push_back({"i", rand_box(rng), rand_box(rng), 0, real(0.1) * (i + 1)});
  }
  dets.push_back({"i", {0, 0, 10, 10}, {5, 0, 15, 10}, 0, real(0.95)});
  const real ap1 = evaluate(dets, gts, space, {}).per_class_ap[0];
  rng.shuffle(dets);
  const real ap2 = evaluate(dets, gts, space, {}).per_class_ap[0];
  CHECK(ap1 == ap2);
}

TEST_CASE("corpus assembly and split filtering") {
  SynthConfig scfg = tiny_synth();
  const SynthCorpus corpus = generate_corpus(scfg);
  const auto candidates =
      assemble_training_candidates(corpus.train_images, corpus.train_gt, real(0.1));
  REQUIRE(!candidates.empty());
  int pos = 0, neg = 0;
  for (const auto& c : candidates) {
    REQUIRE(c.u.has_value());
    if (*c.u == 1) {
      pos++;
      CHECK(!c.y.empty());
    } else {
      neg++;
      CHECK(c.y.empty());
    }
  }
  CHECK(pos > 0);
  CHECK(neg > 0);

  // empty split: unchanged
  ZeroShotSplit none;
  CHECK(filter_training_corpus(candidates, none).size() == candidates.size());

  // all classes unseen: only negatives remain
  ZeroShotSplit all;
  for (int t = 0; t < corpus.space.num_classes(); ++t) all.unseen_hoi_ids.insert(t);
  const auto only_neg = filter_training_corpus(candidates, all);
  CHECK(static_cast<int>(only_neg.size()) == neg);
  for (const auto& c : only_neg) CHECK(*c.u == 0);

  // partial split equals a brute-force scan
  const auto split = make_zero_shot_split(corpus.space, ZeroShotScenario::UC, 2, 17);
  const auto filtered = filter_training_corpus(candidates, split);
  std::size_t expected = 0;
  for (const auto& c : candidates) {
    bool drop = false;
    for (int id : c.y) {
      if (split.is_unseen(id)) drop = true;
    }
    if (!drop) expected++;
  }
  CHECK(filtered.size() == expected);
  for (const auto& c : filtered) {
    for (int id : c.y) CHECK_FALSE(split.is_unseen(id));
  }

  // UA record filtering drops the held-out actions' human crops plus the
  // crops of any object left with no seen HOI
  const auto ua = make_zero_shot_split(corpus.space, ZeroShotScenario::UA, 1, 8);
  std::set<std::string> dropped_actions, dropped_objects;
  for (int a : unseen_actions(corpus.space, ua)) dropped_actions.insert(corpus.space.actions[a]);
  for (int o : unseen_objects(corpus.space, ua)) dropped_objects.insert(corpus.space.objects[o]);
  REQUIRE(dropped_actions.size() == 1);
  const auto kept = filter_feature_records(corpus.features, corpus.space, ua);
  std::size_t dropped = 0;
  for (const auto& rec : corpus.features) {
    const bool is_dropped = rec.kind == FeatureRecord::Kind::human
                                ? dropped_actions.count(rec.label) > 0
                                : dropped_objects.count(rec.label) > 0;
    if (is_dropped) dropped++;
  }
  for (const auto& rec : kept) {
    if (rec.kind == FeatureRecord::Kind::human) {
      CHECK(dropped_actions.count(rec.label) == 0);
    } else {
      CHECK(dropped_objects.count(rec.label) == 0);
    }
  }
  CHECK(kept.size() + dropped == corpus.features.size());
}

TEST_CASE("synth: determinism, density=1 grid, zero-noise separability") {
  SynthConfig cfg = tiny_synth();
  const SynthCorpus c1 = generate_corpus(cfg);
  const SynthCorpus c2 = generate_corpus(cfg);
  CHECK(c1.space.hois == c2.space.hois);
  REQUIRE(c1.features.size() == c2.features.size());
  for (std::size_t i = 0; i < c1.features.size(); ++i) {
    CHECK(c1.features[i].feature == c2.features[i].feature);  // bitwise
    CHECK(c1.features[i].box == c2.features[i].box);
  }
  REQUIRE(c1.train_gt.size() == c2.train_gt.size());

  SynthConfig dense = cfg;
  dense.combo_density = 1;
  const SynthCorpus grid = generate_corpus(dense);
  CHECK(grid.space.num_classes() == cfg.n_actions * cfg.n_objects);

  // noise 0: nearest-class-mean probe on positive pair features is perfect
  SynthConfig clean = cfg;
  clean.noise_sigma = 0;
  clean.residual_sigma = real(0.3);
  const SynthCorpus sep = generate_corpus(clean);
  const auto candidates = assemble_training_candidates(sep.train_images, sep.train_gt, real(0.1));
  std::map<int, std::vector<real>> class_mean;
  std::map<int, int> class_count;
  const int d = 2 * clean.d_a;
  auto features_of = [&](const Candidate& c) {
    std::vector<real> f;
    f.insert(f.end(), c.a_h.begin(), c.a_h.end());
    f.insert(f.end(), c.a_o.begin(), c.a_o.end());
    return f;
  };
  for (const auto& c : candidates) {
    if (*c.u != 1 || c.y.size() != 1) continue;
    auto& mean = class_mean[c.y[0]];
    mean.resize(d, 0);
    const auto f = features_of(c);
    for (int i = 0; i < d; ++i) mean[i] += f[i];
    class_count[c.y[0]]++;
  }
  for (auto& [cls, mean] : class_mean) {
    for (auto& x : mean) x /= class_count[cls];
  }
  REQUIRE(class_mean.size() >= 2);
  int correct = 0, total = 0;
  for (const auto& c : candidates) {
    if (*c.u != 1 || c.y.size() != 1 || !class_mean.count(c.y[0])) continue;
    const auto f = features_of(c);
    int best = -1;
    real best_dist = 0;
    for (const auto& [cls, mean] : class_mean) {
      real dist = 0;
      for (int i = 0; i < d; ++i) dist += (f[i] - mean[i]) * (f[i] - mean[i]);
      if (best < 0 || dist < best_dist) {
        best = cls;
        best_dist = dist;
      }
    }
    total++;
    if (best == c.y[0]) correct++;
  }
  CHECK(total > 0);
  CHECK(correct == total);  // sanity ceiling
}

TEST_CASE("training: zero epochs leaves parameters unchanged; fixed seed is bitwise deterministic") {
  RunConfig cfg = tiny_run();
  const SynthCorpus corpus = generate_corpus(cfg.synth);
  const ZeroShotSplit split;

  RunConfig zero_epochs = cfg;
  zero_epochs.train.epochs = 0;
  const ModelConfig mc = resolve_model_config(zero_epochs, corpus);
  Model fresh = Model::init(mc, zero_epochs.seed);
  const TrainOutput out = train_on_corpus(corpus, split, zero_epochs);
  struct Collect : ParamVisitor {
    std::vector<const Tensor*> tensors;
    void visit(const std::string&, Tensor& t, ParamKind) override { tensors.push_back(&t); }
  } a, b;
  fresh.visit_params(a);
  Model trained0 = out.model;
  trained0.visit_params(b);
  REQUIRE(a.tensors.size() == b.tensors.size());
  for (std::size_t i = 0; i < a.tensors.size(); ++i) {
    CHECK(a.tensors[i]->values() == b.tensors[i]->values());
  }

  const TrainOutput run1 = train_on_corpus(corpus, split, cfg);
  const TrainOutput run2 = train_on_corpus(corpus, split, cfg);
  REQUIRE(run1.result.history.size() == run2.result.history.size());
  CHECK(run1.result.history.size() > 0);
  for (std::size_t i = 0; i < run1.result.history.size(); ++i) {
    CHECK(run1.result.history[i].total == run2.result.history[i].total);
  }
  Model m1 = run1.model, m2 = run2.model;
  Collect c1, c2;
  m1.visit_params(c1);
  m2.visit_params(c2);
  for (std::size_t i = 0; i < c1.tensors.size(); ++i) {
    REQUIRE(c1.tensors[i]->size() == c2.tensors[i]->size());
    CHECK(std::memcmp(c1.tensors[i]->data(), c2.tensors[i]->data(),
                      sizeof(real) * c1.tensors[i]->size()) == 0);
  }
}

TEST_CASE("classification branch receives no gradient from negative-only batches") {
  RunConfig cfg = tiny_run();
  const SynthCorpus corpus = generate_corpus(cfg.synth);
  const auto candidates =
      assemble_training_candidates(corpus.train_images, corpus.train_gt, real(0.1));
  std::vector<int> neg_rows;
  for (int i = 0; i < static_cast<int>(candidates.size()) && neg_rows.size() < 8; ++i) {
    if (*candidates[i].u == 0) neg_rows.push_back(i);
  }
  REQUIRE(neg_rows.size() == 8);
  const StepBatch batch = make_step_batch(candidates, neg_rows, corpus.space, nullptr,
                                          TrainConfig::ClassWeighting::uniform);
  CHECK(batch.pos_rows.empty());

  const ModelConfig mc = resolve_model_config(cfg, corpus);
  Model model = Model::init(mc, 1);
  const SemanticInputs inputs =
      build_semantic_inputs(corpus.space, corpus.features, corpus.words, {}, cfg.graph);
  const ClassNodeIndices cls = class_node_indices(corpus.space);

  Tape tape;
  BindCtx ctx{tape};
  ModelVars vars = bind(ctx, model);
  const StepLoss loss = model_loss(tape, model, vars, batch, &inputs.graph, &inputs.Z, cls,
                                   cfg.train.eta, BnMode::train_static);
  CHECK(tape.value(loss.classification).item() == real(0));
  tape.backward(loss.total);
  // every GAT parameter gradient is exactly zero
  for (const auto& layer : model.gat.layers) {
    for (const auto& head : layer.heads) {
      const Tensor g = tape.grad(ctx.leaves.at(&head.W));
      for (int i = 0; i < g.size(); ++i) CHECK(g[i] == real(0));
    }
  }
}

TEST_CASE("checkpoint round-trip restores tensors bitwise and reproduces scores") {
  namespace fs = std::filesystem;
  RunConfig cfg = tiny_run();
  const SynthCorpus corpus = generate_corpus(cfg.synth);
  const ZeroShotSplit split;
  TrainOutput out = train_on_corpus(corpus, split, cfg);

  const auto path = (fs::temp_directory_path() / "consnet_ckpt_test.bin").string();
  save_checkpoint(out.model, cfg.to_json(), cfg.seed, path);

  const LoadedCheckpoint peeked = peek_checkpoint(path);
  CHECK(peeked.seed == cfg.seed);
  const RunConfig cfg2 = RunConfig::from_json_text(peeked.config_json);
  Model restored = Model::init(resolve_model_config(cfg2, corpus), cfg2.seed);
  load_checkpoint(restored, path);

  const auto dets1 = detect_on_corpus(out.model, corpus, split, cfg);
  const auto dets2 = detect_on_corpus(restored, corpus, split, cfg2);
  REQUIRE(dets1.size() == dets2.size());
  for (std::size_t i = 0; i < dets1.size(); ++i) {
    CHECK(std::memcmp(&dets1[i].score, &dets2[i].score, sizeof(real)) == 0);
    CHECK(dets1[i].hoi_class == dets2[i].hoi_class);
  }
  const EvalReport r1 = evaluate(dets1, corpus.test_gt, corpus.space, {});
  const EvalReport r2 = evaluate(dets2, corpus.test_gt, corpus.space, {});
  CHECK(std::memcmp(&r1.map_full, &r2.map_full, sizeof(real)) == 0);
  fs::remove(path);
}

TEST_CASE("full corpus round-trip through the data directory") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "consnet_corpus_test";
  SynthConfig cfg = tiny_synth();
  const SynthCorpus corpus = generate_corpus(cfg);
  save_corpus(corpus, dir.string());
  const SynthCorpus loaded = load_corpus(dir.string());
  CHECK(loaded.space.hois == corpus.space.hois);
  CHECK(loaded.features.size() == corpus.features.size());
  CHECK(loaded.train_images.size() == corpus.train_images.size());
  CHECK(loaded.test_gt.size() == corpus.test_gt.size());
  // detections group back into the same images with the same content
  for (std::size_t i = 0; i < corpus.train_images.size(); ++i) {
    CHECK(loaded.train_images[i].image_id == corpus.train_images[i].image_id);
    CHECK(loaded.train_images[i].humans.size() == corpus.train_images[i].humans.size());
    CHECK(loaded.train_images[i].objects.size() == corpus.train_images[i].objects.size());
  }
  fs::remove_all(dir);
}

TEST_CASE("score shuffling preserves the multiset of scores") {
  Rng rng(2);
  std::vector<Detection> dets;
  for (int i = 0; i < 20; ++i) {
    dets.push_back({"img", rand_box(rng), rand_box(rng), i % 3, rng.uniform(0, 1)});
  }
  const auto shuffled = shuffle_scores(dets, 77);
  REQUIRE(shuffled.size() == dets.size());
  std::multiset<real> before, after;
  for (const auto& d : dets) before.insert(d.score);
  for (const auto& d : shuffled) after.insert(d.score);
  CHECK(before == after);
  CHECK(shuffled[0].image_id == dets[0].image_id);  // only scores move
}
