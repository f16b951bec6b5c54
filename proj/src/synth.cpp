// SPDX-License-Identifier: Apache-2.0
#include "consnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "consnet/rng.hpp"

namespace consnet {

namespace {

constexpr real kCanvasW = 640;
constexpr real kCanvasH = 480;

std::string pad2(int v) { return (v < 10 ? "0" : "") + std::to_string(v); }

std::vector<real> add_noise(std::vector<real> v, real sigma, Rng& rng) {
  for (auto& x : v) x += sigma * rng.normal();
  return v;
}

Box random_box(Rng& rng, real x_lo, real x_hi, real y_lo, real y_hi, real min_size,
               real max_size) {
  const real w = rng.uniform(min_size, max_size);
  const real h = rng.uniform(min_size, max_size);
  const real x1 = rng.uniform(x_lo, std::max(x_lo + 1, x_hi - w));
  const real y1 = rng.uniform(y_lo, std::max(y_lo + 1, y_hi - h));
  return Box{x1, y1, x1 + w, y1 + h};
}

Box jitter_box(const Box& b, Rng& rng) {
  const real w = b[2] - b[0];
  const real h = b[3] - b[1];
  const real dx = rng.uniform(real(-0.05), real(0.05)) * w;
  const real dy = rng.uniform(real(-0.05), real(0.05)) * h;
  const real dw = rng.uniform(real(-0.05), real(0.05)) * w;
  const real dh = rng.uniform(real(-0.05), real(0.05)) * h;
  return Box{b[0] + dx, b[1] + dy, b[2] + dx + dw, b[3] + dy + dh};
}

Box neighbor_box(const Box& anchor, Rng& rng) {
  const real cx = (anchor[0] + anchor[2]) / 2 + rng.uniform(real(-60), real(60));
  const real cy = (anchor[1] + anchor[3]) / 2 + rng.uniform(real(-60), real(60));
  const real w = rng.uniform(real(40), real(120));
  const real h = rng.uniform(real(40), real(120));
  const real x1 = std::clamp(cx - w / 2, real(0), kCanvasW - w - 1);
  const real y1 = std::clamp(cy - h / 2, real(0), kCanvasH - h - 1);
  return Box{x1, y1, x1 + w, y1 + h};
}

struct Prototypes {
  std::vector<std::vector<real>> action;       // visual, d_a
  std::vector<std::vector<real>> object;       // visual, d_a
  std::vector<std::vector<real>> interaction;  // visual, d_a, per HOI class
  std::vector<real> human_base;                // visual, d_a
};

}  // namespace

SynthCorpus generate_corpus(const SynthConfig& cfg) {
  if (cfg.n_actions < 1 || cfg.n_objects < 1) {
    throw std::invalid_argument("generate_corpus: need at least one action and object");
  }
  if (cfg.combo_density <= 0 || cfg.combo_density > 1) {
    throw std::invalid_argument("generate_corpus: combo_density must be in (0, 1]");
  }
  const int grid = cfg.n_actions * cfg.n_objects;
  const int num_combos = std::max(1, static_cast<int>(std::lround(cfg.combo_density * grid)));
  if (num_combos < std::max(cfg.n_actions, cfg.n_objects)) {
    throw std::invalid_argument("generate_corpus: density too low to cover every category");
  }

  Rng rng(cfg.seed);

  // label space: random combo subset that still covers every action and object
  std::vector<std::string> action_names, object_names;
  for (int a = 0; a < cfg.n_actions; ++a) action_names.push_back("act" + pad2(a));
  for (int o = 0; o < cfg.n_objects; ++o) object_names.push_back("obj" + pad2(o));
  std::vector<int> grid_ids(grid);
  for (int i = 0; i < grid; ++i) grid_ids[i] = i;
  std::vector<std::pair<std::string, std::string>> pairs;
  for (int attempt = 0;; ++attempt) {
    if (attempt >= 1000) {
      throw std::invalid_argument("generate_corpus: could not cover all categories");
    }
    rng.shuffle(grid_ids);
    std::vector<char> a_cover(cfg.n_actions, 0), o_cover(cfg.n_objects, 0);
    for (int i = 0; i < num_combos; ++i) {
      a_cover[grid_ids[i] / cfg.n_objects] = 1;
      o_cover[grid_ids[i] % cfg.n_objects] = 1;
    }
    const bool covered =
        std::all_of(a_cover.begin(), a_cover.end(), [](char c) { return c != 0; }) &&
        std::all_of(o_cover.begin(), o_cover.end(), [](char c) { return c != 0; });
    if (!covered) continue;
    std::vector<int> chosen(grid_ids.begin(), grid_ids.begin() + num_combos);
    std::sort(chosen.begin(), chosen.end());
    for (int id : chosen) {
      pairs.emplace_back(action_names[id / cfg.n_objects], object_names[id % cfg.n_objects]);
    }
    break;
  }

  SynthCorpus corpus;
  corpus.space = build_label_space(action_names, object_names, pairs);
  const LabelSpace& space = corpus.space;

  // word vectors: random units, no relation to the visual prototypes
  corpus.words.insert("human", rng.unit_vector(cfg.d_e));
  for (const auto& name : action_names) corpus.words.insert(name, rng.unit_vector(cfg.d_e));
  for (const auto& name : object_names) corpus.words.insert(name, rng.unit_vector(cfg.d_e));

  Prototypes proto;
  proto.human_base = rng.unit_vector(cfg.d_a);
  for (int a = 0; a < cfg.n_actions; ++a) proto.action.push_back(rng.unit_vector(cfg.d_a));
  for (int o = 0; o < cfg.n_objects; ++o) proto.object.push_back(rng.unit_vector(cfg.d_a));
  for (int t = 0; t < space.num_classes(); ++t) {
    const auto& [a, o] = space.hois[t];
    std::vector<real> v(cfg.d_a);
    for (int i = 0; i < cfg.d_a; ++i) {
      v[i] = cfg.alpha * proto.action[a][i] + cfg.beta * proto.object[o][i] +
             cfg.residual_sigma * rng.normal();
    }
    proto.interaction.push_back(std::move(v));
  }

  auto human_feature = [&](const std::vector<int>& hoi_ids) {
    std::vector<real> f(cfg.d_a);
    for (int i = 0; i < cfg.d_a; ++i) f[i] = real(0.5) * proto.human_base[i];
    if (!hoi_ids.empty()) {
      const real share = real(1) / static_cast<real>(hoi_ids.size());
      for (int t : hoi_ids) {
        const int a = space.hois[t].first;
        for (int i = 0; i < cfg.d_a; ++i) {
          f[i] += share * (proto.action[a][i] + cfg.interaction_gain * proto.interaction[t][i]);
        }
      }
    }
    return add_noise(std::move(f), cfg.noise_sigma, rng);
  };
  auto object_feature = [&](int object, const std::vector<int>& hoi_ids) {
    std::vector<real> f = proto.object[object];
    if (!hoi_ids.empty()) {
      const real share = real(1) / static_cast<real>(hoi_ids.size());
      for (int t : hoi_ids) {
        for (int i = 0; i < cfg.d_a; ++i) {
          f[i] += share * cfg.interaction_gain * proto.interaction[t][i];
        }
      }
    }
    return add_noise(std::move(f), cfg.noise_sigma, rng);
  };

  const int n_distractors = std::max(1, cfg.candidates_per_image / 4);

  auto make_images = [&](int count, const std::string& prefix,
                         std::vector<ImageDetections>& images,
                         std::vector<GroundTruthPair>& gts, bool collect_features) {
    for (int img = 0; img < count; ++img) {
      ImageDetections image;
      image.image_id = prefix + std::to_string(img);
      const int n_gt = 1 + (rng.uniform() < real(0.4) ? 1 : 0);
      for (int g = 0; g < n_gt; ++g) {
        // separate regions keep unrelated pairs spatially distant
        const real x_lo = g == 0 ? real(10) : kCanvasW / 2;
        const real x_hi = g == 0 ? kCanvasW / 2 : kCanvasW - 10;

        const int t0 = rng.uniform_int(space.num_classes());
        std::vector<int> hoi_ids{t0};
        if (rng.uniform() < real(0.2)) {
          // second action on the same object when the space allows it
          std::vector<int> others;
          for (int t = 0; t < space.num_classes(); ++t) {
            if (t != t0 && space.hois[t].second == space.hois[t0].second) others.push_back(t);
          }
          if (!others.empty()) {
            hoi_ids.push_back(others[rng.uniform_int(static_cast<int>(others.size()))]);
            std::sort(hoi_ids.begin(), hoi_ids.end());
          }
        }

        GroundTruthPair pair;
        pair.image_id = image.image_id;
        pair.b_h = random_box(rng, x_lo, x_hi, 10, kCanvasH - 10, 80, 160);
        pair.b_o = neighbor_box(pair.b_h, rng);
        pair.hoi_ids = hoi_ids;

        const auto h_feat = human_feature(hoi_ids);
        const auto o_feat = object_feature(space.hois[t0].second, hoi_ids);

        FeatureRecord h_det{image.image_id, pair.b_h, "human", FeatureRecord::Kind::human,
                            rng.uniform(real(0.85), real(0.98)), h_feat};
        FeatureRecord o_det{image.image_id, pair.b_o,
                            space.objects[space.hois[t0].second], FeatureRecord::Kind::object,
                            rng.uniform(real(0.85), real(0.98)), o_feat};
        image.humans.push_back(h_det);
        image.objects.push_back(o_det);
        if (rng.uniform() < real(0.5)) {
          FeatureRecord jit = h_det;
          jit.box = jitter_box(pair.b_h, rng);
          jit.score = rng.uniform(real(0.7), real(0.95));
          jit.feature = human_feature(hoi_ids);
          image.humans.push_back(std::move(jit));
        }
        if (rng.uniform() < real(0.5)) {
          FeatureRecord jit = o_det;
          jit.box = jitter_box(pair.b_o, rng);
          jit.score = rng.uniform(real(0.7), real(0.95));
          jit.feature = object_feature(space.hois[t0].second, hoi_ids);
          image.objects.push_back(std::move(jit));
        }

        if (collect_features) {
          // universal-rep crops: the human crop stands for its action labels
          for (int t : hoi_ids) {
            FeatureRecord rep = h_det;
            rep.label = space.actions[space.hois[t].first];
            corpus.features.push_back(std::move(rep));
          }
          corpus.features.push_back(o_det);
        }
        gts.push_back(std::move(pair));
      }

      if (rng.uniform() < real(0.4)) {
        // idle human far from everyone
        FeatureRecord idle{image.image_id,
                           random_box(rng, 10, kCanvasW - 10, 10, kCanvasH - 10, 80, 160),
                           "human",
                           FeatureRecord::Kind::human,
                           rng.uniform(real(0.55), real(0.95)),
                           human_feature({})};
        image.humans.push_back(std::move(idle));
      }
      for (int d = 0; d < n_distractors; ++d) {
        const int o = rng.uniform_int(cfg.n_objects);
        FeatureRecord det{image.image_id,
                          random_box(rng, 10, kCanvasW - 10, 10, kCanvasH - 10, 40, 120),
                          space.objects[o],
                          FeatureRecord::Kind::object,
                          rng.uniform(real(0.55), real(0.95)),
                          object_feature(o, {})};
        if (collect_features) corpus.features.push_back(det);
        image.objects.push_back(std::move(det));
      }
      images.push_back(std::move(image));
    }
  };

  make_images(cfg.images, "train_", corpus.train_images, corpus.train_gt, true);
  make_images(cfg.test_images, "test_", corpus.test_images, corpus.test_gt, false);
  return corpus;
}

}  // namespace consnet
