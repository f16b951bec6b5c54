// SPDX-License-Identifier: Apache-2.0
#include "consnet/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

#include "consnet/threading.hpp"

namespace consnet {

namespace {

std::vector<const FeatureRecord*> keep_top(const std::vector<FeatureRecord>& dets, real theta,
                                           int cap) {
  std::vector<const FeatureRecord*> kept;
  for (const auto& d : dets) {
    if (d.score > theta) kept.push_back(&d);
  }
  std::stable_sort(kept.begin(), kept.end(),
                   [](const FeatureRecord* a, const FeatureRecord* b) { return a->score > b->score; });
  if (cap >= 0 && static_cast<int>(kept.size()) > cap) kept.resize(cap);
  return kept;
}

}  // namespace

std::vector<Candidate> generate_candidates(const ImageDetections& image, real theta_h,
                                           real theta_o, int n_h, int n_o) {
  const auto humans = keep_top(image.humans, theta_h, n_h);
  const auto objects = keep_top(image.objects, theta_o, n_o);
  std::vector<Candidate> out;
  out.reserve(humans.size() * objects.size());
  for (const auto* h : humans) {
    for (const auto* o : objects) {
      Candidate c;
      c.image_id = image.image_id;
      c.b_h = h->box;
      c.b_o = o->box;
      c.c_h = h->score;
      c.c_o = o->score;
      c.a_h = h->feature;
      c.a_o = o->feature;
      out.push_back(std::move(c));
    }
  }
  return out;
}

std::vector<int> nis_filter(const std::vector<real>& phi_pair, real theta_pair) {
  std::vector<int> survivors;
  for (int i = 0; i < static_cast<int>(phi_pair.size()); ++i) {
    if (phi_pair[i] >= theta_pair) survivors.push_back(i);
  }
  return survivors;
}

real classification_score(const std::vector<real>& v_h, const std::vector<real>& v_o,
                          const std::vector<real>& v_a, const std::vector<real>& v_t,
                          const std::vector<real>& s_h, const std::vector<real>& s_o,
                          const std::vector<real>& s_a, const std::vector<real>& s_t, real gamma) {
  auto cosine = [](const std::vector<real>& a, const std::vector<real>& b) {
    const real na = l2_norm(a);
    const real nb = l2_norm(b);
    if (na == 0 || nb == 0) throw std::invalid_argument("classification_score: zero-norm vector");
    return dot(a, b) / (na * nb);
  };
  const real x = gamma * (cosine(v_h, s_h) + cosine(v_o, s_o) + cosine(v_a, s_a) +
                          cosine(v_t, s_t));
  if (x >= 0) return real(1) / (real(1) + std::exp(-x));
  const real e = std::exp(x);
  return e / (real(1) + e);
}

real detection_confidence(real r, real phi_pair, real c_h, real c_o) {
  return r * phi_pair * c_h * c_o;
}

Tensor compute_semantic_matrix(Model& model, const ConsistencyGraph& graph, const Tensor& Z) {
  if (model.cfg.embedder == EmbedderType::none) return Tensor();
  Tape tape;
  BindCtx ctx{tape};
  ModelVars vars = bind(ctx, model);
  Var s = embed_semantics(tape, model, vars, graph, tape.input(Z));
  return tape.value(s);
}

std::vector<Detection> detect(const ImageDetections& image, Model& model,
                              const Tensor& semantic_matrix, const LabelSpace& space,
                              const PipelineConfig& cfg) {
  const std::vector<Candidate> candidates =
      generate_candidates(image, cfg.theta_h, cfg.theta_o, cfg.n_h, cfg.n_o);
  std::vector<Detection> detections;
  if (candidates.empty()) return detections;

  const ClassNodeIndices cls = class_node_indices(space);
  const int d_a = model.cfg.visual.d_a;
  const int num_classes = space.num_classes();

  for (int begin = 0; begin < static_cast<int>(candidates.size()); begin += cfg.batch_rows) {
    const int end = std::min<int>(begin + cfg.batch_rows, static_cast<int>(candidates.size()));
    const int rows = end - begin;
    Tensor a_h(rows, d_a), a_o(rows, d_a), s(rows, 8);
    for (int r = 0; r < rows; ++r) {
      const Candidate& c = candidates[begin + r];
      if (static_cast<int>(c.a_h.size()) != d_a || static_cast<int>(c.a_o.size()) != d_a) {
        throw std::invalid_argument("detect: feature dimension mismatch");
      }
      std::copy(c.a_h.begin(), c.a_h.end(), &a_h.at(r, 0));
      std::copy(c.a_o.begin(), c.a_o.end(), &a_o.at(r, 0));
      const auto sc = spatial_config(c.b_h, c.b_o);
      std::copy(sc.begin(), sc.end(), &s.at(r, 0));
    }

    Tape tape;
    BindCtx ctx{tape};
    ModelVars vars = bind(ctx, model);
    VisualForward vf = visual_forward(tape, tape.input(std::move(a_h)), tape.input(std::move(a_o)),
                                      tape.input(std::move(s)), vars.visual, model.visual,
                                      BnMode::eval);
    const Tensor& phi = tape.value(vf.phi_pair);
    std::vector<real> phi_vec(rows);
    for (int r = 0; r < rows; ++r) phi_vec[r] = phi.at(r, 0);
    const std::vector<int> survivors = nis_filter(phi_vec, cfg.theta_pair);
    if (survivors.empty()) continue;

    Var sem{};
    if (model.cfg.embedder != EmbedderType::none) {
      sem = tape.input(semantic_matrix);
    }
    Var r_scores = classification_scores(tape, model, vars, vf, survivors, sem, cls);
    const Tensor& r_val = tape.value(r_scores);

    for (int si = 0; si < static_cast<int>(survivors.size()); ++si) {
      const Candidate& c = candidates[begin + survivors[si]];
      const real phi_c = phi_vec[survivors[si]];
      for (int k = 0; k < num_classes; ++k) {
        Detection det;
        det.image_id = c.image_id;
        det.b_h = c.b_h;
        det.b_o = c.b_o;
        det.hoi_class = k;
        det.score = detection_confidence(r_val.at(si, k), phi_c, c.c_h, c.c_o);
        detections.push_back(std::move(det));
      }
    }
  }
  return detections;
}

std::vector<Detection> detect_all(const std::vector<ImageDetections>& images, Model& model,
                                  const Tensor& semantic_matrix, const LabelSpace& space,
                                  const PipelineConfig& cfg) {
  std::vector<std::vector<Detection>> per_image(images.size());
  parallel_for(static_cast<int>(images.size()), [&](int i) {
    per_image[i] = detect(images[i], model, semantic_matrix, space, cfg);
  });
  std::vector<Detection> all;
  for (auto& dets : per_image) {
    all.insert(all.end(), std::make_move_iterator(dets.begin()),
               std::make_move_iterator(dets.end()));
  }
  return all;
}

}  // namespace consnet
