// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "consnet/embeddings.hpp"
#include "consnet/model.hpp"
#include "consnet/visual_net.hpp"

namespace consnet {

/// One human-object pair. Training labels (u, y) are present only on
/// corpus candidates.
struct Candidate {
  std::string image_id;
  Box b_h{}, b_o{};
  real c_h = 0, c_o = 0;
  std::vector<real> a_h, a_o;
  std::optional<int> u;    // interactiveness label
  std::vector<int> y;      // positive HOI class ids
};

struct Detection {
  std::string image_id;
  Box b_h{}, b_o{};
  int hoi_class = 0;
  real score = 0;
};

/// Human/object detections of one image.
struct ImageDetections {
  std::string image_id;
  std::vector<FeatureRecord> humans;
  std::vector<FeatureRecord> objects;
};

struct PipelineConfig {
  real theta_h = real(0.5);
  real theta_o = real(0.1);
  int n_h = 10;
  int n_o = 20;
  real theta_pair = real(0.1);   // NIS threshold on interactiveness
  real train_theta = real(0.1);  // training-time confidence floor, no top-N cap
  int batch_rows = 256;          // inference chunk size
};

/// Keeps detections with score > theta, truncates to the top N by score
/// (stable on ties), then pairs every kept human with every kept object.
/// Pass n < 0 for no cap.
std::vector<Candidate> generate_candidates(const ImageDetections& image, real theta_h,
                                           real theta_o, int n_h, int n_o);

/// Survivors are exactly the candidates with interactiveness >= theta_pair.
std::vector<int> nis_filter(const std::vector<real>& phi_pair, real theta_pair);

/// r^i = sigmoid(gamma * sum_k cos(v_k, s_k^i)); scalar reference form.
real classification_score(const std::vector<real>& v_h, const std::vector<real>& v_o,
                          const std::vector<real>& v_a, const std::vector<real>& v_t,
                          const std::vector<real>& s_h, const std::vector<real>& s_o,
                          const std::vector<real>& s_a, const std::vector<real>& s_t, real gamma);

/// P = r * phi * c_h * c_o
real detection_confidence(real r, real phi_pair, real c_h, real c_o);

/// Precomputed semantic embedding matrix for inference (frozen parameters).
Tensor compute_semantic_matrix(Model& model, const ConsistencyGraph& graph, const Tensor& Z);

/// Three-stage inference on one image bundle: candidate generation,
/// non-interactive suppression, per-class scoring. Emits one detection per
/// surviving candidate per HOI class.
std::vector<Detection> detect(const ImageDetections& image, Model& model,
                              const Tensor& semantic_matrix, const LabelSpace& space,
                              const PipelineConfig& cfg);

/// detect() fanned out over images; worker count honors CONSNET_THREADS.
std::vector<Detection> detect_all(const std::vector<ImageDetections>& images, Model& model,
                                  const Tensor& semantic_matrix, const LabelSpace& space,
                                  const PipelineConfig& cfg);

}  // namespace consnet
