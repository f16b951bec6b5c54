// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "consnet/label_space.hpp"
#include "consnet/pipeline.hpp"

namespace consnet {

struct GroundTruthPair {
  std::string image_id;
  Box b_h{}, b_o{};
  std::vector<int> hoi_ids;
};

struct EvalReport {
  std::vector<real> per_class_ap;
  std::vector<int> per_class_num_gt;
  real map_full = 0;
  std::optional<real> map_seen, map_unseen;     // zero-shot mode
  std::optional<real> map_rare, map_nonrare;    // supervised mode
  int classes_evaluated = 0;                    // classes with at least one GT
};

real box_iou(const Box& a, const Box& b);

/// Greedy matching by descending score: a detection is a true positive iff
/// min(IoU(b_h), IoU(b_o)) > 0.5 against a not-yet-matched ground-truth pair
/// of the class in the same image; each GT matches at most once and every
/// detection takes its best-IoU GT. Detections must already be sorted by
/// descending score (ties keep input order).
std::vector<char> match_detections(const std::vector<Detection>& dets_sorted,
                                   const std::vector<GroundTruthPair>& gts, real iou_threshold);

/// Area under the precision-recall step curve with all-point interpolation
/// (precision envelope). Returns 0 when num_gt == 0.
real average_precision(const std::vector<char>& tp_flags, int num_gt);

struct EvalOptions {
  const ZeroShotSplit* split = nullptr;                 // enables seen/unseen means
  const std::map<int, int>* train_positive_counts = nullptr;  // enables rare/non-rare means
  int rare_threshold = 10;
  real iou_threshold = real(0.5);
};

/// Per-class AP over all images; classes with no ground truth are excluded
/// from every mean.
EvalReport evaluate(const std::vector<Detection>& detections,
                    const std::vector<GroundTruthPair>& ground_truth, const LabelSpace& space,
                    const EvalOptions& options = {});

}  // namespace consnet
