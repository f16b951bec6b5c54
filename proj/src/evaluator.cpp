// SPDX-License-Identifier: Apache-2.0
#include "consnet/evaluator.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "consnet/threading.hpp"

namespace consnet {

real box_iou(const Box& a, const Box& b) {
  for (const Box* x : {&a, &b}) {
    if (!((*x)[0] < (*x)[2]) || !((*x)[1] < (*x)[3])) {
      throw std::invalid_argument("box_iou: degenerate box");
    }
  }
  const real ix1 = std::max(a[0], b[0]);
  const real iy1 = std::max(a[1], b[1]);
  const real ix2 = std::min(a[2], b[2]);
  const real iy2 = std::min(a[3], b[3]);
  const real iw = std::max(real(0), ix2 - ix1);
  const real ih = std::max(real(0), iy2 - iy1);
  const real inter = iw * ih;
  const real area_a = (a[2] - a[0]) * (a[3] - a[1]);
  const real area_b = (b[2] - b[0]) * (b[3] - b[1]);
  return inter / (area_a + area_b - inter);
}

std::vector<char> match_detections(const std::vector<Detection>& dets_sorted,
                                   const std::vector<GroundTruthPair>& gts, real iou_threshold) {
  std::vector<char> flags(dets_sorted.size(), 0);
  std::vector<char> gt_used(gts.size(), 0);
  for (std::size_t d = 0; d < dets_sorted.size(); ++d) {
    const Detection& det = dets_sorted[d];
    real best_iou = 0;
    int best_gt = -1;
    for (std::size_t g = 0; g < gts.size(); ++g) {
      if (gt_used[g] || gts[g].image_id != det.image_id) continue;
      const real pair_iou = std::min(box_iou(det.b_h, gts[g].b_h), box_iou(det.b_o, gts[g].b_o));
      if (pair_iou > best_iou) {
        best_iou = pair_iou;
        best_gt = static_cast<int>(g);
      }
    }
    if (best_gt >= 0 && best_iou > iou_threshold) {  // strictly greater
      flags[d] = 1;
      gt_used[best_gt] = 1;
    }
  }
  return flags;
}

real average_precision(const std::vector<char>& tp_flags, int num_gt) {
  if (num_gt < 0) throw std::invalid_argument("average_precision: negative num_gt");
  if (num_gt == 0) return 0;
  const int n = static_cast<int>(tp_flags.size());
  std::vector<real> precision(n), recall(n);
  int tp = 0;
  for (int i = 0; i < n; ++i) {
    if (tp_flags[i]) tp++;
    precision[i] = static_cast<real>(tp) / (i + 1);
    recall[i] = static_cast<real>(tp) / num_gt;
  }
  // precision envelope from the right
  for (int i = n - 2; i >= 0; --i) precision[i] = std::max(precision[i], precision[i + 1]);
  real ap = 0;
  real prev_recall = 0;
  for (int i = 0; i < n; ++i) {
    if (recall[i] > prev_recall) {
      ap += (recall[i] - prev_recall) * precision[i];
      prev_recall = recall[i];
    }
  }
  return ap;
}

namespace {

real mean_over(const std::vector<real>& ap, const std::vector<int>& num_gt,
               const std::vector<char>& in_subset) {
  real sum = 0;
  int count = 0;
  for (std::size_t c = 0; c < ap.size(); ++c) {
    if (num_gt[c] > 0 && in_subset[c]) {
      sum += ap[c];
      count++;
    }
  }
  return count == 0 ? real(0) : sum / count;
}

}  // namespace

EvalReport evaluate(const std::vector<Detection>& detections,
                    const std::vector<GroundTruthPair>& ground_truth, const LabelSpace& space,
                    const EvalOptions& options) {
  const int C = space.num_classes();
  for (const auto& det : detections) {
    if (det.hoi_class < 0 || det.hoi_class >= C) {
      throw std::invalid_argument("evaluate: detection references invalid class");
    }
  }
  for (const auto& gt : ground_truth) {
    if (gt.hoi_ids.empty()) throw std::invalid_argument("evaluate: ground truth without labels");
  }

  std::vector<std::vector<Detection>> dets_by_class(C);
  for (const auto& det : detections) dets_by_class[det.hoi_class].push_back(det);
  std::vector<std::vector<GroundTruthPair>> gts_by_class(C);
  for (const auto& gt : ground_truth) {
    for (int id : gt.hoi_ids) {
      if (id < 0 || id >= C) throw std::invalid_argument("evaluate: invalid GT class id");
      gts_by_class[id].push_back(gt);
    }
  }

  EvalReport report;
  report.per_class_ap.assign(C, 0);
  report.per_class_num_gt.assign(C, 0);
  for (int c = 0; c < C; ++c) {
    report.per_class_num_gt[c] = static_cast<int>(gts_by_class[c].size());
  }

  parallel_for(C, [&](int c) {
    auto& dets = dets_by_class[c];
    std::stable_sort(dets.begin(), dets.end(),
                     [](const Detection& a, const Detection& b) { return a.score > b.score; });
    const auto flags = match_detections(dets, gts_by_class[c], options.iou_threshold);
    report.per_class_ap[c] = average_precision(flags, report.per_class_num_gt[c]);
  });

  std::vector<char> all(C, 1);
  report.map_full = mean_over(report.per_class_ap, report.per_class_num_gt, all);
  report.classes_evaluated = 0;
  for (int c = 0; c < C; ++c) {
    if (report.per_class_num_gt[c] > 0) report.classes_evaluated++;
  }

  if (options.split) {
    std::vector<char> seen(C, 0), unseen(C, 0);
    for (int c = 0; c < C; ++c) {
      (options.split->is_unseen(c) ? unseen : seen)[c] = 1;
    }
    report.map_seen = mean_over(report.per_class_ap, report.per_class_num_gt, seen);
    report.map_unseen = mean_over(report.per_class_ap, report.per_class_num_gt, unseen);
  }
  if (options.train_positive_counts) {
    std::vector<char> rare(C, 0), nonrare(C, 0);
    for (int c = 0; c < C; ++c) {
      const auto it = options.train_positive_counts->find(c);
      const int count = it == options.train_positive_counts->end() ? 0 : it->second;
      (count < options.rare_threshold ? rare : nonrare)[c] = 1;
    }
    report.map_rare = mean_over(report.per_class_ap, report.per_class_num_gt, rare);
    report.map_nonrare = mean_over(report.per_class_ap, report.per_class_num_gt, nonrare);
  }
  return report;
}

}  // namespace consnet
