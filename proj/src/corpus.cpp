// SPDX-License-Identifier: Apache-2.0
#include "consnet/corpus.hpp"

#include <algorithm>
#include <set>
#include <unordered_map>

namespace consnet {

std::vector<Candidate> assemble_training_candidates(const std::vector<ImageDetections>& images,
                                                    const std::vector<GroundTruthPair>& gt,
                                                    real train_theta, real iou_threshold) {
  std::unordered_map<std::string, std::vector<const GroundTruthPair*>> gt_by_image;
  for (const auto& pair : gt) gt_by_image[pair.image_id].push_back(&pair);

  std::vector<Candidate> corpus;
  for (const auto& image : images) {
    auto candidates = generate_candidates(image, train_theta, train_theta, -1, -1);
    const auto it = gt_by_image.find(image.image_id);
    for (auto& cand : candidates) {
      std::set<int> labels;
      if (it != gt_by_image.end()) {
        for (const auto* pair : it->second) {
          const real pair_iou =
              std::min(box_iou(cand.b_h, pair->b_h), box_iou(cand.b_o, pair->b_o));
          if (pair_iou >= iou_threshold) {
            labels.insert(pair->hoi_ids.begin(), pair->hoi_ids.end());
          }
        }
      }
      cand.u = labels.empty() ? 0 : 1;
      cand.y.assign(labels.begin(), labels.end());
      corpus.push_back(std::move(cand));
    }
  }
  return corpus;
}

std::vector<Candidate> filter_training_corpus(const std::vector<Candidate>& corpus,
                                              const ZeroShotSplit& split) {
  std::vector<Candidate> kept;
  kept.reserve(corpus.size());
  for (const auto& cand : corpus) {
    const bool has_unseen =
        std::any_of(cand.y.begin(), cand.y.end(), [&](int id) { return split.is_unseen(id); });
    if (!has_unseen) kept.push_back(cand);
  }
  return kept;
}

std::vector<FeatureRecord> filter_feature_records(const std::vector<FeatureRecord>& records,
                                                  const LabelSpace& space,
                                                  const ZeroShotSplit& split) {
  const std::set<int> held_actions = unseen_actions(space, split);
  const std::set<int> held_objects = unseen_objects(space, split);
  std::set<std::string> drop_action_labels, drop_object_labels;
  for (int a : held_actions) drop_action_labels.insert(space.actions[a]);
  for (int o : held_objects) drop_object_labels.insert(space.objects[o]);

  std::vector<FeatureRecord> kept;
  kept.reserve(records.size());
  for (const auto& rec : records) {
    const bool dropped = rec.kind == FeatureRecord::Kind::human
                             ? drop_action_labels.count(rec.label) > 0
                             : drop_object_labels.count(rec.label) > 0;
    if (!dropped) kept.push_back(rec);
  }
  return kept;
}

std::map<int, int> train_positive_counts(const std::vector<Candidate>& corpus, int num_classes) {
  std::map<int, int> counts;
  for (int c = 0; c < num_classes; ++c) counts[c] = 0;
  for (const auto& cand : corpus) {
    for (int id : cand.y) counts[id]++;
  }
  return counts;
}

}  // namespace consnet
