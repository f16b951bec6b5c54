// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <vector>

#include "consnet/evaluator.hpp"
#include "consnet/label_space.hpp"
#include "consnet/pipeline.hpp"

namespace consnet {

/// Training-time candidate assembly: all detections above the confidence
/// floor are paired exhaustively (no top-N cap) and labeled against the
/// ground truth. A candidate is positive when min(IoU(b_h), IoU(b_o)) >= 0.5
/// against some annotated pair; y collects every matching pair's classes.
std::vector<Candidate> assemble_training_candidates(const std::vector<ImageDetections>& images,
                                                    const std::vector<GroundTruthPair>& gt,
                                                    real train_theta,
                                                    real iou_threshold = real(0.5));

/// Drops every positive sample that carries an unseen HOI label; negatives
/// pass through.
std::vector<Candidate> filter_training_corpus(const std::vector<Candidate>& corpus,
                                              const ZeroShotSplit& split);

/// Drops crops whose category is held out entirely (UA: human crops of
/// unseen actions, UO: object crops of unseen objects).
std::vector<FeatureRecord> filter_feature_records(const std::vector<FeatureRecord>& records,
                                                  const LabelSpace& space,
                                                  const ZeroShotSplit& split);

/// Positive-candidate counts per class, for rarity buckets and loss weighting.
std::map<int, int> train_positive_counts(const std::vector<Candidate>& corpus, int num_classes);

}  // namespace consnet
