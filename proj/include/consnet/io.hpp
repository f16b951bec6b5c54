// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "consnet/embeddings.hpp"
#include "consnet/evaluator.hpp"
#include "consnet/graph.hpp"
#include "consnet/label_space.hpp"
#include "consnet/pipeline.hpp"

namespace consnet {

// labelspace.json: {"actions": [...], "objects": [...],
//                   "hois": [{"action": str, "object": str}]}
void save_label_space(const LabelSpace& space, const std::string& path);
LabelSpace load_label_space(const std::string& path);

// split file: {"scenario": str, "seed": int, "unseen_hoi_ids": [int]}
void save_split(const ZeroShotSplit& split, const std::string& path);
ZeroShotSplit load_split(const std::string& path);

// word vectors: JSON lines {"token": str, "vector": [float, ...]}
void save_word_vectors(const WordVectorTable& table, const std::string& path);
WordVectorTable load_word_vectors(const std::string& path);

// feature records: JSON lines {"image_id": str, "box": [f,f,f,f], "label": str,
//                              "kind": "human"|"object", "score": f, "feature": [...]}
void save_feature_records(const std::vector<FeatureRecord>& records, const std::string& path);
std::vector<FeatureRecord> load_feature_records(const std::string& path);

// per-image detections reuse the feature record schema; rows are grouped by
// image_id in file order
void save_image_detections(const std::vector<ImageDetections>& images, const std::string& path);
std::vector<ImageDetections> load_image_detections(const std::string& path);

// detections: JSON lines {"image_id", "b_h":[4], "b_o":[4], "hoi": int, "score": f}
void save_detections(const std::vector<Detection>& detections, const std::string& path);
std::vector<Detection> load_detections(const std::string& path);

// ground truth: JSON lines {"image_id", "pairs":[{"b_h":[4],"b_o":[4],"hoi_ids":[int]}]}
void save_ground_truth(const std::vector<GroundTruthPair>& pairs, const std::string& path);
std::vector<GroundTruthPair> load_ground_truth(const std::string& path);

// graph export: {"nodes": [{"kind","label"}], "edges": [[i,j,"tag"],...]};
// self-loops are implicit
void save_graph(const ConsistencyGraph& graph, const LabelSpace& space, const std::string& path);

// evaluation report
void save_report(const EvalReport& report, const std::string& path);
std::string report_to_json(const EvalReport& report);

}  // namespace consnet
