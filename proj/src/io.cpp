// SPDX-License-Identifier: Apache-2.0
#include "consnet/io.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <stdexcept>

namespace consnet {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return in;
}

template <class Fn>
void for_each_jsonl(const std::string& path, Fn&& fn) {
  std::ifstream in = open_in(path);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
    fn(j);
  }
}

json box_to_json(const Box& b) { return json::array({b[0], b[1], b[2], b[3]}); }

Box box_from_json(const json& j) {
  if (!j.is_array() || j.size() != 4) throw std::runtime_error("box must be [x1,y1,x2,y2]");
  return Box{j[0].get<real>(), j[1].get<real>(), j[2].get<real>(), j[3].get<real>()};
}

json record_to_json(const FeatureRecord& rec) {
  return json{{"image_id", rec.image_id},
              {"box", box_to_json(rec.box)},
              {"label", rec.label},
              {"kind", rec.kind == FeatureRecord::Kind::human ? "human" : "object"},
              {"score", rec.score},
              {"feature", rec.feature}};
}

FeatureRecord record_from_json(const json& j) {
  FeatureRecord rec;
  rec.image_id = j.at("image_id").get<std::string>();
  rec.box = box_from_json(j.at("box"));
  rec.label = j.at("label").get<std::string>();
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "human") {
    rec.kind = FeatureRecord::Kind::human;
  } else if (kind == "object") {
    rec.kind = FeatureRecord::Kind::object;
  } else {
    throw std::runtime_error("feature record kind must be 'human' or 'object'");
  }
  rec.score = j.at("score").get<real>();
  rec.feature = j.at("feature").get<std::vector<real>>();
  validate(rec);
  return rec;
}

}  // namespace

void save_label_space(const LabelSpace& space, const std::string& path) {
  json hois = json::array();
  for (const auto& [a, o] : space.hois) {
    hois.push_back(json{{"action", space.actions[a]}, {"object", space.objects[o]}});
  }
  json j{{"actions", space.actions}, {"objects", space.objects}, {"hois", hois}};
  open_out(path) << j.dump(2) << "\n";
}

LabelSpace load_label_space(const std::string& path) {
  json j = json::parse(open_in(path));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& h : j.at("hois")) {
    pairs.emplace_back(h.at("action").get<std::string>(), h.at("object").get<std::string>());
  }
  return build_label_space(j.at("actions").get<std::vector<std::string>>(),
                           j.at("objects").get<std::vector<std::string>>(), pairs);
}

void save_split(const ZeroShotSplit& split, const std::string& path) {
  json j{{"scenario", scenario_to_string(split.scenario)},
         {"seed", split.seed},
         {"unseen_hoi_ids", std::vector<int>(split.unseen_hoi_ids.begin(),
                                             split.unseen_hoi_ids.end())}};
  open_out(path) << j.dump(2) << "\n";
}

ZeroShotSplit load_split(const std::string& path) {
  json j = json::parse(open_in(path));
  ZeroShotSplit split;
  split.scenario = scenario_from_string(j.at("scenario").get<std::string>());
  split.seed = j.at("seed").get<std::uint64_t>();
  for (int id : j.at("unseen_hoi_ids").get<std::vector<int>>()) split.unseen_hoi_ids.insert(id);
  return split;
}

void save_word_vectors(const WordVectorTable& table, const std::string& path) {
  std::ofstream out = open_out(path);
  // deterministic order for reproducible files
  std::map<std::string, const std::vector<real>*> sorted;
  for (const auto& [token, vec] : table.vectors) sorted.emplace(token, &vec);
  for (const auto& [token, vec] : sorted) {
    out << json{{"token", token}, {"vector", *vec}}.dump() << "\n";
  }
}

WordVectorTable load_word_vectors(const std::string& path) {
  WordVectorTable table;
  for_each_jsonl(path, [&](const json& j) {
    table.insert(j.at("token").get<std::string>(), j.at("vector").get<std::vector<real>>());
  });
  if (table.vectors.empty()) throw std::runtime_error("empty word vector table: " + path);
  return table;
}

void save_feature_records(const std::vector<FeatureRecord>& records, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& rec : records) out << record_to_json(rec).dump() << "\n";
}

std::vector<FeatureRecord> load_feature_records(const std::string& path) {
  std::vector<FeatureRecord> records;
  for_each_jsonl(path, [&](const json& j) { records.push_back(record_from_json(j)); });
  return records;
}

void save_image_detections(const std::vector<ImageDetections>& images, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& image : images) {
    for (const auto& rec : image.humans) out << record_to_json(rec).dump() << "\n";
    for (const auto& rec : image.objects) out << record_to_json(rec).dump() << "\n";
  }
}

std::vector<ImageDetections> load_image_detections(const std::string& path) {
  std::vector<ImageDetections> images;
  std::map<std::string, std::size_t> index;
  for_each_jsonl(path, [&](const json& j) {
    FeatureRecord rec = record_from_json(j);
    auto [it, inserted] = index.try_emplace(rec.image_id, images.size());
    if (inserted) {
      images.emplace_back();
      images.back().image_id = rec.image_id;
    }
    auto& image = images[it->second];
    (rec.kind == FeatureRecord::Kind::human ? image.humans : image.objects)
        .push_back(std::move(rec));
  });
  return images;
}

void save_detections(const std::vector<Detection>& detections, const std::string& path) {
  std::ofstream out = open_out(path);
  for (const auto& det : detections) {
    out << json{{"image_id", det.image_id},
                {"b_h", box_to_json(det.b_h)},
                {"b_o", box_to_json(det.b_o)},
                {"hoi", det.hoi_class},
                {"score", det.score}}
               .dump()
        << "\n";
  }
}

std::vector<Detection> load_detections(const std::string& path) {
  std::vector<Detection> detections;
  for_each_jsonl(path, [&](const json& j) {
    Detection det;
    det.image_id = j.at("image_id").get<std::string>();
    det.b_h = box_from_json(j.at("b_h"));
    det.b_o = box_from_json(j.at("b_o"));
    det.hoi_class = j.at("hoi").get<int>();
    det.score = j.at("score").get<real>();
    detections.push_back(std::move(det));
  });
  return detections;
}

void save_ground_truth(const std::vector<GroundTruthPair>& pairs, const std::string& path) {
  // group consecutive pairs by image
  std::ofstream out = open_out(path);
  std::map<std::string, std::vector<const GroundTruthPair*>> by_image;
  for (const auto& p : pairs) by_image[p.image_id].push_back(&p);
  for (const auto& [image_id, image_pairs] : by_image) {
    json arr = json::array();
    for (const auto* p : image_pairs) {
      arr.push_back(json{{"b_h", box_to_json(p->b_h)},
                         {"b_o", box_to_json(p->b_o)},
                         {"hoi_ids", p->hoi_ids}});
    }
    out << json{{"image_id", image_id}, {"pairs", arr}}.dump() << "\n";
  }
}

std::vector<GroundTruthPair> load_ground_truth(const std::string& path) {
  std::vector<GroundTruthPair> pairs;
  for_each_jsonl(path, [&](const json& j) {
    const std::string image_id = j.at("image_id").get<std::string>();
    for (const auto& pj : j.at("pairs")) {
      GroundTruthPair pair;
      pair.image_id = image_id;
      pair.b_h = box_from_json(pj.at("b_h"));
      pair.b_o = box_from_json(pj.at("b_o"));
      pair.hoi_ids = pj.at("hoi_ids").get<std::vector<int>>();
      if (pair.hoi_ids.empty()) throw std::runtime_error("ground truth pair without hoi_ids");
      pairs.push_back(std::move(pair));
    }
  });
  return pairs;
}

void save_graph(const ConsistencyGraph& graph, const LabelSpace& space, const std::string& path) {
  json nodes = json::array();
  for (int n = 0; n < graph.num_nodes(); ++n) {
    const NodeId id = space.node_id(n);
    const char* kind = id.kind == NodeKind::human    ? "human"
                       : id.kind == NodeKind::action ? "action"
                       : id.kind == NodeKind::object ? "object"
                                                     : "interaction";
    nodes.push_back(json{{"kind", kind}, {"label", space.node_label(n)}});
  }
  json edges = json::array();
  for (const auto& [key, tag] : graph.edge_tags) {
    edges.push_back(json::array({key.first, key.second, edge_tag_to_string(tag)}));
  }
  open_out(path) << json{{"nodes", nodes}, {"edges", edges}}.dump(2) << "\n";
}

std::string report_to_json(const EvalReport& report) {
  json j{{"per_class_ap", report.per_class_ap},
         {"per_class_num_gt", report.per_class_num_gt},
         {"map_full", report.map_full},
         {"classes_evaluated", report.classes_evaluated}};
  if (report.map_seen) j["map_seen"] = *report.map_seen;
  if (report.map_unseen) j["map_unseen"] = *report.map_unseen;
  if (report.map_rare) j["map_rare"] = *report.map_rare;
  if (report.map_nonrare) j["map_nonrare"] = *report.map_nonrare;
  return j.dump(2);
}

void save_report(const EvalReport& report, const std::string& path) {
  open_out(path) << report_to_json(report) << "\n";
}

}  // namespace consnet
