// Copyright 2026 The SRG Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "srg/evalx.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "srg/error.hpp"
#include "srg/geometry.hpp"

namespace srg {

using nlohmann::json;

namespace {

double pct(std::size_t num, std::size_t den) { return den == 0 ? 0.0 : 100.0 * num / den; }

double f1_of(double p, double r) { return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0; }

}  // namespace

std::vector<std::size_t> predicted_labels(const std::vector<double>& probs, RelationMode mode) {
  if (mode == RelationMode::Multiclass) {
    if (probs.empty()) return {};
    return {static_cast<std::size_t>(std::max_element(probs.begin(), probs.end()) - probs.begin())};
  }
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (probs[i] >= 0.5) out.push_back(i);
  }
  return out;
}

ClassificationReport classification_metrics(const RelationVocabulary& vocab,
                                            std::span<const std::vector<std::size_t>> truth,
                                            std::span<const std::vector<double>> probs,
                                            const std::vector<std::size_t>& ks) {
  if (truth.empty()) throw Error(ErrorKind::EmptySet, "no samples to evaluate");
  if (truth.size() != probs.size()) {
    throw Error(ErrorKind::LengthMismatch, "truth has " + std::to_string(truth.size()) +
                                               " samples, predictions " + std::to_string(probs.size()));
  }
  const std::size_t c = vocab.size();
  ClassificationReport r;
  r.mode = vocab.mode();
  r.n = truth.size();
  r.per_relation.resize(c);
  for (std::size_t i = 0; i < c; ++i) r.per_relation[i].relation = vocab.names()[i];
  std::size_t correct = 0;
  std::map<std::size_t, std::size_t> hits;
  for (std::size_t k : ks) hits[k] = 0;

  for (std::size_t s = 0; s < truth.size(); ++s) {
    if (probs[s].size() != c) throw Error(ErrorKind::LengthMismatch, "prediction length differs from vocabulary");
    std::vector<char> is_true(c, 0), is_pred(c, 0);
    for (std::size_t l : truth[s]) {
      if (l >= c) throw Error(ErrorKind::Validation, "true label index out of range");
      is_true[l] = 1;
    }
    for (std::size_t l : predicted_labels(probs[s], r.mode)) is_pred[l] = 1;
    for (std::size_t i = 0; i < c; ++i) {
      if (is_true[i] && is_pred[i]) ++r.per_relation[i].tp;
      if (!is_true[i] && is_pred[i]) ++r.per_relation[i].fp;
      if (is_true[i] && !is_pred[i]) ++r.per_relation[i].fn;
    }
    correct += (r.mode == RelationMode::Multiclass)
                   ? std::any_of(is_pred.begin(), is_pred.end(), [&](char p) { return p; }) &&
                         is_true[predicted_labels(probs[s], r.mode).front()]
                   : is_true == is_pred;
    RelationDistribution dist{probs[s], r.mode};
    const auto order = ranked_relations(dist);
    for (std::size_t k : ks) {
      const std::size_t top = std::min(k, order.size());
      if (std::any_of(order.begin(), order.begin() + static_cast<long>(top),
                      [&](std::size_t l) { return is_true[l]; })) {
        ++hits[k];
      }
    }
  }
  std::size_t tp = 0, fp = 0, fn = 0;
  double f1_sum = 0.0;
  for (auto& rs : r.per_relation) {
    rs.precision = pct(rs.tp, rs.tp + rs.fp);
    rs.recall = pct(rs.tp, rs.tp + rs.fn);
    rs.f1 = f1_of(rs.precision, rs.recall);
    tp += rs.tp;
    fp += rs.fp;
    fn += rs.fn;
    f1_sum += rs.f1;
  }
  r.micro_precision = pct(tp, tp + fp);
  r.micro_recall = pct(tp, tp + fn);
  r.micro_f1 = f1_of(r.micro_precision, r.micro_recall);
  r.macro_f1 = c ? f1_sum / static_cast<double>(c) : 0.0;
  r.accuracy = pct(correct, r.n);
  for (const auto& [k, h] : hits) r.topk[k] = pct(h, r.n);
  return r;
}

ClassificationReport evaluate_srm(const MlpParams& model, const SampleSet& data,
                                  const std::vector<std::size_t>& ks) {
  if (!(data.vocabulary == model.vocabulary)) {
    throw Error(ErrorKind::SchemaMismatch, "dataset and model relation vocabularies differ");
  }
  std::vector<std::vector<std::size_t>> truth;
  std::vector<std::vector<double>> probs;
  truth.reserve(data.size());
  probs.reserve(data.size());
  for (const auto& s : data.samples) {
    truth.push_back(s.labels);
    probs.push_back(forward(model, s.x).probs);
  }
  return classification_metrics(model.vocabulary, truth, probs, ks);
}

// ---------------------------------------------------------------------------

double best_target_iou(const BBox2D& predicted, const Expression& expr) {
  double best = 0.0;
  if (expr.gt_target_bbox) best = iou_2d(predicted, *expr.gt_target_bbox);
  for (const auto& alt : expr.gt_target_alternatives) best = std::max(best, iou_2d(predicted, alt));
  return best;
}

GroundingReport grounding_metrics(std::span<const GroundingCase> cases, const std::vector<double>& thresholds) {
  if (cases.empty()) throw Error(ErrorKind::EmptySet, "no grounding cases to evaluate");
  GroundingReport r;
  r.n = cases.size();
  std::vector<double> ious;
  ious.reserve(cases.size());
  for (const auto& c : cases) {
    if (!c.expr.gt_target_bbox) {
      throw Error(ErrorKind::Validation, "expression '" + c.expr.target_label + " " + c.expr.relation + " " +
                                             c.expr.reference_label + "' has no gt_target_bbox");
    }
    if (!c.predicted) {
      ++r.failed;
      ious.push_back(0.0);
    } else {
      ious.push_back(best_target_iou(*c.predicted, c.expr));
    }
  }
  for (double t : thresholds) {
    const auto hits = std::count_if(ious.begin(), ious.end(), [&](double v) { return v >= t; });
    r.accuracy_at[t] = pct(static_cast<std::size_t>(hits), r.n);
  }
  r.mean_iou = std::accumulate(ious.begin(), ious.end(), 0.0) / static_cast<double>(r.n);
  return r;
}

// ---------------------------------------------------------------------------
// Records

namespace {

json det_to_json(const Detection2D& d) {
  return {{"label", d.label}, {"score", d.score}, {"bbox", {d.bbox.x, d.bbox.y, d.bbox.w, d.bbox.h}}};
}

Detection2D det_from_json(const json& j) {
  Detection2D d;
  d.label = j.at("label").get<std::string>();
  d.score = j.at("score").get<double>();
  const auto b = j.at("bbox").get<std::vector<double>>();
  if (b.size() != 4) throw Error(ErrorKind::Parse, "bbox needs 4 numbers");
  d.bbox = {b[0], b[1], b[2], b[3]};
  return d;
}

bool same_pair(const PairScore& a, const PairScore& b) {
  return a.target_index == b.target_index && a.reference_index == b.reference_index &&
         a.target_score == b.target_score && a.reference_score == b.reference_score &&
         a.relation_prob == b.relation_prob && a.penalty == b.penalty && a.joint == b.joint &&
         a.excluded == b.excluded;
}

}  // namespace

bool GroundingRecord::operator==(const GroundingRecord& o) const {
  return scene_id == o.scene_id && expression_index == o.expression_index && target_label == o.target_label &&
         relation == o.relation && reference_label == o.reference_label && status == o.status &&
         message == o.message && target == o.target && reference == o.reference &&
         joint_score == o.joint_score && relation_prob == o.relation_prob &&
         std::equal(table.begin(), table.end(), o.table.begin(), o.table.end(), same_pair);
}

std::string record_to_json_line(const GroundingRecord& r) {
  json j = {{"scene_id", r.scene_id},
            {"expression_index", r.expression_index},
            {"target_label", r.target_label},
            {"relation", r.relation},
            {"reference_label", r.reference_label},
            {"status", r.status}};
  if (!r.message.empty()) j["message"] = r.message;
  if (r.target) j["target"] = det_to_json(*r.target);
  if (r.reference) j["reference"] = det_to_json(*r.reference);
  if (r.status == "ok") {
    j["joint_score"] = r.joint_score;
    j["relation_prob"] = r.relation_prob;
  }
  if (!r.table.empty()) {
    json t = json::array();
    for (const auto& p : r.table) {
      t.push_back({{"target_index", p.target_index},
                   {"reference_index", p.reference_index},
                   {"target_score", p.target_score},
                   {"reference_score", p.reference_score},
                   {"relation_prob", p.relation_prob},
                   {"penalty", p.penalty},
                   {"joint", p.joint},
                   {"excluded", p.excluded}});
    }
    j["pairs"] = std::move(t);
  }
  return j.dump();
}

GroundingRecord record_from_json_line(const std::string& line) {
  try {
    const json j = json::parse(line);
    GroundingRecord r;
    r.scene_id = j.at("scene_id").get<std::string>();
    r.expression_index = j.at("expression_index").get<std::size_t>();
    r.target_label = j.value("target_label", "");
    r.relation = j.value("relation", "");
    r.reference_label = j.value("reference_label", "");
    r.status = j.at("status").get<std::string>();
    r.message = j.value("message", "");
    if (j.contains("target")) r.target = det_from_json(j["target"]);
    if (j.contains("reference")) r.reference = det_from_json(j["reference"]);
    r.joint_score = j.value("joint_score", 0.0);
    r.relation_prob = j.value("relation_prob", 0.0);
    if (j.contains("pairs")) {
      for (const auto& p : j["pairs"]) {
        PairScore s;
        s.target_index = p.at("target_index").get<std::size_t>();
        s.reference_index = p.at("reference_index").get<std::size_t>();
        s.target_score = p.at("target_score").get<double>();
        s.reference_score = p.at("reference_score").get<double>();
        s.relation_prob = p.at("relation_prob").get<double>();
        s.penalty = p.at("penalty").get<double>();
        s.joint = p.at("joint").get<double>();
        s.excluded = p.at("excluded").get<bool>();
        r.table.push_back(s);
      }
    }
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("grounding record: ") + e.what());
  }
}

std::vector<GroundingRecord> parse_records(const std::string& jsonl) {
  std::vector<GroundingRecord> out;
  std::istringstream in(jsonl);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(record_from_json_line(line));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Reports

std::string to_json(const ClassificationReport& r) {
  json per = json::array();
  for (const auto& s : r.per_relation) {
    per.push_back({{"relation", s.relation}, {"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
                   {"precision", s.precision}, {"recall", s.recall}, {"f1", s.f1}});
  }
  json topk = json::array();
  for (const auto& [k, v] : r.topk) topk.push_back({{"k", k}, {"accuracy", v}});
  const json j = {{"mode", to_string(r.mode)},
                  {"n", r.n},
                  {"per_relation", per},
                  {"micro_precision", r.micro_precision},
                  {"micro_recall", r.micro_recall},
                  {"micro_f1", r.micro_f1},
                  {"macro_f1", r.macro_f1},
                  {"accuracy", r.accuracy},
                  {"topk", topk}};
  return j.dump(2) + "\n";
}

std::string to_json(const GroundingReport& r) {
  json acc = json::array();
  for (const auto& [t, v] : r.accuracy_at) acc.push_back({{"iou", t}, {"accuracy", v}});
  const json j = {{"n", r.n}, {"failed", r.failed}, {"accuracy_at", acc}, {"mean_iou", r.mean_iou}};
  return j.dump(2) + "\n";
}

ClassificationReport classification_report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    ClassificationReport r;
    r.mode = relation_mode_from_string(j.at("mode").get<std::string>());
    r.n = j.at("n").get<std::size_t>();
    for (const auto& p : j.at("per_relation")) {
      RelationScores s;
      s.relation = p.at("relation").get<std::string>();
      s.tp = p.at("tp").get<std::size_t>();
      s.fp = p.at("fp").get<std::size_t>();
      s.fn = p.at("fn").get<std::size_t>();
      s.precision = p.at("precision").get<double>();
      s.recall = p.at("recall").get<double>();
      s.f1 = p.at("f1").get<double>();
      r.per_relation.push_back(s);
    }
    r.micro_precision = j.at("micro_precision").get<double>();
    r.micro_recall = j.at("micro_recall").get<double>();
    r.micro_f1 = j.at("micro_f1").get<double>();
    r.macro_f1 = j.at("macro_f1").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
    for (const auto& t : j.at("topk")) r.topk[t.at("k").get<std::size_t>()] = t.at("accuracy").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("classification report: ") + e.what());
  }
}

GroundingReport grounding_report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    GroundingReport r;
    r.n = j.at("n").get<std::size_t>();
    r.failed = j.at("failed").get<std::size_t>();
    for (const auto& a : j.at("accuracy_at")) r.accuracy_at[a.at("iou").get<double>()] = a.at("accuracy").get<double>();
    r.mean_iou = j.at("mean_iou").get<double>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Parse, std::string("grounding report: ") + e.what());
  }
}

std::string to_text(const ClassificationReport& r) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "samples: %zu (%s)\n", r.n, to_string(r.mode).c_str());
  out << buf;
  std::snprintf(buf, sizeof buf, "%-14s %6s %6s %6s %9s %9s %9s\n", "relation", "tp", "fp", "fn", "precision",
                "recall", "f1");
  out << buf;
  for (const auto& s : r.per_relation) {
    std::snprintf(buf, sizeof buf, "%-14s %6zu %6zu %6zu %9.2f %9.2f %9.2f\n", s.relation.c_str(), s.tp, s.fp,
                  s.fn, s.precision, s.recall, s.f1);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "micro P/R/F1: %.2f / %.2f / %.2f\nmacro F1: %.2f\naccuracy: %.2f\n",
                r.micro_precision, r.micro_recall, r.micro_f1, r.macro_f1, r.accuracy);
  out << buf;
  for (const auto& [k, v] : r.topk) {
    std::snprintf(buf, sizeof buf, "top-%zu: %.2f\n", k, v);
    out << buf;
  }
  return out.str();
}

std::string to_text(const GroundingReport& r) {
  std::ostringstream out;
  char buf[120];
  std::snprintf(buf, sizeof buf, "expressions: %zu (failed: %zu)\n", r.n, r.failed);
  out << buf;
  for (const auto& [t, v] : r.accuracy_at) {
    std::snprintf(buf, sizeof buf, "acc@%.2f: %.2f\n", t, v);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "mean IoU: %.4f\n", r.mean_iou);
  out << buf;
  return out.str();
}

}  // namespace srg
