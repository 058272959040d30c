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

#pragma once

// Evaluation: relation classification (per-relation P/R/F1, micro and macro
// averages, accuracy, top-k) and grounding accuracy at IoU thresholds.
// All rates are percentages. F1 is 0 when precision + recall is 0.

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "srg/ranking.hpp"
#include "srg/srm.hpp"
#include "srg/types.hpp"

namespace srg {

struct RelationScores {
  std::string relation;
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;

  bool operator==(const RelationScores&) const = default;
};

struct ClassificationReport {
  RelationMode mode = RelationMode::Multiclass;
  std::size_t n = 0;
  std::vector<RelationScores> per_relation;
  double micro_precision = 0.0, micro_recall = 0.0, micro_f1 = 0.0;
  double macro_f1 = 0.0;
  /// Multiclass: argmax correct. Multilabel: predicted set equals the true set.
  double accuracy = 0.0;
  std::map<std::size_t, double> topk;  // k -> hit rate (any true label in the top k)

  bool operator==(const ClassificationReport&) const = default;
};

/// Argmax (multiclass) or every relation with probability >= 0.5 (multilabel).
std::vector<std::size_t> predicted_labels(const std::vector<double>& probs, RelationMode mode);

/// truth[i] holds the true relation indices of sample i, probs[i] its
/// predicted distribution. Throws EmptySet / LengthMismatch.
ClassificationReport classification_metrics(const RelationVocabulary& vocab,
                                            std::span<const std::vector<std::size_t>> truth,
                                            std::span<const std::vector<double>> probs,
                                            const std::vector<std::size_t>& ks = {1, 2, 3});

ClassificationReport evaluate_srm(const MlpParams& model, const SampleSet& data,
                                  const std::vector<std::size_t>& ks = {1, 2, 3});

/// Result of grounding one expression, as written by the `ground` command.
struct GroundingRecord {
  std::string scene_id;
  std::size_t expression_index = 0;
  std::string target_label, relation, reference_label;
  /// "ok" or the error kind that stopped grounding.
  std::string status = "ok";
  std::string message;
  std::optional<Detection2D> target;
  std::optional<Detection2D> reference;
  double joint_score = 0.0;
  double relation_prob = 0.0;
  std::vector<PairScore> table;

  bool operator==(const GroundingRecord& o) const;
};

std::string record_to_json_line(const GroundingRecord& r);
GroundingRecord record_from_json_line(const std::string& line);
std::vector<GroundingRecord> parse_records(const std::string& jsonl);

/// Largest IoU of the prediction with the expression's target box or any of
/// its alternatives.
double best_target_iou(const BBox2D& predicted, const Expression& expr);

struct GroundingCase {
  Expression expr;                   // must carry gt_target_bbox
  std::optional<BBox2D> predicted;   // absent = grounding failed (IoU 0)
};

struct GroundingReport {
  std::size_t n = 0;
  std::size_t failed = 0;
  std::map<double, double> accuracy_at;  // IoU threshold -> accuracy
  double mean_iou = 0.0;

  double acc50() const { return accuracy_at.at(0.5); }
  bool operator==(const GroundingReport&) const = default;
};

GroundingReport grounding_metrics(std::span<const GroundingCase> cases,
                                  const std::vector<double>& thresholds = {0.3, 0.5, 0.7});

std::string to_json(const ClassificationReport& r);
std::string to_json(const GroundingReport& r);
ClassificationReport classification_report_from_json(const std::string& text);
GroundingReport grounding_report_from_json(const std::string& text);
std::string to_text(const ClassificationReport& r);
std::string to_text(const GroundingReport& r);

}  // namespace srg
