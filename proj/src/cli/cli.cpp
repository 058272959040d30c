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

#include "srg/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "srg/autolabel.hpp"
#include "srg/dataio.hpp"
#include "srg/error.hpp"
#include "srg/evalx.hpp"
#include "srg/geometry.hpp"
#include "srg/parallel.hpp"
#include "srg/ranking.hpp"
#include "srg/samples.hpp"
#include "srg/srm.hpp"
#include "srg/synthgen.hpp"

namespace srg {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

enum class Level { Error = 0, Warn = 1, Info = 2, Debug = 3 };

struct Globals {
  std::uint64_t seed = 0;
  int threads = 1;
  std::string log_level = "info";
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;

  Level level() const {
    if (log_level == "error") return Level::Error;
    if (log_level == "warn") return Level::Warn;
    if (log_level == "debug") return Level::Debug;
    return Level::Info;
  }
  void log(Level l, const std::string& msg) const {
    if (l <= level()) *err << msg << '\n';
  }
};

void require_writable(const fs::path& path, bool force) {
  if (force || !fs::exists(path)) return;
  if (fs::is_directory(path) && fs::is_empty(path)) return;
  throw Error(ErrorKind::Usage, path.string() + " already exists (pass --force to overwrite)");
}

/// Scenes of a dataset directory (with index.json) or a single manifest file.
std::vector<SceneManifest> load_scenes(const fs::path& p) {
  if (fs::is_directory(p)) return load_dataset(p);
  return {load_manifest(p)};
}

std::optional<EmbeddingTable> load_embeddings(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return EmbeddingTable::load(path);
}

Expression parse_expr(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto b = part.find_first_not_of(" \t");
    const auto e = part.find_last_not_of(" \t");
    parts.push_back(b == std::string::npos ? "" : part.substr(b, e - b + 1));
  }
  if (parts.size() != 3 || parts[0].empty() || parts[1].empty() || parts[2].empty()) {
    throw Error(ErrorKind::Usage, "--expr must be \"target,relation,reference\"");
  }
  Expression ex;
  ex.target_label = parts[0];
  ex.relation = canonical_relation(parts[1]);
  ex.reference_label = parts[2];
  return ex;
}

SampleSet samples_from(const std::string& data, FeatureSchema schema, const EmbeddingTable* emb,
                       const Globals& g) {
  if (fs::is_regular_file(data) && fs::path(data).extension() == ".jsonl") {
    SampleSet s = load_samples(data);
    require_schema(s, schema);
    return s;
  }
  SampleBuildConfig cfg;
  cfg.schema = schema;
  cfg.embeddings = emb;
  cfg.threads = g.threads;
  return build_samples(load_scenes(data), cfg);
}

json lifted_to_json(const LabeledObject& o, std::size_t n_points) {
  const auto& b = o.box;
  json R = json::array();
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) R.push_back(b.R(r, c));
  }
  return {{"label", o.label},
          {"score", o.score},
          {"bbox", {o.bbox.x, o.bbox.y, o.bbox.w, o.bbox.h}},
          {"T", {b.T.x(), b.T.y(), b.T.z()}},
          {"R", R},
          {"D", {b.D.x(), b.D.y(), b.D.z()}},
          {"degenerate", o.degenerate},
          {"n_points", n_points}};
}

// ---------------------------------------------------------------------------

struct GenOpts {
  std::size_t scenes = 0;
  std::string out;
  double noise = 0.0;
  std::string vocabulary = "avd";
  int min_objects = 4, max_objects = 10;
  bool force = false;
};

int cmd_gen_synthetic(const GenOpts& o, const Globals& g) {
  require_writable(o.out, o.force);
  SceneSpec spec;
  spec.seed = g.seed;
  spec.detector_noise = o.noise;
  spec.min_objects = o.min_objects;
  spec.max_objects = o.max_objects;
  if (o.vocabulary == "sa") spec.vocabulary = RelationVocabulary::semantic_abstraction();
  const auto summary = generate_benchmark(o.scenes, spec, o.out, g.threads);
  *g.out << "scenes: train " << summary.splits.at("train").size() << ", val "
         << summary.splits.at("val").size() << ", test " << summary.splits.at("test").size() << "\n";
  *g.out << "expressions: " << summary.expression_count << "\n";
  for (const auto& [rel, n] : summary.relation_counts) *g.out << "  " << rel << ": " << n << "\n";
  return 0;
}

struct AutolabelOpts {
  std::string data, out;
  RelationRuleConfig rules;
  bool force = false;
};

int cmd_autolabel(const AutolabelOpts& o, const Globals& g) {
  require_writable(o.out, o.force);
  const auto scenes = load_scenes(o.data);
  const BuildSummary s = build_dataset(scenes, o.rules, o.out, {}, g.threads);
  for (const auto& e : s.errors) g.log(Level::Warn, "skipped " + e);
  *g.out << "scenes: " << s.scenes_ok << " labelled, " << s.scenes_failed << " skipped\n";
  *g.out << "expressions: " << s.expression_count << "\n";
  for (const auto& [rel, n] : s.relation_counts) *g.out << "  " << rel << ": " << n << "\n";
  return 0;
}

struct LiftOpts {
  std::string scene, out, clouds, data, features = "geom3d", samples, embeddings;
  bool force = false;
};

int cmd_lift(const LiftOpts& o, const Globals& g) {
  if (!o.scene.empty() == !o.data.empty()) {
    throw Error(ErrorKind::Usage, "lift needs exactly one of --scene or --data");
  }
  if (!o.scene.empty()) {
    if (o.out.empty()) throw Error(ErrorKind::Usage, "--out is required with --scene");
    require_writable(o.out, o.force);
    const SceneManifest m = load_manifest(o.scene);
    const DepthImage depth = load_depth(m.resolve(m.depth_path), m.intrinsics.width, m.intrinsics.height);
    const auto objects = lift_scene_objects(m, depth);
    json arr = json::array();
    std::size_t i = 0;
    auto region_of = [&](std::size_t idx) -> std::pair<BBox2D, const BinaryMask*> {
      if (!m.objects.empty()) {
        const auto& obj = m.objects[idx];
        return {obj.bbox, obj.mask ? &*obj.mask : nullptr};
      }
      std::size_t k = 0;
      for (const auto& [q, list] : m.detections) {
        for (const auto& d : list) {
          if (k++ == idx) return {d.bbox, d.mask ? &*d.mask : nullptr};
        }
      }
      return {{}, nullptr};
    };
    for (const auto& obj : objects) {
      const auto [bbox, mask] = region_of(i);
      const PointCloud cloud = lift_cloud(depth, bbox, mask, m.intrinsics, DenoiseConfig{});
      arr.push_back(lifted_to_json(obj, cloud.size()));
      if (!o.clouds.empty()) {
        char name[64];
        std::snprintf(name, sizeof name, "%03zu_", i);
        write_point_cloud(cloud, fs::path(o.clouds) / (name + obj.label + ".xyz"));
      }
      ++i;
    }
    write_text_file(o.out, json{{"scene_id", m.scene_id}, {"objects", arr}}.dump(2) + "\n");
    *g.out << "lifted " << objects.size() << " objects\n";
    return 0;
  }
  if (o.samples.empty()) throw Error(ErrorKind::Usage, "--samples is required with --data");
  require_writable(o.samples, o.force);
  const auto emb = load_embeddings(o.embeddings);
  const SampleSet set = samples_from(o.data, feature_schema_from_string(o.features), emb ? &*emb : nullptr, g);
  save_samples(set, o.samples);
  *g.out << "samples: " << set.size() << " (" << to_string(set.schema) << ")\n";
  return 0;
}

struct TrainOpts {
  std::string data, val, features = "geom3d", out, embeddings, log;
  TrainConfig cfg;
  bool force = false;
};

int cmd_train_srm(TrainOpts o, const Globals& g) {
  require_writable(o.out, o.force);
  if (!o.log.empty()) require_writable(o.log, o.force);
  const FeatureSchema schema = feature_schema_from_string(o.features);
  const auto emb = load_embeddings(o.embeddings);
  const SampleSet train_set = samples_from(o.data, schema, emb ? &*emb : nullptr, g);
  std::optional<SampleSet> val_set;
  if (!o.val.empty()) val_set = samples_from(o.val, schema, emb ? &*emb : nullptr, g);
  g.log(Level::Info, "training on " + std::to_string(train_set.size()) + " samples (" + to_string(schema) + ")");
  o.cfg.seed = g.seed;
  const TrainResult res = train(o.cfg, train_set, val_set ? &*val_set : nullptr);
  json log = json::array();
  for (const auto& e : res.log) {
    std::ostringstream line;
    line << "epoch " << e.epoch << " lr " << e.lr << " loss " << e.train_loss << " acc " << e.train_accuracy;
    if (e.val_loss) line << " val_loss " << *e.val_loss << " val_acc " << *e.val_accuracy;
    g.log(Level::Info, line.str());
    json j = {{"epoch", e.epoch}, {"lr", e.lr}, {"train_loss", e.train_loss}, {"train_accuracy", e.train_accuracy}};
    if (e.val_loss) {
      j["val_loss"] = *e.val_loss;
      j["val_accuracy"] = *e.val_accuracy;
    }
    log.push_back(j);
  }
  save_model(res.params, o.out);
  if (!o.log.empty()) write_text_file(o.log, log.dump(2) + "\n");
  *g.out << "model: " << o.out << "\n";
  return 0;
}

struct EvalSrmOpts {
  std::string model, data, embeddings, report;
  bool force = false;
};

int cmd_eval_srm(const EvalSrmOpts& o, const Globals& g) {
  if (!o.report.empty()) require_writable(o.report, o.force);
  const MlpParams model = load_model(o.model);
  const auto emb = load_embeddings(o.embeddings);
  const SampleSet data = samples_from(o.data, model.schema, emb ? &*emb : nullptr, g);
  const ClassificationReport r = evaluate_srm(model, data);
  *g.out << to_text(r);
  if (!o.report.empty()) write_text_file(o.report, to_json(r));
  return 0;
}

struct GroundOpts {
  std::string scene, data, model, expr, out, embeddings, profile = "detic";
  std::size_t k = 0;
  bool explain = false, strict = false, detector_only = false, force = false;
};

GroundingRecord ground_one(const SceneManifest& m, const DepthImage& depth, const Expression& ex,
                           std::size_t index, const MlpParams* model, const GroundOptions& opts,
                           const EmbeddingTable* emb, bool detector_only) {
  GroundingRecord rec;
  rec.scene_id = m.scene_id;
  rec.expression_index = index;
  rec.target_label = ex.target_label;
  rec.relation = ex.relation;
  rec.reference_label = ex.reference_label;
  try {
    if (detector_only) {
      rec.target = ground_detector_only(m, ex, opts.ranking);
      rec.joint_score = rec.target->score;
    } else {
      GroundingResult res = ground(m, depth, ex, *model, opts, emb);
      rec.target = res.target;
      rec.reference = res.reference;
      rec.joint_score = res.joint_score;
      rec.relation_prob = res.relation_prob;
      rec.table = std::move(res.per_pair_table);
    }
    if (rec.target) rec.target->mask.reset();
    if (rec.reference) rec.reference->mask.reset();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::NoCandidates && e.kind() != ErrorKind::NoValidPairs) throw;
    rec.status = std::string(kind_name(e.kind()));
    rec.message = e.what();
  }
  return rec;
}

int cmd_ground(const GroundOpts& o, const Globals& g) {
  if (!o.scene.empty() == !o.data.empty()) {
    throw Error(ErrorKind::Usage, "ground needs exactly one of --scene or --data");
  }
  if (!o.detector_only && o.model.empty()) throw Error(ErrorKind::Usage, "--model is required");
  if (!o.out.empty()) require_writable(o.out, o.force);
  std::optional<MlpParams> model;
  if (!o.model.empty()) model = load_model(o.model);
  const auto emb = load_embeddings(o.embeddings);
  const auto scenes = o.scene.empty() ? load_scenes(o.data) : std::vector<SceneManifest>{load_manifest(o.scene)};
  std::optional<Expression> only;
  if (!o.expr.empty()) only = parse_expr(o.expr);

  GroundOptions opts;
  opts.ranking.profile = detector_profile_from_string(o.profile);
  opts.ranking.strict = o.strict;
  opts.explain = o.explain;

  std::vector<std::vector<GroundingRecord>> per_scene(scenes.size());
  parallel_for(scenes.size(), g.threads, [&](std::size_t s) {
    const SceneManifest& m = scenes[s];
    GroundOptions local = opts;
    local.ranking.k = o.k ? o.k : (m.vocabulary.mode() == RelationMode::Multilabel ? 10 : 3);
    const DepthImage depth = load_depth(m.resolve(m.depth_path), m.intrinsics.width, m.intrinsics.height);
    if (only) {
      per_scene[s].push_back(ground_one(m, depth, *only, 0, model ? &*model : nullptr, local,
                                        emb ? &*emb : nullptr, o.detector_only));
      return;
    }
    for (std::size_t i = 0; i < m.expressions.size(); ++i) {
      per_scene[s].push_back(ground_one(m, depth, m.expressions[i], i, model ? &*model : nullptr, local,
                                        emb ? &*emb : nullptr, o.detector_only));
    }
  });
  std::ostringstream lines;
  std::size_t n = 0, failed = 0;
  for (const auto& recs : per_scene) {
    for (const auto& r : recs) {
      lines << record_to_json_line(r) << '\n';
      ++n;
      failed += r.status != "ok";
    }
  }
  if (o.out.empty()) {
    *g.out << lines.str();
  } else {
    write_text_file(o.out, lines.str());
    *g.out << "grounded " << n << " expressions (" << failed << " without a result)\n";
  }
  return 0;
}

struct EvalGroundingOpts {
  std::string results, data, report;
  bool force = false;
};

int cmd_eval_grounding(const EvalGroundingOpts& o, const Globals& g) {
  if (!o.report.empty()) require_writable(o.report, o.force);
  const auto records = parse_records(read_text_file(o.results));
  std::map<std::pair<std::string, std::size_t>, const GroundingRecord*> by_key;
  for (const auto& r : records) by_key[{r.scene_id, r.expression_index}] = &r;
  std::vector<GroundingCase> cases;
  for (const auto& m : load_scenes(o.data)) {
    for (std::size_t i = 0; i < m.expressions.size(); ++i) {
      GroundingCase c;
      c.expr = m.expressions[i];
      auto it = by_key.find({m.scene_id, i});
      if (it != by_key.end() && it->second->status == "ok" && it->second->target) {
        c.predicted = it->second->target->bbox;
      }
      cases.push_back(std::move(c));
    }
  }
  const GroundingReport r = grounding_metrics(cases);
  *g.out << to_text(r);
  if (!o.report.empty()) write_text_file(o.report, to_json(r));
  return 0;
}

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse:
    case ErrorKind::Validation:
    case ErrorKind::SchemaMismatch:
    case ErrorKind::Usage:
    case ErrorKind::VersionMismatch:
    case ErrorKind::CorruptModel:
    case ErrorKind::LengthMismatch:
      return 1;
    default:
      return 2;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Globals g;
  g.out = &out;
  g.err = &err;

  CLI::App app{"Spatial relation grounding toolkit", "srg"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "TOML/INI file with option defaults; explicit flags win");
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--threads", g.threads, "Worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 256))
      ->capture_default_str();
  app.add_option("--log-level", g.log_level, "error|warn|info|debug")
      ->check(CLI::IsMember({"error", "warn", "info", "debug"}))
      ->capture_default_str();

  std::function<int()> action;

  GenOpts gen;
  auto* c_gen = app.add_subcommand("gen-synthetic", "Generate a synthetic train/val/test benchmark");
  c_gen->add_option("--scenes", gen.scenes, "Number of scenes (>= 10)")->required();
  c_gen->add_option("--out", gen.out, "Output directory")->required();
  c_gen->add_option("--noise", gen.noise, "Detector noise in [0,1]; 0 = perfect detections")
      ->check(CLI::Range(0.0, 1.0));
  c_gen->add_option("--vocabulary", gen.vocabulary, "avd (multilabel) or sa (multiclass)")
      ->check(CLI::IsMember({"avd", "sa"}));
  c_gen->add_option("--min-objects", gen.min_objects)->check(CLI::Range(2, 64));
  c_gen->add_option("--max-objects", gen.max_objects)->check(CLI::Range(2, 64));
  c_gen->add_flag("--force", gen.force, "Overwrite existing outputs");
  c_gen->callback([&] { action = [&] { return cmd_gen_synthetic(gen, g); }; });

  AutolabelOpts al;
  auto* c_al = app.add_subcommand("autolabel", "Generate relation expressions for scenes");
  c_al->add_option("--data", al.data, "Dataset directory or manifest")->required()->check(CLI::ExistingPath);
  c_al->add_option("--out", al.out, "Output dataset directory")->required();
  c_al->add_option("--margin", al.rules.margin_fraction, "Directional margin fraction");
  c_al->add_option("--max-distance", al.rules.max_pair_distance_m, "Largest pair distance (m)");
  c_al->add_option("--support-gap", al.rules.support_gap_m, "Largest gap for 'on' (m)");
  c_al->add_option("--containment", al.rules.containment_fraction, "Volume fraction for 'in'");
  c_al->add_flag("--force", al.force, "Overwrite existing outputs");
  c_al->callback([&] { action = [&] { return cmd_autolabel(al, g); }; });

  LiftOpts lift;
  auto* c_lift = app.add_subcommand("lift", "Lift scene objects to 3D boxes, or export classifier samples");
  c_lift->add_option("--scene", lift.scene, "Scene manifest")->check(CLI::ExistingFile);
  c_lift->add_option("--out", lift.out, "Lifted boxes (JSON), with --scene");
  c_lift->add_option("--dump-cloud", lift.clouds, "Directory for the denoised point clouds (x y z per line)");
  c_lift->add_option("--data", lift.data, "Dataset directory, for sample export")->check(CLI::ExistingPath);
  c_lift->add_option("--features", lift.features, "geom2d|geom2d+lng|geom3d|geom3d+lng");
  c_lift->add_option("--samples", lift.samples, "Samples file to write (JSON lines)");
  c_lift->add_option("--embeddings", lift.embeddings, "Word embedding table")->check(CLI::ExistingFile);
  c_lift->add_flag("--force", lift.force, "Overwrite existing outputs");
  c_lift->callback([&] { action = [&] { return cmd_lift(lift, g); }; });

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train-srm", "Train the relation classifier");
  c_tr->add_option("--data", tr.data, "Dataset directory or samples file (.jsonl)")->required()->check(CLI::ExistingPath);
  c_tr->add_option("--val", tr.val, "Validation dataset or samples file")->check(CLI::ExistingPath);
  c_tr->add_option("--features", tr.features, "geom2d|geom2d+lng|geom3d|geom3d+lng")->capture_default_str();
  c_tr->add_option("--embeddings", tr.embeddings, "Word embedding table")->check(CLI::ExistingFile);
  c_tr->add_option("--out", tr.out, "Model file")->required();
  c_tr->add_option("--log", tr.log, "Per-epoch log (JSON)");
  c_tr->add_option("--epochs", tr.cfg.epochs)->check(CLI::Range(1, 100000))->capture_default_str();
  c_tr->add_option("--lr", tr.cfg.lr)->capture_default_str();
  c_tr->add_option("--batch-size", tr.cfg.batch_size)->capture_default_str();
  c_tr->add_option("--decay-every", tr.cfg.decay_every)->capture_default_str();
  c_tr->add_option("--lr-decay", tr.cfg.lr_decay)->capture_default_str();
  c_tr->add_option("--hidden", tr.cfg.hidden, "Two hidden layer widths")->expected(2);
  c_tr->add_flag("--force", tr.force, "Overwrite existing outputs");
  c_tr->callback([&] { action = [&] { return cmd_train_srm(tr, g); }; });

  EvalSrmOpts es;
  auto* c_es = app.add_subcommand("eval-srm", "Evaluate a relation classifier");
  c_es->add_option("--model", es.model)->required()->check(CLI::ExistingFile);
  c_es->add_option("--data", es.data, "Dataset directory or samples file (.jsonl)")->required()->check(CLI::ExistingPath);
  c_es->add_option("--embeddings", es.embeddings)->check(CLI::ExistingFile);
  c_es->add_option("--report", es.report, "JSON report");
  c_es->add_flag("--force", es.force, "Overwrite existing outputs");
  c_es->callback([&] { action = [&] { return cmd_eval_srm(es, g); }; });

  GroundOpts gr;
  auto* c_gr = app.add_subcommand("ground", "Ground expressions in scenes");
  c_gr->add_option("--scene", gr.scene, "Scene manifest")->check(CLI::ExistingFile);
  c_gr->add_option("--data", gr.data, "Dataset directory")->check(CLI::ExistingPath);
  c_gr->add_option("--expr", gr.expr, "\"target,relation,reference\"; default: the scene's expressions");
  c_gr->add_option("--model", gr.model)->check(CLI::ExistingFile);
  c_gr->add_option("--embeddings", gr.embeddings)->check(CLI::ExistingFile);
  c_gr->add_option("--out", gr.out, "Result records (JSON lines); default stdout");
  c_gr->add_option("--detector-profile", gr.profile, "detic or gdino score thresholds")
      ->check(CLI::IsMember({"detic", "gdino"}));
  c_gr->add_option("--k", gr.k, "Candidates per role (default 10 multilabel, 3 multiclass)");
  c_gr->add_flag("--explain", gr.explain, "Include the scored pair table");
  c_gr->add_flag("--strict", gr.strict, "Exclude pairs whose 3D lift failed");
  c_gr->add_flag("--detector-only", gr.detector_only, "Pick the top-scoring target detection");
  c_gr->add_flag("--force", gr.force, "Overwrite existing outputs");
  c_gr->callback([&] { action = [&] { return cmd_ground(gr, g); }; });

  EvalGroundingOpts eg;
  auto* c_eg = app.add_subcommand("eval-grounding", "Score grounding results against a dataset");
  c_eg->add_option("--results", eg.results, "Records from `ground`")->required()->check(CLI::ExistingFile);
  c_eg->add_option("--data", eg.data, "Dataset directory or manifest")->required()->check(CLI::ExistingPath);
  c_eg->add_option("--report", eg.report, "JSON report");
  c_eg->add_flag("--force", eg.force, "Overwrite existing outputs");
  c_eg->callback([&] { action = [&] { return cmd_eval_grounding(eg, g); }; });

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }
  try {
    return action ? action() : 1;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace srg
