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

// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <Eigen/Geometry>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

#include "../oracles/oracles.hpp"
#include "../test_util.hpp"
#include "srg/autolabel.hpp"
#include "srg/cli.hpp"
#include "srg/dataio.hpp"
#include "srg/evalx.hpp"
#include "srg/geometry.hpp"
#include "srg/ranking.hpp"
#include "srg/samples.hpp"
#include "srg/srm.hpp"
#include "srg/synthgen.hpp"

using namespace srg;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Tolerances and budgets.
constexpr double kGradRelTol = 1e-4;
constexpr double kGradBudgetS = 10.0;
constexpr double kPcaTol = 1e-6;
constexpr double kPcaBudgetS = 5.0;
constexpr double kRoundtripTol = 1e-9;
constexpr double kTop1Min = 95.0;
constexpr double kDepthGapMin = 20.0;
constexpr double kBenchmarkBudgetS = 300.0;
constexpr double kPipelineGainMin = 5.0;
constexpr double kPipelineBudgetS = 120.0;
constexpr double kMetricTol = 1e-9;

constexpr std::uint64_t kBenchmarkSeed = 7;
constexpr std::uint64_t kTrainSeed = 1;
constexpr std::size_t kBenchmarkScenes = 500;
constexpr double kPipelineNoise = 0.5;

// --- gradients ---------------------------------------------------------------

Outcome gradient_check() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::size_t checked = 0;
  for (std::uint64_t seed : {0, 1, 2}) {
    for (const auto& vocab : {RelationVocabulary::semantic_abstraction(), RelationVocabulary::avd()}) {
      const MlpParams p = init_mlp(FeatureSchema::Geom3D, 0, {64, 32}, vocab, seed);
      std::mt19937_64 rng(seed + 100);
      std::normal_distribution<double> n(0.0, 1.0);
      std::vector<Sample> batch(4);
      for (auto& s : batch) {
        s.x.values.resize(30);
        for (auto& v : s.x.values) v = n(rng);
        s.labels = {rng() % 6};
        if (vocab.mode() == RelationMode::Multilabel) s.labels.push_back((s.labels[0] + 1 + rng() % 5) % 6);
        std::sort(s.labels.begin(), s.labels.end());
      }
      const LossAndGrad lg = loss_and_grad(p, batch);
      for (std::size_t l = 0; l < kMlpLayers; ++l) {
        for (bool bias : {false, true}) {
          const auto& g = bias ? lg.grads[l].bias : lg.grads[l].weights;
          for (std::size_t i = 0; i < g.size(); ++i) {
            const double fd = oracle::fd_grad(p, batch, l, bias, i, 1e-6);
            const double rel = std::abs(g[i] - fd) / std::max({std::abs(g[i]), std::abs(fd), 1e-6});
            worst = std::max(worst, rel);
            ++checked;
          }
        }
      }
    }
  }
  const double t = seconds_since(t0);
  return {worst <= kGradRelTol && t < kGradBudgetS,
          fmt("%zu parameters, max rel err %.2e (tol %.0e), %.2fs (limit %.0fs)", checked, worst, kGradRelTol, t,
              kGradBudgetS)};
}

// --- PCA ---------------------------------------------------------------------

Outcome pca_recovery() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(11);
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<Eigen::Vector3d> lattice;
  for (int i = 0; i <= 10; ++i) {
    for (int j = 0; j <= 10; ++j) {
      for (int k = 0; k <= 10; ++k) lattice.emplace_back(i / 10.0 - 0.5, j / 10.0 - 0.5, k / 10.0 - 0.5);
    }
  }
  double worst_extent = 0.0, worst_axis = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::Quaterniond q = Eigen::Quaterniond(n(rng), n(rng), n(rng), n(rng)).normalized();
    const Eigen::Matrix3d R = q.toRotationMatrix();
    const Eigen::Vector3d T(n(rng), n(rng), 3 + n(rng));
    PointCloud cloud;
    for (const auto& p : lattice) cloud.points.push_back(R * p + T);
    const OrientedBox3D box = pca_fit_box(cloud);
    for (int a = 0; a < 3; ++a) worst_extent = std::max(worst_extent, std::abs(box.D[a] - 1.0));
    // R_fit^T R must be a signed permutation matrix.
    const Eigen::Matrix3d M = (box.R.transpose() * R).cwiseAbs();
    for (int r = 0; r < 3; ++r) {
      Eigen::Index c;
      M.row(r).maxCoeff(&c);
      for (int k = 0; k < 3; ++k) worst_axis = std::max(worst_axis, std::abs(M(r, k) - (k == c ? 1.0 : 0.0)));
    }
    worst_axis = std::max(worst_axis, (M.colwise().sum().array() - 1.0).abs().maxCoeff());
  }
  const double t = seconds_since(t0);
  return {worst_extent <= kPcaTol && worst_axis <= kPcaTol && t < kPcaBudgetS,
          fmt("100 rotations, max extent err %.2e, max axis err %.2e (tol %.0e), %.2fs (limit %.0fs)", worst_extent,
              worst_axis, kPcaTol, t, kPcaBudgetS)};
}

// --- backprojection ------------------------------------------------------------

Outcome backprojection_roundtrip() {
  std::mt19937_64 rng(5);
  const CameraIntrinsics cam{525.0, 520.0, 319.5, 239.5, 640, 480};
  std::uniform_real_distribution<double> u(0, 640), v(0, 480), d(0.3, 10.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const double pu = u(rng), pv = v(rng), pd = d(rng);
    const Eigen::Vector3d p = backproject_pixel(pu, pv, pd, cam);
    const Eigen::Vector2d q = project(p, cam);
    worst = std::max({worst, std::abs(q.x() - pu), std::abs(q.y() - pv), std::abs(p.z() - pd)});
  }
  return {worst <= kRoundtripTol, fmt("1000 pixels, max err %.2e (tol %.0e)", worst, kRoundtripTol)};
}

// --- ranking -------------------------------------------------------------------

struct Table {
  std::vector<Candidate> t, r;
  std::vector<std::vector<double>> prob;
  std::vector<std::vector<bool>> same;
};

Table random_table(std::mt19937_64& rng, std::size_t nt, std::size_t nr, bool coarse) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto val = [&] { return coarse ? (1 + rng() % 4) / 4.0 : 0.01 + u(rng); };
  auto cand = [&](const char* label) {
    Candidate c;
    c.detection = {label, val(), {static_cast<double>(rng() % 5), static_cast<double>(rng() % 5), 2, 2}, {}};
    c.lift.degenerate = rng() % 5 == 0;
    return c;
  };
  Table tab;
  for (std::size_t i = 0; i < nt; ++i) tab.t.push_back(cand("a"));
  for (std::size_t j = 0; j < nr; ++j) tab.r.push_back(cand(rng() % 3 ? "b" : "a"));
  tab.prob.assign(nt, std::vector<double>(nr));
  tab.same.assign(nt, std::vector<bool>(nr));
  for (std::size_t i = 0; i < nt; ++i) {
    for (std::size_t j = 0; j < nr; ++j) {
      tab.prob[i][j] = std::min(1.0, val());
      tab.same[i][j] = tab.t[i].detection.label == tab.r[j].detection.label &&
                       tab.t[i].detection.bbox == tab.r[j].detection.bbox;
    }
  }
  return tab;
}

std::pair<int, int> rank(const Table& tab, const RankingConfig& cfg) {
  auto index_of = [](const std::vector<Candidate>& v, const Candidate& c) {
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (&v[i] == &c) return i;
    }
    return v.size();
  };
  const RelationScorer scorer = [&](const Candidate& a, const Candidate& b) {
    return tab.prob[index_of(tab.t, a)][index_of(tab.r, b)];
  };
  try {
    const GroundingResult res = rank_pairs(tab.t, tab.r, scorer, cfg, true);
    for (const auto& p : res.per_pair_table) {
      if (!p.excluded && p.joint == res.joint_score && tab.t[p.target_index].detection == res.target &&
          tab.r[p.reference_index].detection == res.reference) {
        return {static_cast<int>(p.target_index), static_cast<int>(p.reference_index)};
      }
    }
    return {-2, -2};
  } catch (const Error& e) {
    return {e.kind() == ErrorKind::NoValidPairs ? -1 : -3, -1};
  }
}

std::vector<oracle::Cand> oracle_cands(const std::vector<Candidate>& v) {
  std::vector<oracle::Cand> out;
  for (const auto& c : v) out.push_back({c.detection.score, c.detection.bbox, c.lift.degenerate});
  return out;
}

Outcome ranking_equivalence() {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> scale(0.05, 20.0);
  std::size_t tables = 0, mismatches = 0, scaling_changes = 0;
  for (std::size_t nt = 1; nt <= 10; ++nt) {
    for (std::size_t nr = 1; nr <= 10; ++nr) {
      for (int rep = 0; rep < 2; ++rep) {
        const Table tab = random_table(rng, nt, nr, rep == 0);
        for (bool strict : {false, true}) {
          RankingConfig cfg;
          cfg.strict = strict;
          const auto want = oracle::brute_rank(oracle_cands(tab.t), oracle_cands(tab.r), tab.prob,
                                               cfg.degenerate_penalty, strict, tab.same);
          if (rank(tab, cfg) != want) ++mismatches;
        }
        ++tables;
        if (rep == 1) {
          Table scaled = tab;
          const double a = scale(rng), b = scale(rng);
          for (auto& c : scaled.t) c.detection.score *= a;
          for (auto& c : scaled.r) c.detection.score *= b;
          // the self-pair mask follows identity, not the scaled scores
          if (rank(scaled, RankingConfig{}) != rank(tab, RankingConfig{})) ++scaling_changes;
        }
      }
    }
  }
  return {mismatches == 0 && scaling_changes == 0 && tables >= 100,
          fmt("%zu tables over all grids 1x1..10x10, %zu brute-force mismatches, %zu argmax changes under scaling",
              tables, mismatches, scaling_changes)};
}

// --- synthetic benchmark ----------------------------------------------------------

struct Bench {
  fs::path dir;
  std::vector<SceneManifest> train, val, test;
};

Bench make_bench(const fs::path& dir, double noise) {
  SceneSpec spec;
  spec.seed = kBenchmarkSeed;
  spec.detector_noise = noise;
  generate_benchmark(kBenchmarkScenes, spec, dir, 1);
  return {dir, load_dataset(dir / "train"), load_dataset(dir / "val"), load_dataset(dir / "test")};
}

MlpParams train_on(const std::vector<SceneManifest>& scenes, FeatureSchema schema) {
  SampleBuildConfig sc;
  sc.schema = schema;
  TrainConfig tc;
  tc.seed = kTrainSeed;
  return train(tc, build_samples(scenes, sc)).params;
}

ClassificationReport eval_on(const MlpParams& model, const std::vector<SceneManifest>& scenes) {
  SampleBuildConfig sc;
  sc.schema = model.schema;
  return evaluate_srm(model, build_samples(scenes, sc));
}

double f1_of(const ClassificationReport& r, const std::string& rel) {
  for (const auto& s : r.per_relation) {
    if (s.relation == rel) return s.f1;
  }
  return 0.0;
}

Outcome synthetic_benchmark(const Bench& b, double gen_seconds) {
  const auto t0 = Clock::now();
  const ClassificationReport r3 = eval_on(train_on(b.train, FeatureSchema::Geom3D), b.test);
  const ClassificationReport r2 = eval_on(train_on(b.train, FeatureSchema::Geom2D), b.test);
  const double t = gen_seconds + seconds_since(t0);
  const double top1 = r3.topk.at(1);
  const double gap_behind = f1_of(r3, "behind") - f1_of(r2, "behind");
  const double gap_front = f1_of(r3, "in front of") - f1_of(r2, "in front of");
  return {top1 >= kTop1Min && gap_behind >= kDepthGapMin && gap_front >= kDepthGapMin && t < kBenchmarkBudgetS,
          fmt("GEOM3D top-1 %.2f%% (min %.0f); F1 gap behind %.2f, in front of %.2f (min %.0f); %.1fs (limit %.0fs)",
              top1, kTop1Min, gap_behind, gap_front, kDepthGapMin, t, kBenchmarkBudgetS)};
}

Outcome pipeline_gain(const Bench& b, double gen_seconds) {
  const auto t0 = Clock::now();
  const MlpParams model = train_on(b.train, FeatureSchema::Geom3D);
  std::vector<GroundingCase> pipeline, baseline;
  GroundOptions opts;
  opts.ranking = RankingConfig::avd();
  for (const auto& m : b.test) {
    const DepthImage depth = load_depth(m.resolve(m.depth_path), m.intrinsics.width, m.intrinsics.height);
    for (const auto& e : m.expressions) {
      GroundingCase p{e, std::nullopt}, d{e, std::nullopt};
      try {
        p.predicted = ground(m, depth, e, model, opts).target.bbox;
      } catch (const Error&) {
      }
      try {
        d.predicted = ground_detector_only(m, e, opts.ranking).bbox;
      } catch (const Error&) {
      }
      pipeline.push_back(std::move(p));
      baseline.push_back(std::move(d));
    }
  }
  const double ours = grounding_metrics(pipeline).acc50();
  const double base = grounding_metrics(baseline).acc50();
  const double t = gen_seconds + seconds_since(t0);
  return {ours - base >= kPipelineGainMin && t < kPipelineBudgetS,
          fmt("noise %.1f, %zu expressions: acc@0.5 %.2f vs detector-only %.2f, gain %.2f (min %.0f); %.1fs (limit %.0fs)",
              kPipelineNoise, pipeline.size(), ours, base, ours - base, kPipelineGainMin, t, kPipelineBudgetS)};
}

Outcome autolabel_consistency(const Bench& b) {
  const RelationRuleConfig rules;
  std::size_t total = 0, valid = 0;
  std::map<std::string, std::size_t> counts;
  for (const auto* split : {&b.train, &b.val, &b.test}) {
    for (const auto& m : *split) {
      const DepthImage depth = load_depth(m.resolve(m.depth_path), m.intrinsics.width, m.intrinsics.height);
      const auto objs = lift_scene_objects(m, depth);
      for (const auto& e : m.expressions) {
        ++total;
        ++counts[e.relation];
        bool ok = false;
        for (const auto& t : objs) {
          for (const auto& r : objs) {
            if (&t == &r || t.label != e.target_label || r.label != e.reference_label) continue;
            if (!(t.bbox == *e.gt_target_bbox && r.bbox == *e.gt_reference_bbox)) continue;
            const auto rels = relation_oracle(t.box, r.box, rules, m.vocabulary);
            ok |= std::find(rels.begin(), rels.end(), e.relation) != rels.end();
          }
        }
        valid += ok;
      }
    }
  }
  const bool sym = counts["left"] == counts["right"] && counts["above"] == counts["below"];
  return {total > 0 && valid == total && sym,
          fmt("%zu/%zu expressions re-validate; left %zu right %zu, above %zu below %zu", valid, total, counts["left"],
              counts["right"], counts["above"], counts["below"])};
}

// --- CLI determinism ----------------------------------------------------------------

std::map<std::string, std::string> snapshot(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_text_file(e.path());
  }
  return files;
}

Outcome cli_determinism(const fs::path& dir) {
  std::vector<std::string> failures;
  std::size_t files = 0;
  std::map<std::string, std::string> stdout_of[2];
  for (int rep = 0; rep < 2; ++rep) {
    const std::string d = (dir / ("run" + std::to_string(rep))).string();
    const std::vector<std::pair<std::string, std::vector<std::string>>> steps = {
        {"gen-synthetic", {"--seed", "5", "gen-synthetic", "--scenes", "20", "--out", d + "/bench", "--noise", "0.5"}},
        {"autolabel", {"autolabel", "--data", d + "/bench/train", "--out", d + "/relabel"}},
        {"lift --scene", {"lift", "--scene", d + "/bench/test/scene_00018.json", "--out", d + "/lift.json",
                          "--dump-cloud", d + "/clouds"}},
        {"lift --data", {"lift", "--data", d + "/bench/train", "--features", "geom3d+lng", "--embeddings",
                         testutil::fixture("embeddings_50d.txt").string(), "--samples", d + "/train.jsonl"}},
        {"train-srm", {"--seed", "3", "train-srm", "--data", d + "/bench/train", "--val", d + "/bench/val", "--out",
                       d + "/m.bin", "--log", d + "/log.json"}},
        {"eval-srm", {"eval-srm", "--model", d + "/m.bin", "--data", d + "/bench/test", "--report", d + "/srm.json"}},
        {"ground", {"ground", "--data", d + "/bench/test", "--model", d + "/m.bin", "--explain", "--out",
                    d + "/g.jsonl"}},
        {"ground --detector-only", {"ground", "--data", d + "/bench/test", "--detector-only", "--out", d + "/d.jsonl"}},
        {"eval-grounding", {"eval-grounding", "--results", d + "/g.jsonl", "--data", d + "/bench/test", "--report",
                            d + "/g.json"}},
    };
    for (const auto& [name, args] : steps) {
      std::ostringstream out, err;
      if (run_cli(args, out, err) != 0) failures.push_back(name + " exited non-zero: " + err.str());
      stdout_of[rep][name] = out.str();
    }
  }
  const auto a = snapshot(dir / "run0"), b = snapshot(dir / "run1");
  files = a.size();
  if (a.size() != b.size()) failures.push_back("different file sets");
  for (const auto& [name, bytes] : a) {
    const auto it = b.find(name);
    if (it == b.end() || it->second != bytes) failures.push_back(name + " differs");
  }
  for (const auto& [name, text] : stdout_of[0]) {
    // stdout names the run directory; compare with it masked
    auto mask = [&](std::string s, int rep) {
      const std::string d = (dir / ("run" + std::to_string(rep))).string();
      for (std::size_t p; (p = s.find(d)) != std::string::npos;) s.replace(p, d.size(), "<dir>");
      return s;
    };
    if (mask(text, 0) != mask(stdout_of[1][name], 1)) failures.push_back(name + " stdout differs");
  }
  return {failures.empty() && files > 0,
          fmt("9 commands x 2 runs, %zu files compared%s%s", files, failures.empty() ? "" : "; first failure: ",
              failures.empty() ? "" : failures.front().c_str())};
}

// --- metrics ------------------------------------------------------------------------

Outcome metric_identities() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(0, 1);
  const auto vocab = RelationVocabulary::semantic_abstraction();
  double worst_micro = 0.0, worst_macro = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + rng() % 200;
    std::vector<std::vector<std::size_t>> truth;
    std::vector<std::vector<double>> probs;
    for (std::size_t i = 0; i < n; ++i) {
      truth.push_back({rng() % 6});
      std::vector<double> p(6);
      for (auto& x : p) x = u(rng);
      probs.push_back(p);
    }
    const auto r = classification_metrics(vocab, truth, probs);
    worst_micro = std::max(worst_micro, std::abs(r.micro_f1 - r.accuracy));
    double mean = 0;
    for (const auto& s : r.per_relation) mean += s.f1;
    worst_macro = std::max(worst_macro, std::abs(r.macro_f1 - mean / 6));
  }
  return {worst_micro <= kMetricTol && worst_macro <= kMetricTol,
          fmt("1000 sets, |microF1 - acc| max %.2e, |macroF1 - mean F1| max %.2e (tol %.0e)", worst_micro, worst_macro,
              kMetricTol)};
}

}  // namespace

int main() {
  int failed = 0;
  auto report = [&](const char* name, const std::function<Outcome()>& fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  };

  report("gradient-check", gradient_check);
  report("pca-cube-recovery", pca_recovery);
  report("backprojection-roundtrip", backprojection_roundtrip);
  report("ranking-brute-force", ranking_equivalence);

  testutil::TempDir dir("acceptance");
  std::optional<Bench> clean, noisy;
  double clean_s = 0.0, noisy_s = 0.0;
  try {
    auto t0 = Clock::now();
    clean = make_bench(dir / "clean", 0.0);
    clean_s = seconds_since(t0);
    t0 = Clock::now();
    noisy = make_bench(dir / "noisy", kPipelineNoise);
    noisy_s = seconds_since(t0);
  } catch (const std::exception& e) {
    std::printf("benchmark generation failed: %s\n", e.what());
  }
  auto need = [](const std::optional<Bench>& b) {
    if (!b) throw std::runtime_error("benchmark unavailable");
    return *b;
  };
  report("synthetic-benchmark", [&] { return synthetic_benchmark(need(clean), clean_s); });
  report("pipeline-over-detector-only", [&] { return pipeline_gain(need(noisy), noisy_s); });
  report("autolabel-consistency", [&] { return autolabel_consistency(need(clean)); });
  report("cli-determinism", [&] { return cli_determinism(dir / "cli"); });
  report("metric-identities", metric_identities);
  return failed == 0 ? 0 : 1;
}
