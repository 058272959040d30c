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

#include "srg/dataio.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "srg/error.hpp"

namespace srg {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Value-type members

void CameraIntrinsics::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Validation, "intrinsics." + m); };
  if (!(std::isfinite(fx) && fx > 0)) fail("fx must be > 0");
  if (!(std::isfinite(fy) && fy > 0)) fail("fy must be > 0");
  if (width <= 0) fail("width must be > 0");
  if (height <= 0) fail("height must be > 0");
  if (!(cx >= 0 && cx < width)) fail("cx must lie in [0, width)");
  if (!(cy >= 0 && cy < height)) fail("cy must lie in [0, height)");
}

BinaryMask BinaryMask::encode(int width, int height, const std::vector<std::uint8_t>& dense) {
  if (width < 0 || height < 0 ||
      dense.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw Error(ErrorKind::DimensionMismatch, "mask grid does not match width*height");
  }
  BinaryMask mask;
  mask.width = width;
  mask.height = height;
  bool current = false;
  std::uint32_t count = 0;
  for (int u = 0; u < width; ++u) {
    for (int v = 0; v < height; ++v) {
      const bool fg = dense[static_cast<std::size_t>(v) * width + u] != 0;
      if (fg != current) {
        mask.runs.push_back(count);
        count = 0;
        current = fg;
      }
      ++count;
    }
  }
  mask.runs.push_back(count);
  return mask;
}

BinaryMask BinaryMask::from_pixels(int width, int height, const std::vector<Pixel>& pixels) {
  std::vector<std::uint8_t> dense(static_cast<std::size_t>(width) * height, 0);
  for (const Pixel& p : pixels) {
    if (p.u < 0 || p.u >= width || p.v < 0 || p.v >= height) {
      throw Error(ErrorKind::Validation, "mask pixel outside the image");
    }
    dense[static_cast<std::size_t>(p.v) * width + p.u] = 1;
  }
  return encode(width, height, dense);
}

std::vector<std::uint8_t> BinaryMask::dense() const {
  std::vector<std::uint8_t> out(static_cast<std::size_t>(width) * height, 0);
  for (const Pixel& p : decode_mask(*this)) out[static_cast<std::size_t>(p.v) * width + p.u] = 1;
  return out;
}

std::size_t BinaryMask::foreground_count() const {
  std::size_t n = 0;
  for (std::size_t i = 1; i < runs.size(); i += 2) n += runs[i];
  return n;
}

void BinaryMask::validate() const {
  if (width < 0 || height < 0) throw Error(ErrorKind::Validation, "mask.size must be non-negative");
  std::uint64_t total = 0;
  for (auto r : runs) total += r;
  if (total != static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height)) {
    throw Error(ErrorKind::Validation, "mask.runs must sum to width*height");
  }
}

std::vector<Pixel> decode_mask(const BinaryMask& mask) {
  std::vector<Pixel> out;
  out.reserve(mask.foreground_count());
  std::size_t pos = 0;
  const auto h = static_cast<std::size_t>(mask.height);
  for (std::size_t i = 0; i < mask.runs.size(); ++i) {
    const std::size_t n = mask.runs[i];
    if (i % 2 == 1) {
      for (std::size_t k = pos; k < pos + n; ++k) {
        out.push_back({static_cast<int>(k / h), static_cast<int>(k % h)});
      }
    }
    pos += n;
  }
  return out;
}

BBox2D BBox2D::clamped(int width, int height) const {
  const double x0 = std::clamp(x, 0.0, static_cast<double>(width));
  const double y0 = std::clamp(y, 0.0, static_cast<double>(height));
  const double x1 = std::clamp(x + w, 0.0, static_cast<double>(width));
  const double y1 = std::clamp(y + h, 0.0, static_cast<double>(height));
  return {x0, y0, std::max(0.0, x1 - x0), std::max(0.0, y1 - y0)};
}

double OrientedBox3D::aabb_half_extent(int axis) const {
  return 0.5 * (std::abs(R(axis, 0)) * D(0) + std::abs(R(axis, 1)) * D(1) +
                std::abs(R(axis, 2)) * D(2));
}

RelationVocabulary::RelationVocabulary(std::vector<std::string> names, RelationMode mode)
    : mode_(mode) {
  if (names.empty()) throw Error(ErrorKind::Validation, "vocabulary.names must be non-empty");
  std::set<std::string> seen;
  for (auto& n : names) {
    n = canonical_relation(n);
    if (!seen.insert(n).second) {
      throw Error(ErrorKind::Validation, "vocabulary.names contains duplicate '" + n + "'");
    }
  }
  names_ = std::move(names);
}

RelationVocabulary RelationVocabulary::avd() {
  return {{"right", "left", "above", "below", "behind", "in front of"}, RelationMode::Multilabel};
}

RelationVocabulary RelationVocabulary::semantic_abstraction() {
  return {{"on", "in", "left", "right", "behind", "in front of"}, RelationMode::Multiclass};
}

std::optional<std::size_t> RelationVocabulary::index_of(const std::string& relation) const {
  const std::string key = canonical_relation(relation);
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == key) return i;
  }
  return std::nullopt;
}

std::string canonical_relation(const std::string& phrase) {
  std::string s;
  bool space = false;
  for (char c : phrase) {
    if (c == '_' || c == '-' || std::isspace(static_cast<unsigned char>(c))) {
      space = true;
      continue;
    }
    if (space && !s.empty()) s.push_back(' ');
    space = false;
    s.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  static const std::map<std::string, std::string> aliases = {
      {"left of", "left"},          {"to the left of", "left"},   {"on the left of", "left"},
      {"to the left", "left"},      {"right of", "right"},        {"to the right of", "right"},
      {"on the right of", "right"}, {"to the right", "right"},    {"front", "in front of"},
      {"in front", "in front of"},  {"front of", "in front of"},  {"over", "above"},
      {"under", "below"},           {"beneath", "below"},         {"underneath", "below"},
      {"on top of", "on"},          {"inside", "in"},             {"inside of", "in"},
      {"behind of", "behind"},      {"back of", "behind"},
  };
  if (auto it = aliases.find(s); it != aliases.end()) return it->second;
  return s;
}

std::string to_string(RelationMode mode) {
  return mode == RelationMode::Multiclass ? "multiclass" : "multilabel";
}

RelationMode relation_mode_from_string(const std::string& s) {
  if (s == "multiclass") return RelationMode::Multiclass;
  if (s == "multilabel") return RelationMode::Multilabel;
  throw Error(ErrorKind::Validation, "vocabulary.mode must be multiclass or multilabel, got '" +
                                         s + "'");
}

std::string SceneManifest::resolve(const std::string& path) const {
  const fs::path p(path);
  if (p.is_absolute() || base_dir.empty()) return p.string();
  return (fs::path(base_dir) / p).string();
}

void SceneManifest::validate() const {
  intrinsics.validate();
  auto check_box = [](const BBox2D& b, const std::string& where) {
    if (!(std::isfinite(b.x) && std::isfinite(b.y) && std::isfinite(b.w) && std::isfinite(b.h))) {
      throw Error(ErrorKind::Validation, where + " must be finite");
    }
    if (b.w < 0 || b.h < 0) throw Error(ErrorKind::Validation, where + " has negative extent");
  };
  auto check_mask = [&](const BinaryMask& m, const std::string& where) {
    try {
      m.validate();
    } catch (const Error& e) {
      throw Error(ErrorKind::Validation, where + ": " + e.what());
    }
    if (m.width != intrinsics.width || m.height != intrinsics.height) {
      throw Error(ErrorKind::Validation, where + ".size must match the image size");
    }
  };
  for (const auto& [query, list] : detections) {
    for (std::size_t i = 0; i < list.size(); ++i) {
      const Detection2D& d = list[i];
      const std::string where = "detections." + query + "[" + std::to_string(i) + "]";
      if (!(d.score >= 0.0 && d.score <= 1.0)) {
        throw Error(ErrorKind::Validation, where + ".score must lie in [0,1]");
      }
      check_box(d.bbox, where + ".bbox");
      if (d.mask) check_mask(*d.mask, where + ".mask");
    }
  }
  for (std::size_t i = 0; i < expressions.size(); ++i) {
    const Expression& e = expressions[i];
    const std::string where = "expressions[" + std::to_string(i) + "]";
    if (!vocabulary.contains(e.relation)) {
      throw Error(ErrorKind::Validation,
                  where + ".relation '" + e.relation + "' is not in the vocabulary");
    }
    if (!detections.contains(e.target_label)) {
      throw Error(ErrorKind::Validation,
                  where + ".target '" + e.target_label + "' has no detections entry");
    }
    if (!detections.contains(e.reference_label)) {
      throw Error(ErrorKind::Validation,
                  where + ".reference '" + e.reference_label + "' has no detections entry");
    }
    if (e.gt_target_bbox) check_box(*e.gt_target_bbox, where + ".gt_target_bbox");
    if (e.gt_reference_bbox) check_box(*e.gt_reference_bbox, where + ".gt_reference_bbox");
  }
  for (std::size_t i = 0; i < objects.size(); ++i) {
    const std::string where = "objects[" + std::to_string(i) + "]";
    check_box(objects[i].bbox, where + ".bbox");
    if (objects[i].mask) check_mask(*objects[i].mask, where + ".mask");
  }
}

// ---------------------------------------------------------------------------
// JSON mapping

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorKind::Parse, what); }

const json& field(const json& j, const char* key, const std::string& where) {
  if (!j.is_object()) parse_fail(where + " must be an object");
  auto it = j.find(key);
  if (it == j.end()) parse_fail(where + "." + key + " is missing");
  return *it;
}

double get_number(const json& j, const std::string& where) {
  if (!j.is_number()) parse_fail(where + " must be a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) parse_fail(where + " must be an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& where) {
  if (!j.is_string()) parse_fail(where + " must be a string");
  return j.get<std::string>();
}

json box_to_json(const BBox2D& b) { return json::array({b.x, b.y, b.w, b.h}); }

BBox2D box_from_json(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 4) parse_fail(where + " must be [x,y,w,h]");
  return {get_number(j[0], where), get_number(j[1], where), get_number(j[2], where),
          get_number(j[3], where)};
}

json mask_to_json(const BinaryMask& m) {
  return json{{"size", json::array({m.height, m.width})}, {"runs", m.runs}};
}

BinaryMask mask_from_json(const json& j, const std::string& where) {
  const json& size = field(j, "size", where);
  if (!size.is_array() || size.size() != 2) parse_fail(where + ".size must be [h,w]");
  BinaryMask m;
  m.height = get_int(size[0], where + ".size");
  m.width = get_int(size[1], where + ".size");
  const json& runs = field(j, "runs", where);
  if (!runs.is_array()) parse_fail(where + ".runs must be an array");
  for (const auto& r : runs) {
    if (!r.is_number_unsigned() && !(r.is_number_integer() && r.get<long long>() >= 0)) {
      parse_fail(where + ".runs must hold non-negative integers");
    }
    m.runs.push_back(r.get<std::uint32_t>());
  }
  return m;
}

json vocab_to_json(const RelationVocabulary& v) {
  return json{{"names", v.names()}, {"mode", to_string(v.mode())}};
}

RelationVocabulary vocab_from_json(const json& j) {
  const json& names = field(j, "names", "vocabulary");
  if (!names.is_array()) parse_fail("vocabulary.names must be an array");
  std::vector<std::string> out;
  for (const auto& n : names) out.push_back(get_string(n, "vocabulary.names"));
  return {out, relation_mode_from_string(get_string(field(j, "mode", "vocabulary"),
                                                    "vocabulary.mode"))};
}

json box3d_to_json(const OrientedBox3D& b) {
  json R = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) R.push_back(b.R(r, c));
  return json{{"T", {b.T.x(), b.T.y(), b.T.z()}}, {"R", R}, {"D", {b.D.x(), b.D.y(), b.D.z()}}};
}

OrientedBox3D box3d_from_json(const json& j, const std::string& where) {
  auto vec = [&](const char* key, std::size_t n) {
    const json& a = field(j, key, where);
    if (!a.is_array() || a.size() != n) {
      parse_fail(where + "." + key + " must have " + std::to_string(n) + " numbers");
    }
    std::vector<double> out;
    for (const auto& x : a) out.push_back(get_number(x, where + "." + key));
    return out;
  };
  OrientedBox3D b;
  const auto T = vec("T", 3), R = vec("R", 9), D = vec("D", 3);
  b.T = {T[0], T[1], T[2]};
  b.D = {D[0], D[1], D[2]};
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) b.R(r, c) = R[static_cast<std::size_t>(r * 3 + c)];
  return b;
}

json manifest_to_json(const SceneManifest& m) {
  json j;
  j["scene_id"] = m.scene_id;
  j["rgb_path"] = m.rgb_path;
  j["depth_path"] = m.depth_path;
  const auto& k = m.intrinsics;
  j["intrinsics"] = {{"fx", k.fx}, {"fy", k.fy},       {"cx", k.cx},
                     {"cy", k.cy}, {"width", k.width}, {"height", k.height}};
  j["vocabulary"] = vocab_to_json(m.vocabulary);
  json dets = json::object();
  for (const auto& [query, list] : m.detections) {
    json arr = json::array();
    for (const auto& d : list) {
      json dj{{"label", d.label}, {"score", d.score}, {"bbox", box_to_json(d.bbox)}};
      if (d.mask) dj["mask"] = mask_to_json(*d.mask);
      arr.push_back(std::move(dj));
    }
    dets[query] = std::move(arr);
  }
  j["detections"] = std::move(dets);
  json exprs = json::array();
  for (const auto& e : m.expressions) {
    json ej{{"target", e.target_label}, {"relation", e.relation}, {"reference", e.reference_label}};
    if (e.gt_target_bbox) ej["gt_target_bbox"] = box_to_json(*e.gt_target_bbox);
    if (e.gt_reference_bbox) ej["gt_reference_bbox"] = box_to_json(*e.gt_reference_bbox);
    if (!e.gt_target_alternatives.empty()) {
      json alts = json::array();
      for (const auto& b : e.gt_target_alternatives) alts.push_back(box_to_json(b));
      ej["gt_target_alternatives"] = std::move(alts);
    }
    exprs.push_back(std::move(ej));
  }
  j["expressions"] = std::move(exprs);
  if (!m.objects.empty()) {
    json objs = json::array();
    for (const auto& o : m.objects) {
      json oj{{"id", o.id}, {"label", o.label}, {"bbox", box_to_json(o.bbox)}};
      if (o.mask) oj["mask"] = mask_to_json(*o.mask);
      if (o.box3d) oj["box3d"] = box3d_to_json(*o.box3d);
      objs.push_back(std::move(oj));
    }
    j["objects"] = std::move(objs);
  }
  return j;
}

SceneManifest manifest_from_json(const json& j) {
  SceneManifest m;
  m.scene_id = get_string(field(j, "scene_id", "manifest"), "scene_id");
  m.rgb_path = get_string(field(j, "rgb_path", "manifest"), "rgb_path");
  m.depth_path = get_string(field(j, "depth_path", "manifest"), "depth_path");
  const json& k = field(j, "intrinsics", "manifest");
  m.intrinsics.fx = get_number(field(k, "fx", "intrinsics"), "intrinsics.fx");
  m.intrinsics.fy = get_number(field(k, "fy", "intrinsics"), "intrinsics.fy");
  m.intrinsics.cx = get_number(field(k, "cx", "intrinsics"), "intrinsics.cx");
  m.intrinsics.cy = get_number(field(k, "cy", "intrinsics"), "intrinsics.cy");
  m.intrinsics.width = get_int(field(k, "width", "intrinsics"), "intrinsics.width");
  m.intrinsics.height = get_int(field(k, "height", "intrinsics"), "intrinsics.height");
  if (auto it = j.find("vocabulary"); it != j.end()) m.vocabulary = vocab_from_json(*it);

  const json& dets = field(j, "detections", "manifest");
  if (!dets.is_object()) parse_fail("detections must be an object keyed by query label");
  for (const auto& [query, list] : dets.items()) {
    if (!list.is_array()) parse_fail("detections." + query + " must be an array");
    auto& out = m.detections[query];
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "detections." + query + "[" + std::to_string(i) + "]";
      const json& dj = list[i];
      Detection2D d;
      d.label = get_string(field(dj, "label", where), where + ".label");
      d.score = get_number(field(dj, "score", where), where + ".score");
      d.bbox = box_from_json(field(dj, "bbox", where), where + ".bbox");
      if (auto mi = dj.find("mask"); mi != dj.end()) d.mask = mask_from_json(*mi, where + ".mask");
      out.push_back(std::move(d));
    }
  }
  if (auto it = j.find("expressions"); it != j.end()) {
    if (!it->is_array()) parse_fail("expressions must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "expressions[" + std::to_string(i) + "]";
      const json& ej = (*it)[i];
      Expression e;
      e.target_label = get_string(field(ej, "target", where), where + ".target");
      e.relation = canonical_relation(get_string(field(ej, "relation", where), where + ".relation"));
      e.reference_label = get_string(field(ej, "reference", where), where + ".reference");
      if (auto b = ej.find("gt_target_bbox"); b != ej.end()) {
        e.gt_target_bbox = box_from_json(*b, where + ".gt_target_bbox");
      }
      if (auto b = ej.find("gt_reference_bbox"); b != ej.end()) {
        e.gt_reference_bbox = box_from_json(*b, where + ".gt_reference_bbox");
      }
      if (auto b = ej.find("gt_target_alternatives"); b != ej.end()) {
        if (!b->is_array()) parse_fail(where + ".gt_target_alternatives must be an array");
        for (const auto& a : *b) {
          e.gt_target_alternatives.push_back(box_from_json(a, where + ".gt_target_alternatives"));
        }
      }
      m.expressions.push_back(std::move(e));
    }
  }
  if (auto it = j.find("objects"); it != j.end()) {
    if (!it->is_array()) parse_fail("objects must be an array");
    for (std::size_t i = 0; i < it->size(); ++i) {
      const std::string where = "objects[" + std::to_string(i) + "]";
      const json& oj = (*it)[i];
      SceneObject o;
      o.id = get_int(field(oj, "id", where), where + ".id");
      o.label = get_string(field(oj, "label", where), where + ".label");
      o.bbox = box_from_json(field(oj, "bbox", where), where + ".bbox");
      if (auto mi = oj.find("mask"); mi != oj.end()) o.mask = mask_from_json(*mi, where + ".mask");
      if (auto bi = oj.find("box3d"); bi != oj.end()) o.box3d = box3d_from_json(*bi, where + ".box3d");
      m.objects.push_back(std::move(o));
    }
  }
  return m;
}

}  // namespace

SceneManifest parse_manifest(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    parse_fail(std::string("manifest is not valid JSON: ") + e.what());
  }
  SceneManifest m;
  try {
    m = manifest_from_json(j);
  } catch (const json::exception& e) {
    parse_fail(std::string("manifest: ") + e.what());
  }
  m.intrinsics.validate();
  for (auto& [query, list] : m.detections) {
    for (auto& d : list) {
      if (std::isfinite(d.bbox.x) && std::isfinite(d.bbox.y) && d.bbox.w >= 0 && d.bbox.h >= 0) {
        d.bbox = d.bbox.clamped(m.intrinsics.width, m.intrinsics.height);
      }
    }
  }
  m.base_dir = base_dir;
  m.validate();
  return m;
}

std::string serialize_manifest(const SceneManifest& manifest) {
  return manifest_to_json(manifest).dump(2) + "\n";
}

SceneManifest load_manifest(const fs::path& path) {
  std::string base = path.parent_path().string();
  if (base.empty()) base = ".";
  return parse_manifest(read_text_file(path), base);
}

void save_manifest(const SceneManifest& manifest, const fs::path& path) {
  manifest.validate();
  write_text_file(path, serialize_manifest(manifest));
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "short write to '" + path.string() + "'");
}

DatasetIndex load_index(const fs::path& dataset_dir) {
  const fs::path p = dataset_dir / "index.json";
  json j;
  try {
    j = json::parse(read_text_file(p));
  } catch (const json::parse_error& e) {
    parse_fail(p.string() + " is not valid JSON: " + e.what());
  }
  DatasetIndex idx;
  const json& scenes = field(j, "scenes", "index");
  if (!scenes.is_array()) parse_fail("index.scenes must be an array");
  for (const auto& s : scenes) idx.scenes.push_back(get_string(s, "index.scenes"));
  if (auto it = j.find("vocabulary"); it != j.end()) idx.vocabulary = vocab_from_json(*it);
  if (auto it = j.find("relation_counts"); it != j.end()) {
    for (const auto& [k, v] : it->items()) idx.relation_counts[k] = v.get<std::size_t>();
  }
  if (auto it = j.find("expression_count"); it != j.end()) {
    idx.expression_count = it->get<std::size_t>();
  }
  return idx;
}

void save_index(const DatasetIndex& index, const fs::path& dataset_dir) {
  json j;
  j["scenes"] = index.scenes;
  j["vocabulary"] = vocab_to_json(index.vocabulary);
  j["relation_counts"] = index.relation_counts;
  j["expression_count"] = index.expression_count;
  write_text_file(dataset_dir / "index.json", j.dump(2) + "\n");
}

std::vector<SceneManifest> load_dataset(const fs::path& dataset_dir) {
  const DatasetIndex idx = load_index(dataset_dir);
  std::vector<SceneManifest> out;
  out.reserve(idx.scenes.size());
  for (const auto& s : idx.scenes) out.push_back(load_manifest(dataset_dir / s));
  return out;
}

}  // namespace srg
