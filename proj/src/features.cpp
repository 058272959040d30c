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

#include "srg/features.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "srg/dataio.hpp"
#include "srg/error.hpp"

namespace srg {

std::string to_string(FeatureSchema schema) {
  switch (schema) {
    case FeatureSchema::Geom2D: return "GEOM2D";
    case FeatureSchema::Geom2DLng: return "GEOM2D_LNG";
    case FeatureSchema::Geom3D: return "GEOM3D";
    case FeatureSchema::Geom3DLng: return "GEOM3D_LNG";
  }
  return "GEOM3D";
}

FeatureSchema feature_schema_from_string(const std::string& s) {
  std::string k;
  for (char c : s) {
    k.push_back(c == '+' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  }
  if (k == "GEOM2D") return FeatureSchema::Geom2D;
  if (k == "GEOM2D_LNG") return FeatureSchema::Geom2DLng;
  if (k == "GEOM3D") return FeatureSchema::Geom3D;
  if (k == "GEOM3D_LNG") return FeatureSchema::Geom3DLng;
  throw Error(ErrorKind::Validation, "unknown feature schema '" + s + "'");
}

bool uses_language(FeatureSchema s) {
  return s == FeatureSchema::Geom2DLng || s == FeatureSchema::Geom3DLng;
}

bool is_3d(FeatureSchema s) { return s == FeatureSchema::Geom3D || s == FeatureSchema::Geom3DLng; }

FeatureSchema with_language(FeatureSchema s) {
  return is_3d(s) ? FeatureSchema::Geom3DLng : FeatureSchema::Geom2DLng;
}

std::size_t feature_length(FeatureSchema s, std::size_t embedding_dim) {
  const std::size_t base = is_3d(s) ? kGeom3DLength : kGeom2DLength;
  return uses_language(s) ? base + 2 * embedding_dim : base;
}

// ---------------------------------------------------------------------------

EmbeddingTable EmbeddingTable::parse(const std::string& text) {
  std::istringstream in(text);
  long long dim = -1, count = -1;
  if (!(in >> dim >> count) || dim <= 0 || count < 0) {
    throw Error(ErrorKind::Parse, "embedding table header must be 'E N' with E > 0");
  }
  EmbeddingTable table(static_cast<std::size_t>(dim));
  for (long long i = 0; i < count; ++i) {
    std::string word;
    if (!(in >> word)) {
      throw Error(ErrorKind::Parse, "embedding table ends after " + std::to_string(i) + " of " +
                                        std::to_string(count) + " entries");
    }
    std::vector<double> v(static_cast<std::size_t>(dim));
    for (auto& x : v) {
      if (!(in >> x)) throw Error(ErrorKind::Parse, "embedding for '" + word + "' is short");
    }
    table.add(word, std::move(v));
  }
  return table;
}

EmbeddingTable EmbeddingTable::load(const std::filesystem::path& path) {
  return parse(read_text_file(path));
}

void EmbeddingTable::save(const std::filesystem::path& path) const {
  std::ostringstream out;
  out << dim_ << ' ' << order_.size() << '\n';
  char buf[32];
  for (const auto& w : order_) {
    out << w;
    for (double x : entries_.at(w)) {
      std::snprintf(buf, sizeof buf, " %.17g", x);
      out << buf;
    }
    out << '\n';
  }
  write_text_file(path, out.str());
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
  if (vec.size() != dim_) {
    throw Error(ErrorKind::Validation, "embedding for '" + word + "' has length " +
                                           std::to_string(vec.size()) + ", table dimension is " +
                                           std::to_string(dim_));
  }
  for (double x : vec) {
    if (!std::isfinite(x)) throw Error(ErrorKind::Validation, "embedding for '" + word + "' is not finite");
  }
  if (!entries_.contains(word)) order_.push_back(word);
  entries_[word] = std::move(vec);
}

std::vector<double> EmbeddingTable::embed(const std::string& label) const {
  std::vector<double> acc(dim_, 0.0);
  std::size_t words = 0;
  std::string word;
  auto flush = [&] {
    if (word.empty()) return;
    ++words;
    if (auto it = entries_.find(word); it != entries_.end()) {
      for (std::size_t i = 0; i < dim_; ++i) acc[i] += it->second[i];
    }
    word.clear();
  };
  for (char c : label) {
    if (c == ' ' || c == '_') {
      flush();
    } else {
      word.push_back(c);
    }
  }
  flush();
  if (words > 1) {
    for (auto& x : acc) x /= static_cast<double>(words);
  }
  return acc;
}

// ---------------------------------------------------------------------------

namespace {

void append_box(std::vector<double>& out, const OrientedBox3D& b) {
  out.insert(out.end(), {b.T.x(), b.T.y(), b.T.z()});
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) out.push_back(b.R(r, c));
  out.insert(out.end(), {b.D.x(), b.D.y(), b.D.z()});
}

}  // namespace

FeatureVector feat3d(const OrientedBox3D& target, const OrientedBox3D& reference) {
  FeatureVector f;
  f.schema = FeatureSchema::Geom3D;
  f.values.reserve(kGeom3DLength);
  append_box(f.values, target);
  append_box(f.values, reference);
  return f;
}

FeatureVector feat2d(const BBox2D& target, const BBox2D& reference, int image_width,
                     int image_height) {
  if (image_width <= 0 || image_height <= 0) {
    throw Error(ErrorKind::Validation, "feat2d needs a positive image size");
  }
  const double sx = 1.0 / image_width, sy = 1.0 / image_height;
  FeatureVector f;
  f.schema = FeatureSchema::Geom2D;
  f.values = {target.center_x() * sx,    target.center_y() * sy,    target.w * sx,
              target.h * sy,             reference.center_x() * sx, reference.center_y() * sy,
              reference.w * sx,          reference.h * sy};
  return f;
}

FeatureVector with_language(const FeatureVector& base, const std::string& target_label,
                            const std::string& reference_label, const EmbeddingTable& table) {
  if (uses_language(base.schema)) {
    throw Error(ErrorKind::SchemaMismatch, "feature vector already carries language features");
  }
  FeatureVector f;
  f.schema = with_language(base.schema);
  f.values = base.values;
  const auto t = table.embed(target_label);
  const auto r = table.embed(reference_label);
  f.values.insert(f.values.end(), t.begin(), t.end());
  f.values.insert(f.values.end(), r.begin(), r.end());
  return f;
}

}  // namespace srg
