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

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace srg::kernels {
namespace {

bool cpu_has_avx2() {
#if defined(SRG_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Table* initial_choice() {
  if (const char* env = std::getenv("SRG_KERNELS")) {
    const std::string_view name(env);
    if (name == "scalar") return &scalar_table();
    if (name == "avx2" && avx2_table()) return avx2_table();
  }
  if (const Table* t = avx2_table()) return t;
  return &scalar_table();
}

std::atomic<const Table*>& current() {
  static std::atomic<const Table*> table{initial_choice()};
  return table;
}

}  // namespace

const Table* avx2_table() {
#if defined(SRG_HAVE_AVX2)
  static const bool supported = cpu_has_avx2();
  return supported ? &avx2_table_unchecked() : nullptr;
#else
  return nullptr;
#endif
}

const Table& active() { return *current().load(std::memory_order_acquire); }

bool select(std::string_view name) {
  if (name == "scalar") {
    current().store(&scalar_table(), std::memory_order_release);
    return true;
  }
  if (name == "avx2" && avx2_table()) {
    current().store(avx2_table(), std::memory_order_release);
    return true;
  }
  return false;
}

double dot(std::span<const double> a, std::span<const double> b) {
  assert(a.size() == b.size());
  return active().dot(a.data(), b.data(), a.size());
}

void affine(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
            std::span<double> y) {
  assert(w.size() == y.size() * x.size());
  assert(bias.empty() || bias.size() == y.size());
  active().affine(w.data(), bias.empty() ? nullptr : bias.data(), x.data(), y.data(), y.size(),
                  x.size());
}

void affine_transpose_acc(std::span<const double> w, std::span<const double> g,
                          std::span<double> out) {
  assert(w.size() == g.size() * out.size());
  active().affine_transpose_acc(w.data(), g.data(), out.data(), g.size(), out.size());
}

void outer_acc(std::span<double> w, std::span<const double> g, std::span<const double> x) {
  assert(w.size() == g.size() * x.size());
  active().outer_acc(w.data(), g.data(), x.data(), g.size(), x.size());
}

}  // namespace srg::kernels
