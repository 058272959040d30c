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

// Dense inner loops shared by the MLP trainer and the point-cloud code.
//
// Every kernel has a scalar reference implementation. An AVX2/FMA variant is
// compiled into a separate translation unit and selected once per process
// when the CPU reports support. SRG_KERNELS=scalar|avx2 in the environment
// overrides the choice. Variants agree to rounding, not bitwise, because
// lane-wise accumulation changes the summation order.

#include <cstddef>
#include <span>
#include <string_view>

namespace srg::kernels {

struct AdamStep {
  double lr;
  double beta1;
  double beta2;
  double eps;
  double bias_correction1;  // 1 - beta1^t
  double bias_correction2;  // 1 - beta2^t
};

struct Table {
  const char* name;

  double (*dot)(const double* a, const double* b, std::size_t n);

  // y[r] = bias[r] + sum_c w[r * cols + c] * x[c]; bias may be null.
  void (*affine)(const double* w, const double* bias, const double* x, double* y,
                 std::size_t rows, std::size_t cols);

  // out[c] += sum_r w[r * cols + c] * g[r]
  void (*affine_transpose_acc)(const double* w, const double* g, double* out,
                               std::size_t rows, std::size_t cols);

  // w[r * cols + c] += g[r] * x[c]
  void (*outer_acc)(double* w, const double* g, const double* x, std::size_t rows,
                    std::size_t cols);

  // out[i] = |(xs[i], ys[i], zs[i]) - q|^2
  void (*sq_dist3)(const double* xs, const double* ys, const double* zs, std::size_t n,
                   const double* q, double* out);

  void (*adam_update)(double* param, const double* grad, double* m, double* v,
                      std::size_t n, const AdamStep& step);
};

const Table& scalar_table();

/// Null when the variant was not compiled in or the CPU lacks AVX2/FMA.
const Table* avx2_table();

/// The table chosen for this process.
const Table& active();

/// Overrides the process-wide choice; returns false for unknown or
/// unsupported names.
bool select(std::string_view name);

// Span wrappers over active().
double dot(std::span<const double> a, std::span<const double> b);
void affine(std::span<const double> w, std::span<const double> bias, std::span<const double> x,
            std::span<double> y);
void affine_transpose_acc(std::span<const double> w, std::span<const double> g,
                          std::span<double> out);
void outer_acc(std::span<double> w, std::span<const double> g, std::span<const double> x);

}  // namespace srg::kernels
