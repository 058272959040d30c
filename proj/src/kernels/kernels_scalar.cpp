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

#include "kernels_internal.hpp"

#include <cmath>

namespace srg::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void affine_scalar(const double* w, const double* bias, const double* x, double* y,
                   std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = (bias ? bias[r] : 0.0) + dot_scalar(w + r * cols, x, cols);
  }
}

void affine_transpose_acc_scalar(const double* w, const double* g, double* out, std::size_t rows,
                                 std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    const double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) out[c] += row[c] * gr;
  }
}

void outer_acc_scalar(double* w, const double* g, const double* x, std::size_t rows,
                      std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double gr = g[r];
    if (gr == 0.0) continue;
    double* row = w + r * cols;
    for (std::size_t c = 0; c < cols; ++c) row[c] += gr * x[c];
  }
}

void sq_dist3_scalar(const double* xs, const double* ys, const double* zs, std::size_t n,
                     const double* q, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = xs[i] - q[0];
    const double dy = ys[i] - q[1];
    const double dz = zs[i] - q[2];
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void adam_update_scalar(double* param, const double* grad, double* m, double* v, std::size_t n,
                        const AdamStep& s) {
  for (std::size_t i = 0; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    param[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

const Table& scalar_table() {
  static const Table table{
      "scalar",
      dot_scalar,
      affine_scalar,
      affine_transpose_acc_scalar,
      outer_acc_scalar,
      sq_dist3_scalar,
      adam_update_scalar,
  };
  return table;
}

}  // namespace srg::kernels
