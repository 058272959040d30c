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

#include <immintrin.h>

#include <cmath>

namespace srg::kernels {
namespace {

inline double hsum(__m256d v) {
  const __m128d lo = _mm256_castpd256_pd128(v);
  const __m128d hi = _mm256_extractf128_pd(v, 1);
  const __m128d s = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
  }
  for (; i + 4 <= n; i += 4) {
    acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
  }
  double acc = hsum(_mm256_add_pd(acc0, acc1));
  for (; i < n; ++i) acc += a[i] * b[i];
  return acc;
}

void affine_avx2(const double* w, const double* bias, const double* x, double* y,
                 std::size_t rows, std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    y[r] = (bias ? bias[r] : 0.0) + dot_avx2(w + r * cols, x, cols);
  }
}

void axpy_avx2(double alpha, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(alpha);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i)));
  }
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void affine_transpose_acc_avx2(const double* w, const double* g, double* out, std::size_t rows,
                               std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] == 0.0) continue;
    axpy_avx2(g[r], w + r * cols, out, cols);
  }
}

void outer_acc_avx2(double* w, const double* g, const double* x, std::size_t rows,
                    std::size_t cols) {
  for (std::size_t r = 0; r < rows; ++r) {
    if (g[r] == 0.0) continue;
    axpy_avx2(g[r], x, w + r * cols, cols);
  }
}

void sq_dist3_avx2(const double* xs, const double* ys, const double* zs, std::size_t n,
                   const double* q, double* out) {
  const __m256d qx = _mm256_set1_pd(q[0]);
  const __m256d qy = _mm256_set1_pd(q[1]);
  const __m256d qz = _mm256_set1_pd(q[2]);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), qx);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), qy);
    const __m256d dz = _mm256_sub_pd(_mm256_loadu_pd(zs + i), qz);
    __m256d d2 = _mm256_mul_pd(dx, dx);
    d2 = _mm256_fmadd_pd(dy, dy, d2);
    d2 = _mm256_fmadd_pd(dz, dz, d2);
    _mm256_storeu_pd(out + i, d2);
  }
  for (; i < n; ++i) {
    const double dx = xs[i] - q[0];
    const double dy = ys[i] - q[1];
    const double dz = zs[i] - q[2];
    out[i] = dx * dx + dy * dy + dz * dz;
  }
}

void adam_update_avx2(double* param, const double* grad, double* m, double* v, std::size_t n,
                      const AdamStep& s) {
  const __m256d b1 = _mm256_set1_pd(s.beta1);
  const __m256d b2 = _mm256_set1_pd(s.beta2);
  const __m256d one_b1 = _mm256_set1_pd(1.0 - s.beta1);
  const __m256d one_b2 = _mm256_set1_pd(1.0 - s.beta2);
  const __m256d bc1 = _mm256_set1_pd(s.bias_correction1);
  const __m256d bc2 = _mm256_set1_pd(s.bias_correction2);
  const __m256d lr = _mm256_set1_pd(s.lr);
  const __m256d eps = _mm256_set1_pd(s.eps);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d g = _mm256_loadu_pd(grad + i);
    const __m256d mi = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)),
                                     _mm256_mul_pd(one_b1, g));
    const __m256d vi = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                                     _mm256_mul_pd(_mm256_mul_pd(one_b2, g), g));
    _mm256_storeu_pd(m + i, mi);
    _mm256_storeu_pd(v + i, vi);
    const __m256d m_hat = _mm256_div_pd(mi, bc1);
    const __m256d v_hat = _mm256_div_pd(vi, bc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps);
    const __m256d delta = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), denom);
    _mm256_storeu_pd(param + i, _mm256_sub_pd(_mm256_loadu_pd(param + i), delta));
  }
  for (; i < n; ++i) {
    m[i] = s.beta1 * m[i] + (1.0 - s.beta1) * grad[i];
    v[i] = s.beta2 * v[i] + (1.0 - s.beta2) * grad[i] * grad[i];
    const double m_hat = m[i] / s.bias_correction1;
    const double v_hat = v[i] / s.bias_correction2;
    param[i] -= s.lr * m_hat / (std::sqrt(v_hat) + s.eps);
  }
}

}  // namespace

const Table& avx2_table_unchecked() {
  static const Table table{
      "avx2",
      dot_avx2,
      affine_avx2,
      affine_transpose_acc_avx2,
      outer_acc_avx2,
      sq_dist3_avx2,
      adam_update_avx2,
  };
  return table;
}

}  // namespace srg::kernels
