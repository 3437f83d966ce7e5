/*
 * Copyright 2026 The flight2vec Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *   http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "flight2vec/kernels.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace f2v {

namespace {
Backend g_backend = Backend::kParallel;
}

Backend default_backend() { return g_backend; }
void set_default_backend(Backend b) { g_backend = b; }

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// --- serial reference kernels -------------------------------------------

namespace serial {

void matmul_nn(CMatView a, CMatView b, MatView out) {
  for (int i = 0; i < a.rows; ++i) {
    double* o = out.row(i);
    const double* ar = a.row(i);
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += ar[k] * b(k, j);
      o[j] = acc;
    }
  }
}

void matmul_nt(CMatView a, CMatView b, MatView out) {
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* o = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
      o[j] = acc;
    }
  }
}

void matmul_tn_acc(CMatView a, CMatView b, MatView out) {
  for (int i = 0; i < a.cols; ++i) {
    double* o = out.row(i);
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.rows; ++k) acc += a(k, i) * b(k, j);
      o[j] += acc;
    }
  }
}

void softmax_row(double* r, int n) {
  double mx = r[0];
  for (int j = 1; j < n; ++j) mx = std::max(mx, r[j]);
  double sum = 0.0;
  for (int j = 0; j < n; ++j) {
    r[j] = std::exp(r[j] - mx);
    sum += r[j];
  }
  double inv = 1.0 / sum;
  for (int j = 0; j < n; ++j) r[j] *= inv;
}

}  // namespace serial

// --- dispatch -------------------------------------------------------------

void matmul_nn(CMatView a, CMatView b, MatView out, Backend backend) {
  if (backend == Backend::kSerial) {
    serial::matmul_nn(a, b, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    double* o = out.row(i);
    const double* ar = a.row(i);
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += ar[k] * b(k, j);
      o[j] = acc;
    }
  }
}

void matmul_nt(CMatView a, CMatView b, MatView out, Backend backend) {
  if (backend == Backend::kSerial) {
    serial::matmul_nt(a, b, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) {
    const double* ar = a.row(i);
    double* o = out.row(i);
    for (int j = 0; j < b.rows; ++j) {
      const double* br = b.row(j);
      double acc = 0.0;
      for (int k = 0; k < a.cols; ++k) acc += ar[k] * br[k];
      o[j] = acc;
    }
  }
}

void matmul_tn_acc(CMatView a, CMatView b, MatView out, Backend backend) {
  if (backend == Backend::kSerial) {
    serial::matmul_tn_acc(a, b, out);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) {
    double* o = out.row(i);
    for (int j = 0; j < b.cols; ++j) {
      double acc = 0.0;
      for (int k = 0; k < a.rows; ++k) acc += a(k, i) * b(k, j);
      o[j] += acc;
    }
  }
}

void softmax_rows(MatView m, Backend backend) {
  if (backend == Backend::kSerial) {
    for (int i = 0; i < m.rows; ++i) serial::softmax_row(m.row(i), m.cols);
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m.rows; ++i) serial::softmax_row(m.row(i), m.cols);
}

void add_row_vector(MatView m, const double* v, Backend backend) {
  if (backend == Backend::kSerial) {
    for (int i = 0; i < m.rows; ++i) {
      double* r = m.row(i);
      for (int j = 0; j < m.cols; ++j) r[j] += v[j];
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int i = 0; i < m.rows; ++i) {
    double* r = m.row(i);
    for (int j = 0; j < m.cols; ++j) r[j] += v[j];
  }
}

void col_sum_acc(CMatView m, double* out, Backend backend) {
  if (backend == Backend::kSerial) {
    for (int j = 0; j < m.cols; ++j) {
      double acc = 0.0;
      for (int i = 0; i < m.rows; ++i) acc += m(i, j);
      out[j] += acc;
    }
    return;
  }
#pragma omp parallel for schedule(static)
  for (int j = 0; j < m.cols; ++j) {
    double acc = 0.0;
    for (int i = 0; i < m.rows; ++i) acc += m(i, j);
    out[j] += acc;
  }
}

bool all_finite(CMatView m) {
  const std::size_t n = static_cast<std::size_t>(m.rows) * m.cols;
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(m.p[i])) return false;
  }
  return true;
}

}  // namespace f2v
