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

#pragma once

#include <cstddef>
#include <vector>

namespace f2v {

/// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  void zero() { std::fill(data.begin(), data.end(), 0.0); }
  std::size_t size() const { return data.size(); }
};

/// Mutable view over a row-major block (used for parameter slices).
struct MatView {
  double* p = nullptr;
  int rows = 0;
  int cols = 0;

  MatView() = default;
  MatView(double* ptr, int r, int c) : p(ptr), rows(r), cols(c) {}
  MatView(Matrix& m) : p(m.data.data()), rows(m.rows), cols(m.cols) {}

  double& operator()(int i, int j) const { return p[static_cast<std::size_t>(i) * cols + j]; }
  double* row(int i) const { return p + static_cast<std::size_t>(i) * cols; }
};

struct CMatView {
  const double* p = nullptr;
  int rows = 0;
  int cols = 0;

  CMatView() = default;
  CMatView(const double* ptr, int r, int c) : p(ptr), rows(r), cols(c) {}
  CMatView(const Matrix& m) : p(m.data.data()), rows(m.rows), cols(m.cols) {}
  CMatView(const MatView& m) : p(m.p), rows(m.rows), cols(m.cols) {}

  double operator()(int i, int j) const { return p[static_cast<std::size_t>(i) * cols + j]; }
  const double* row(int i) const { return p + static_cast<std::size_t>(i) * cols; }
};

// Every kernel comes in two variants: a serial reference implementation and
// an OpenMP one parallelized over independent output rows/elements. Both walk
// each reduction in the same index order, so their results are bitwise
// identical; tests assert that and the bench tool compares their throughput.
enum class Backend { kSerial, kParallel };

Backend default_backend();
void set_default_backend(Backend b);
int max_threads();

// out = a * b            (m x k)(k x n) -> (m x n)
void matmul_nn(CMatView a, CMatView b, MatView out, Backend backend);
// out = a * b^T          (m x k)(n x k) -> (m x n)
void matmul_nt(CMatView a, CMatView b, MatView out, Backend backend);
// out = a^T * b          (k x m)(k x n) -> (m x n); accumulates into out
void matmul_tn_acc(CMatView a, CMatView b, MatView out, Backend backend);

inline void matmul_nn(CMatView a, CMatView b, MatView out) { matmul_nn(a, b, out, default_backend()); }
inline void matmul_nt(CMatView a, CMatView b, MatView out) { matmul_nt(a, b, out, default_backend()); }
inline void matmul_tn_acc(CMatView a, CMatView b, MatView out) { matmul_tn_acc(a, b, out, default_backend()); }

/// In-place row-wise softmax with max subtraction.
void softmax_rows(MatView m, Backend backend);
inline void softmax_rows(MatView m) { softmax_rows(m, default_backend()); }

/// Adds a length-cols row vector to every row.
void add_row_vector(MatView m, const double* v, Backend backend);
inline void add_row_vector(MatView m, const double* v) { add_row_vector(m, v, default_backend()); }

/// out[j] += sum_i m(i, j)
void col_sum_acc(CMatView m, double* out, Backend backend);
inline void col_sum_acc(CMatView m, double* out) { col_sum_acc(m, out, default_backend()); }

bool all_finite(CMatView m);

}  // namespace f2v
