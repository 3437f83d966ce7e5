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
#include <string>
#include <vector>

#include "flight2vec/kernels.hpp"

namespace f2v {

struct ParamBlock {
  std::string name;
  int rows = 0;
  int cols = 0;
  std::size_t offset = 0;

  std::size_t size() const { return static_cast<std::size_t>(rows) * cols; }
};

/// Flat parameter storage with named 2D blocks in declared order. Gradient
/// and optimizer-state buffers share the block table, so a single offset map
/// describes parameters, gradients and moments alike.
class ParamStore {
 public:
  int add(const std::string& name, int rows, int cols) {
    ParamBlock b;
    b.name = name;
    b.rows = rows;
    b.cols = cols;
    b.offset = values_.size();
    values_.resize(values_.size() + b.size(), 0.0);
    blocks_.push_back(b);
    return static_cast<int>(blocks_.size()) - 1;
  }

  MatView mat(int id) {
    const ParamBlock& b = blocks_[id];
    return MatView(values_.data() + b.offset, b.rows, b.cols);
  }
  CMatView mat(int id) const {
    const ParamBlock& b = blocks_[id];
    return CMatView(values_.data() + b.offset, b.rows, b.cols);
  }
  /// View of block `id` inside an external flat buffer of the same layout.
  MatView mat_in(std::vector<double>& buf, int id) const {
    const ParamBlock& b = blocks_[id];
    return MatView(buf.data() + b.offset, b.rows, b.cols);
  }

  double* row(int id, int r) { return mat(id).row(r); }
  const double* row(int id, int r) const { return mat(id).row(r); }

  std::vector<double>& values() { return values_; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<ParamBlock>& blocks() const { return blocks_; }
  std::size_t size() const { return values_.size(); }

 private:
  std::vector<double> values_;
  std::vector<ParamBlock> blocks_;
};

}  // namespace f2v
