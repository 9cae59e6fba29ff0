/*
 * Copyright 2026 The Blindfair Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BLINDFAIR_DATASET_HPP_
#define BLINDFAIR_DATASET_HPP_

#include <cstdint>
#include <vector>

namespace blindfair {

// Row-major dense real matrix (plain plumbing; the heavy lifting is all in
// fixed point anyway).
struct Matrix {
  std::size_t rows = 0, cols = 0;
  std::vector<double> v;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0.0) {}
  double& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  double at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// Training view: whitened features, binary labels, binary sensitive columns.
struct Dataset {
  Matrix X;                     // n x d, columns whitened
  std::vector<int> y;           // n, {0,1}
  Matrix Z;                     // n x p, {0,1}
  std::size_t n() const { return X.rows; }
  std::size_t d() const { return X.cols; }
  std::size_t p() const { return Z.cols; }
};

// Per-column whitening parameters, computed on the training split only and
// reused for the test split and for verification inputs.
struct Whitening {
  std::vector<double> mean;
  std::vector<double> scale;  // standard deviation; 1 for constant columns
};

struct SplitDataset {
  Dataset train;
  Dataset test;
  Whitening whitening;
};

}  // namespace blindfair

#endif  // BLINDFAIR_DATASET_HPP_
