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

// Dataset ingestion (CSV with a key=value sidecar for column roles),
// preprocessing (train/test split, whitening on the training split,
// power-of-two subsampling), and the synthetic generator with a rotation
// angle controlling the sensitive/label correlation.

#ifndef BLINDFAIR_DATAIO_HPP_
#define BLINDFAIR_DATAIO_HPP_

#include <map>
#include <string>
#include <vector>

#include "blindfair/clearref.hpp"
#include "blindfair/dataset.hpp"

namespace blindfair {

enum class ColumnRole { Feature, Sensitive, Label, Ignore };

struct DatasetSpec {
  std::string csv_path;
  std::map<std::string, ColumnRole> roles;  // by header name
  std::string label_positive;               // value mapped to y = 1
  std::uint64_t seed = 1;
  double test_fraction = 0.2;
};

// Two 2-d Gaussian clusters (means +/-[2,2], common covariance [[5,1],[1,5]])
// plus `noise_features` N(0,1) columns; the sensitive bit is Bernoulli on the
// class-density ratio of the features rotated by phi, so smaller phi means
// stronger z-y correlation. phi = pi/2 decorrelates them.
struct SyntheticSpec {
  std::size_t n = 1024;        // training examples; must be a power of two
  std::size_t n_test = 1024;
  double phi = 0.7853981633974483;  // pi/4
  std::size_t noise_features = 2;
  std::uint64_t seed = 1;
};

// Parses the sidecar role file: one `column=feature|sensitive|label` line
// per column, plus optional `label_positive=<value>`.
void load_roles_file(const std::string& path, DatasetSpec& spec);

SplitDataset load_csv(const DatasetSpec& spec);
SplitDataset gen_synthetic(const SyntheticSpec& spec);

// Elementwise ring encoding; throws OverflowError naming the offending cell.
FxDataset fx_quantize(const Dataset& D, const FxConfig& cfg);

// Applies stored whitening to a raw feature vector (verification inputs).
std::vector<double> apply_whitening(const Whitening& w,
                                    const std::vector<double>& x);

}  // namespace blindfair

#endif  // BLINDFAIR_DATAIO_HPP_
