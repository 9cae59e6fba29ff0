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

#include "blindfair/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "blindfair/rng.hpp"

namespace blindfair {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    cells.push_back(trim(cell));
  }
  if (!line.empty() && line.back() == ',') {
    cells.push_back("");
  }
  return cells;
}

bool parse_double(const std::string& s, double* out) {
  if (s.empty()) return false;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size()) return false;
  *out = v;
  return true;
}

// Standardizes X columns in place using train-split statistics.
Whitening whiten_in_place(Matrix& X_train, Matrix& X_test) {
  Whitening w;
  w.mean.assign(X_train.cols, 0.0);
  w.scale.assign(X_train.cols, 1.0);
  const double n = static_cast<double>(X_train.rows);
  for (std::size_t k = 0; k < X_train.cols; ++k) {
    double mu = 0.0;
    for (std::size_t i = 0; i < X_train.rows; ++i) mu += X_train.at(i, k);
    mu /= n;
    double var = 0.0;
    for (std::size_t i = 0; i < X_train.rows; ++i) {
      const double d = X_train.at(i, k) - mu;
      var += d * d;
    }
    var /= n;
    const double sd = var > 0.0 ? std::sqrt(var) : 1.0;
    w.mean[k] = mu;
    w.scale[k] = sd;
    for (std::size_t i = 0; i < X_train.rows; ++i) {
      X_train.at(i, k) = (X_train.at(i, k) - mu) / sd;
    }
    for (std::size_t i = 0; i < X_test.rows; ++i) {
      X_test.at(i, k) = (X_test.at(i, k) - mu) / sd;
    }
  }
  return w;
}

std::size_t largest_pow2_at_most(std::size_t n) {
  std::size_t p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

// Uniform standard normal from the pinned mt19937_64 stream (Box-Muller);
// implementation-defined std::normal_distribution is avoided on purpose.
struct NormalGen {
  Prng& rng;
  bool have_spare = false;
  double spare = 0.0;

  double uniform01() {
    // 53-bit mantissa in (0, 1]; never 0 so log() stays finite.
    return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
  }
  double operator()() {
    if (have_spare) {
      have_spare = false;
      return spare;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586 * u2;
    spare = r * std::sin(a);
    have_spare = true;
    return r * std::cos(a);
  }
};

}  // namespace

void load_roles_file(const std::string& path, DatasetSpec& spec) {
  std::ifstream in(path);
  if (!in) {
    throw IOError("cannot open roles file " + path);
  }
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    lineno += 1;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "label_positive") {
      spec.label_positive = val;
      continue;
    }
    ColumnRole role;
    if (val == "feature") {
      role = ColumnRole::Feature;
    } else if (val == "sensitive") {
      role = ColumnRole::Sensitive;
    } else if (val == "label") {
      role = ColumnRole::Label;
    } else if (val == "ignore") {
      role = ColumnRole::Ignore;
    } else {
      throw ParseError(path + ":" + std::to_string(lineno) +
                       ": unknown role '" + val + "'");
    }
    spec.roles[key] = role;
  }
}

SplitDataset load_csv(const DatasetSpec& spec) {
  std::ifstream in(spec.csv_path);
  if (!in) {
    throw IOError("cannot open " + spec.csv_path);
  }
  std::string line;
  if (!std::getline(in, line)) {
    throw EmptyDataset(spec.csv_path + " has no header");
  }
  const auto header = split_csv_line(line);
  std::vector<ColumnRole> roles(header.size(), ColumnRole::Ignore);
  std::size_t n_label = 0, n_sensitive = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    auto it = spec.roles.find(header[c]);
    if (it != spec.roles.end()) {
      roles[c] = it->second;
      n_label += roles[c] == ColumnRole::Label;
      n_sensitive += roles[c] == ColumnRole::Sensitive;
    }
  }
  if (n_label != 1) {
    throw ParseError("exactly one label column required, got " +
                     std::to_string(n_label));
  }
  if (n_sensitive == 0) {
    throw ParseError("at least one sensitive column required");
  }

  std::vector<std::vector<std::string>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    lineno += 1;
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw ParseError(spec.csv_path + ":" + std::to_string(lineno) +
                       ": expected " + std::to_string(header.size()) +
                       " cells, got " + std::to_string(cells.size()));
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) {
    throw EmptyDataset(spec.csv_path + " has no data rows");
  }

  // Per column: numeric feature, one-hot categorical feature, or binary
  // sensitive/label mapping. Binary mapping is by sorted distinct value.
  struct ColPlan {
    ColumnRole role;
    bool numeric = true;
    std::vector<std::string> categories;  // sorted
  };
  std::vector<ColPlan> plans(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    plans[c].role = roles[c];
    if (roles[c] == ColumnRole::Ignore) continue;
    std::set<std::string> distinct;
    bool numeric = true;
    for (const auto& r : rows) {
      double dummy;
      if (!parse_double(r[c], &dummy)) numeric = false;
      distinct.insert(r[c]);
    }
    plans[c].numeric = numeric;
    plans[c].categories.assign(distinct.begin(), distinct.end());
    if (roles[c] != ColumnRole::Feature && distinct.size() != 2) {
      throw NonBinaryColumn("column '" + header[c] + "' has " +
                            std::to_string(distinct.size()) +
                            " distinct values");
    }
  }

  auto binary_value = [&](std::size_t c, const std::string& cell) -> int {
    if (plans[c].role == ColumnRole::Label && !spec.label_positive.empty()) {
      return cell == spec.label_positive ? 1 : 0;
    }
    return cell == plans[c].categories[1] ? 1 : 0;
  };

  // Feature layout: numeric columns map to one output column, categoricals
  // one-hot expand.
  std::size_t d = 0, p = 0;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (plans[c].role == ColumnRole::Feature) {
      d += plans[c].numeric ? 1 : plans[c].categories.size();
    } else if (plans[c].role == ColumnRole::Sensitive) {
      p += 1;
    }
  }

  const std::size_t total = rows.size();
  Matrix X(total, d), Z(total, p);
  std::vector<int> y(total);
  for (std::size_t i = 0; i < total; ++i) {
    std::size_t dk = 0, pk = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      const auto& cell = rows[i][c];
      switch (plans[c].role) {
        case ColumnRole::Feature:
          if (plans[c].numeric) {
            double v;
            parse_double(cell, &v);
            X.at(i, dk++) = v;
          } else {
            for (const auto& cat : plans[c].categories) {
              X.at(i, dk++) = cell == cat ? 1.0 : 0.0;
            }
          }
          break;
        case ColumnRole::Sensitive:
          Z.at(i, pk++) = binary_value(c, cell);
          break;
        case ColumnRole::Label:
          y[i] = binary_value(c, cell);
          break;
        case ColumnRole::Ignore:
          break;
      }
    }
  }

  // Seeded shuffle, test split, then subsample the train side to the
  // largest power of two.
  Prng rng(spec.seed);
  const auto perm = random_permutation(rng, total);
  std::size_t n_test = static_cast<std::size_t>(
      std::floor(spec.test_fraction * static_cast<double>(total)));
  if (n_test >= total) n_test = total - 1;
  const std::size_t n_train_raw = total - n_test;
  const std::size_t n_train = largest_pow2_at_most(n_train_raw);

  SplitDataset out;
  out.train.X = Matrix(n_train, d);
  out.train.Z = Matrix(n_train, p);
  out.train.y.resize(n_train);
  out.test.X = Matrix(n_test, d);
  out.test.Z = Matrix(n_test, p);
  out.test.y.resize(n_test);
  for (std::size_t i = 0; i < n_train; ++i) {
    const std::size_t src = perm[i];
    for (std::size_t k = 0; k < d; ++k) out.train.X.at(i, k) = X.at(src, k);
    for (std::size_t k = 0; k < p; ++k) out.train.Z.at(i, k) = Z.at(src, k);
    out.train.y[i] = y[src];
  }
  for (std::size_t i = 0; i < n_test; ++i) {
    const std::size_t src = perm[n_train_raw + i];
    for (std::size_t k = 0; k < d; ++k) out.test.X.at(i, k) = X.at(src, k);
    for (std::size_t k = 0; k < p; ++k) out.test.Z.at(i, k) = Z.at(src, k);
    out.test.y[i] = y[src];
  }
  out.whitening = whiten_in_place(out.train.X, out.test.X);
  return out;
}

SplitDataset gen_synthetic(const SyntheticSpec& spec) {
  const std::size_t total = spec.n + spec.n_test;
  const std::size_t d = 2 + spec.noise_features;
  Prng rng(spec.seed);
  NormalGen normal{rng};

  // Common class covariance [[5,1],[1,5]]; Cholesky factor rows.
  const double l00 = std::sqrt(5.0);
  const double l10 = 1.0 / l00;
  const double l11 = std::sqrt(5.0 - l10 * l10);
  const double cphi = std::cos(spec.phi);
  const double sphi = std::sin(spec.phi);

  // Gaussian density exponent at x for the class mean (mx, my); the common
  // covariance cancels everything but the quadratic form.
  const double det = 24.0;  // 5*5 - 1
  auto dens = [&](double x0, double x1, double m) {
    const double dx = x0 - m, dy = x1 - m;
    const double quad = (5.0 * dx * dx - 2.0 * dx * dy + 5.0 * dy * dy) / det;
    return std::exp(-0.5 * quad);
  };

  Matrix X(total, d), Z(total, 1);
  std::vector<int> y(total);
  for (std::size_t i = 0; i < total; ++i) {
    y[i] = static_cast<int>(rng() & 1);
    const double mean = y[i] == 1 ? 2.0 : -2.0;
    const double g0 = normal(), g1 = normal();
    const double x0 = mean + l00 * g0;
    const double x1 = mean + l10 * g0 + l11 * g1;
    X.at(i, 0) = x0;
    X.at(i, 1) = x1;
    for (std::size_t k = 2; k < d; ++k) {
      X.at(i, k) = normal();
    }
    // Sensitive bit from the class-density ratio of the rotated features.
    const double r0 = cphi * x0 - sphi * x1;
    const double r1 = sphi * x0 + cphi * x1;
    const double p1 = dens(r0, r1, 2.0);
    const double p0 = dens(r0, r1, -2.0);
    const double prob = p1 / (p0 + p1);
    const double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    Z.at(i, 0) = u < prob ? 1.0 : 0.0;
  }

  SplitDataset out;
  out.train.X = Matrix(spec.n, d);
  out.train.Z = Matrix(spec.n, 1);
  out.train.y.assign(y.begin(), y.begin() + spec.n);
  out.test.X = Matrix(spec.n_test, d);
  out.test.Z = Matrix(spec.n_test, 1);
  out.test.y.assign(y.begin() + spec.n, y.end());
  for (std::size_t i = 0; i < spec.n; ++i) {
    for (std::size_t k = 0; k < d; ++k) out.train.X.at(i, k) = X.at(i, k);
    out.train.Z.at(i, 0) = Z.at(i, 0);
  }
  for (std::size_t i = 0; i < spec.n_test; ++i) {
    for (std::size_t k = 0; k < d; ++k) {
      out.test.X.at(i, k) = X.at(spec.n + i, k);
    }
    out.test.Z.at(i, 0) = Z.at(spec.n + i, 0);
  }
  out.whitening = whiten_in_place(out.train.X, out.test.X);
  return out;
}

FxDataset fx_quantize(const Dataset& D, const FxConfig& cfg) {
  FxDataset out;
  out.X = RingMatrix(D.n(), D.d());
  out.Z = RingMatrix(D.n(), D.p());
  out.y.resize(D.n());
  double max_err = 0.0;
  auto enc = [&](double v, std::size_t i, std::size_t j, const char* which) {
    try {
      const Ring e = fx_encode(v, cfg);
      max_err = std::max(max_err, std::abs(fx_decode(e, cfg) - v));
      return e;
    } catch (const OverflowError&) {
      throw OverflowError(std::string("fx_quantize: ") + which + "[" +
                          std::to_string(i) + "][" + std::to_string(j) +
                          "] = " + std::to_string(v) + " out of range");
    }
  };
  for (std::size_t i = 0; i < D.n(); ++i) {
    for (std::size_t k = 0; k < D.d(); ++k) {
      out.X.at(i, k) = enc(D.X.at(i, k), i, k, "X");
    }
    for (std::size_t k = 0; k < D.p(); ++k) {
      out.Z.at(i, k) = enc(D.Z.at(i, k), i, k, "Z");
    }
    out.y[i] = enc(static_cast<double>(D.y[i]), i, 0, "y");
  }
  out.max_quantization_error = max_err;
  return out;
}

std::vector<double> apply_whitening(const Whitening& w,
                                    const std::vector<double>& x) {
  if (x.size() != w.mean.size()) {
    throw DimensionMismatch("apply_whitening: dimension mismatch");
  }
  std::vector<double> out(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    out[k] = (x[k] - w.mean[k]) / w.scale[k];
  }
  return out;
}

}  // namespace blindfair
