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

// Cleartext reference implementations (float and fixed point) of the three
// constrained optimizers, the sigmoid approximations, and the fairness
// metrics. The fixed-point Lagrange path mirrors the secure protocol
// operation for operation and is its validation oracle.

#ifndef BLINDFAIR_CLEARREF_HPP_
#define BLINDFAIR_CLEARREF_HPP_

#include <optional>
#include <string>
#include <vector>

#include "blindfair/dataset.hpp"
#include "blindfair/engine.hpp"
#include "blindfair/fxp.hpp"

namespace blindfair {

enum class Optimizer { Lagrange, Projected, Iplb };
enum class SigmoidKind { Exact, SecureML, Chebyshev };
enum class ArithmeticKind { Float, Fixed };

struct TrainingConfig {
  double eta_theta = 1e-4;
  double eta_lambda = 0.05;
  int batch_exp = 6;  // minibatch size 2^batch_exp
  std::size_t epochs = 0;  // 0: pick so total updates ~ 15000
  std::vector<double> c;   // constraint vector, >= 0 elementwise
  Optimizer optimizer = Optimizer::Lagrange;
  SigmoidKind sigmoid = SigmoidKind::Exact;
  ArithmeticKind arithmetic = ArithmeticKind::Float;
  std::uint64_t seed = 1;  // public seed driving the minibatch order
  std::size_t block = 64;  // block size for the fixed-point A computation

  std::size_t resolved_epochs(std::size_t n) const;
};

struct ModelParams {
  std::vector<double> theta;
  std::vector<double> lambda;  // >= 0 elementwise at all times
};

struct FxModelParams {
  std::vector<Ring> theta;
  std::vector<Ring> lambda;
};

// One CSV row per epoch for the plot-emitting scripts.
struct EpochTraceRow {
  std::size_t epoch;
  double loss;
  double accuracy;
  double max_constraint;  // max F
  double lambda_norm;
  double rate_z0, rate_z1;  // per-group positive rates on the training set
};

struct TrainResult {
  ModelParams params;
  std::vector<EpochTraceRow> trace;
};

struct FxTrainResult {
  FxModelParams params;
  std::vector<EpochTraceRow> trace;
};

struct FairnessReport {
  double accuracy = 0.0;
  // Pairwise group gaps for the six criteria, indexed per sensitive column.
  // A metric is absent when a conditioning event has zero count.
  struct GroupMetrics {
    std::optional<double> acc_gap;
    std::optional<double> tpr_gap;
    std::optional<double> tnr_gap;
    std::optional<double> ppv_gap;
    std::optional<double> npv_gap;
    std::optional<double> ar_gap;        // positive-rate gap
    std::optional<double> p_percent;     // min ratio of acceptance rates
    double rate_z0 = 0.0, rate_z1 = 0.0; // per-group positive rates
  };
  std::vector<GroupMetrics> groups;
};

// A = (1/n) (Z - zbar)^T X, float path.
Matrix constraint_matrix(const Dataset& D);

// F = |A theta| - c, elementwise.
std::vector<double> fairness_value(const Matrix& A,
                                   const std::vector<double>& theta,
                                   const std::vector<double>& c);

double sigmoid_exact(double x);
double sigmoid_secureml(double x);
double sigmoid_chebyshev(double x);
double sigmoid_variant(double x, SigmoidKind kind);

// Analytic minibatch BCE gradient (mean over the batch); exposed for the
// finite-difference checks.
std::vector<double> bce_gradient(const Dataset& D,
                                 const std::vector<std::size_t>& idx,
                                 const std::vector<double>& theta,
                                 SigmoidKind kind);
double bce_loss(const Dataset& D, const std::vector<std::size_t>& idx,
                const std::vector<double>& theta);
double barrier_value(const Matrix& A, const std::vector<double>& theta,
                     const std::vector<double>& c, double t);
std::vector<double> barrier_gradient(const Matrix& A,
                                     const std::vector<double>& theta,
                                     const std::vector<double>& c, double t);

TrainResult train_lagrange(const Dataset& D, const TrainingConfig& cfg);
TrainResult train_projected(const Dataset& D, const TrainingConfig& cfg);
TrainResult train_iplb(const Dataset& D, const TrainingConfig& cfg);

// Fixed-point dataset: elementwise ring encoding of a Dataset.
struct FxDataset {
  RingMatrix X;
  std::vector<Ring> y;
  RingMatrix Z;
  double max_quantization_error = 0.0;
};

// Fixed-point constraint matrix mirroring BlockedMultShiftAvg (centering by
// shift, blocked products, one rescale per entry, shift-averaged).
RingMatrix constraint_matrix_fx(const FxDataset& D, std::size_t block,
                                const FxConfig& fx);

// Fixed-point Lagrange training with the piecewise sigmoid; bit-identical to
// protocol_train in exact-truncation mode under the same seeds.
FxTrainResult train_lagrange_fx(const FxDataset& D, const TrainingConfig& cfg,
                                const FxConfig& fx);

// Empirical fairness report of predictions sign(x^T theta >= 0).
FairnessReport evaluate(const Dataset& D_test,
                        const std::vector<double>& theta);

std::vector<int> predict(const Matrix& X, const std::vector<double>& theta);

void write_trace_csv(const std::string& path,
                     const std::vector<EpochTraceRow>& trace);

}  // namespace blindfair

#endif  // BLINDFAIR_CLEARREF_HPP_
