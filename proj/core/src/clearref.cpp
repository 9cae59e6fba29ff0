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

#include "blindfair/clearref.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <string>

#include "blindfair/rng.hpp"

namespace blindfair {

std::size_t TrainingConfig::resolved_epochs(std::size_t n) const {
  if (epochs != 0) {
    return epochs;
  }
  const std::size_t batches = n >> batch_exp;
  return (15000 + batches - 1) / batches;
}

Matrix constraint_matrix(const Dataset& D) {
  const std::size_t n = D.n(), d = D.d(), p = D.p();
  std::vector<double> zbar(p, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      zbar[j] += D.Z.at(i, j);
    }
  }
  for (double& z : zbar) z /= static_cast<double>(n);
  Matrix A(p, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      const double zc = D.Z.at(i, j) - zbar[j];
      for (std::size_t k = 0; k < d; ++k) {
        A.at(j, k) += zc * D.X.at(i, k);
      }
    }
  }
  for (double& v : A.v) v /= static_cast<double>(n);
  return A;
}

std::vector<double> fairness_value(const Matrix& A,
                                   const std::vector<double>& theta,
                                   const std::vector<double>& c) {
  if (A.cols != theta.size() || A.rows != c.size()) {
    throw DimensionMismatch("fairness_value: shapes disagree");
  }
  std::vector<double> F(A.rows);
  for (std::size_t j = 0; j < A.rows; ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < A.cols; ++k) {
      dot += A.at(j, k) * theta[k];
    }
    F[j] = std::abs(dot) - c[j];
  }
  return F;
}

double sigmoid_exact(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_secureml(double x) {
  if (x <= -0.5) return 0.0;
  if (x >= 0.5) return 1.0;
  return x + 0.5;
}

namespace {

// Minimax linear fit of the logistic sigmoid per unit interval on [-5, 5];
// slope/intercept per interval, constants outside.
constexpr double kChebSlope[10] = {
    0.011293359037806703, 0.029439663215475222, 0.071777048844550773,
    0.14973849934787756,  0.2310585786300049,   0.2310585786300049,
    0.14973849934787742,  0.07177704884455105,  0.029439663215475087,
    0.011293359037806816};
constexpr double kChebIntercept[10] = {
    0.062479114405551414, 0.13403896816196975, 0.25901721414674228,
    0.41285567204161078,  0.49646972204699857, 0.50353027795300143,
    0.58714432795838944,  0.74098278585325694, 0.86596103183803086,
    0.93752088559444813};

}  // namespace

double sigmoid_chebyshev(double x) {
  if (x < -5.0) return 0.0;
  if (x >= 5.0) return 1.0;
  const int idx = static_cast<int>(std::floor(x + 5.0));
  const int i = std::clamp(idx, 0, 9);
  return kChebSlope[i] * x + kChebIntercept[i];
}

double sigmoid_variant(double x, SigmoidKind kind) {
  switch (kind) {
    case SigmoidKind::Exact:
      return sigmoid_exact(x);
    case SigmoidKind::SecureML:
      return sigmoid_secureml(x);
    case SigmoidKind::Chebyshev:
      return sigmoid_chebyshev(x);
  }
  return 0.0;
}

namespace {

double row_dot(const Matrix& X, std::size_t row,
               const std::vector<double>& theta) {
  double s = 0.0;
  for (std::size_t k = 0; k < X.cols; ++k) {
    s += X.at(row, k) * theta[k];
  }
  return s;
}

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) {
      throw NonFiniteError(std::string(what) + " became non-finite");
    }
  }
}

}  // namespace

std::vector<double> bce_gradient(const Dataset& D,
                                 const std::vector<std::size_t>& idx,
                                 const std::vector<double>& theta,
                                 SigmoidKind kind) {
  std::vector<double> g(D.d(), 0.0);
  for (std::size_t i : idx) {
    const double s = sigmoid_variant(row_dot(D.X, i, theta), kind);
    const double r = s - static_cast<double>(D.y[i]);
    for (std::size_t k = 0; k < D.d(); ++k) {
      g[k] += D.X.at(i, k) * r;
    }
  }
  for (double& v : g) v /= static_cast<double>(idx.size());
  return g;
}

double bce_loss(const Dataset& D, const std::vector<std::size_t>& idx,
                const std::vector<double>& theta) {
  double loss = 0.0;
  for (std::size_t i : idx) {
    const double m = row_dot(D.X, i, theta);
    // log(1 + e^m) - y*m, computed stably.
    const double lse = m > 0.0 ? m + std::log1p(std::exp(-m))
                               : std::log1p(std::exp(m));
    loss += lse - static_cast<double>(D.y[i]) * m;
  }
  return loss / static_cast<double>(idx.size());
}

double barrier_value(const Matrix& A, const std::vector<double>& theta,
                     const std::vector<double>& c, double t) {
  double v = 0.0;
  for (std::size_t j = 0; j < A.rows; ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < A.cols; ++k) {
      dot += A.at(j, k) * theta[k];
    }
    if (std::abs(dot) >= c[j]) {
      throw BarrierDomainError("constraint " + std::to_string(j) +
                               " at the barrier boundary");
    }
    v -= (std::log(dot + c[j]) + std::log(c[j] - dot)) / t;
  }
  return v;
}

std::vector<double> barrier_gradient(const Matrix& A,
                                     const std::vector<double>& theta,
                                     const std::vector<double>& c, double t) {
  std::vector<double> g(A.cols, 0.0);
  for (std::size_t j = 0; j < A.rows; ++j) {
    double dot = 0.0;
    for (std::size_t k = 0; k < A.cols; ++k) {
      dot += A.at(j, k) * theta[k];
    }
    if (std::abs(dot) >= c[j]) {
      throw BarrierDomainError("constraint " + std::to_string(j) +
                               " at the barrier boundary");
    }
    const double coeff = (1.0 / (c[j] - dot) - 1.0 / (dot + c[j])) / t;
    for (std::size_t k = 0; k < A.cols; ++k) {
      g[k] += coeff * A.at(j, k);
    }
  }
  return g;
}

namespace {

std::vector<int> predict_rows(const Matrix& X,
                              const std::vector<double>& theta) {
  std::vector<int> yhat(X.rows);
  for (std::size_t i = 0; i < X.rows; ++i) {
    yhat[i] = row_dot(X, i, theta) >= 0.0 ? 1 : 0;
  }
  return yhat;
}

double train_accuracy(const Dataset& D, const std::vector<double>& theta) {
  const auto yhat = predict_rows(D.X, theta);
  std::size_t ok = 0;
  for (std::size_t i = 0; i < D.n(); ++i) {
    ok += yhat[i] == D.y[i];
  }
  return static_cast<double>(ok) / static_cast<double>(D.n());
}

EpochTraceRow trace_row(const Dataset& D, const Matrix& A,
                        const std::vector<double>& theta,
                        const std::vector<double>& lambda,
                        const std::vector<double>& c, std::size_t epoch) {
  EpochTraceRow row{};
  row.epoch = epoch;
  std::vector<std::size_t> all(D.n());
  for (std::size_t i = 0; i < D.n(); ++i) all[i] = i;
  row.loss = bce_loss(D, all, theta);
  row.accuracy = train_accuracy(D, theta);
  const auto F = fairness_value(A, theta, c);
  row.max_constraint = *std::max_element(F.begin(), F.end());
  double l2 = 0.0;
  for (double l : lambda) l2 += l * l;
  row.lambda_norm = std::sqrt(l2);
  const auto yhat = predict_rows(D.X, theta);
  std::size_t n0 = 0, n1 = 0, pos0 = 0, pos1 = 0;
  for (std::size_t i = 0; i < D.n(); ++i) {
    if (D.Z.at(i, 0) >= 0.5) {
      n1 += 1;
      pos1 += yhat[i];
    } else {
      n0 += 1;
      pos0 += yhat[i];
    }
  }
  row.rate_z0 = n0 ? static_cast<double>(pos0) / n0 : 0.0;
  row.rate_z1 = n1 ? static_cast<double>(pos1) / n1 : 0.0;
  return row;
}

}  // namespace

TrainResult train_lagrange(const Dataset& D, const TrainingConfig& cfg) {
  const std::size_t n = D.n(), d = D.d(), p = D.p();
  const std::size_t B = std::size_t{1} << cfg.batch_exp;
  const std::size_t epochs = cfg.resolved_epochs(n);
  const Matrix A = constraint_matrix(D);

  TrainResult res;
  res.params.theta.assign(d, 0.0);
  res.params.lambda.assign(p, 0.0);
  auto& theta = res.params.theta;
  auto& lambda = res.params.lambda;

  for (std::size_t j = 0; j < epochs; ++j) {
    const double xi_bce =
        static_cast<double>(epochs) / static_cast<double>(epochs + j);
    const double xi_con =
        static_cast<double>(epochs + 10 * j) / static_cast<double>(epochs);
    const auto perm = minibatch_permutation(cfg.seed, j, n);
    for (std::size_t t = 0; t < n / B; ++t) {
      std::vector<double> u(p, 0.0);
      for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t k = 0; k < d; ++k) {
          u[q] += A.at(q, k) * theta[k];
        }
      }
      std::vector<double> F(p);
      for (std::size_t q = 0; q < p; ++q) {
        F[q] = std::abs(u[q]) - cfg.c[q];
      }

      std::vector<std::size_t> idx(perm.begin() + t * B,
                                   perm.begin() + (t + 1) * B);
      const auto g_bce = bce_gradient(D, idx, theta, cfg.sigmoid);

      std::vector<double> g_con(d, 0.0);
      for (std::size_t q = 0; q < p; ++q) {
        if (F[q] > 0.0) {
          const double s = u[q] >= 0.0 ? 1.0 : -1.0;
          for (std::size_t k = 0; k < d; ++k) {
            g_con[k] += s * lambda[q] * A.at(q, k);
          }
        }
      }

      for (std::size_t k = 0; k < d; ++k) {
        theta[k] -= cfg.eta_theta * (xi_bce * g_bce[k] + xi_con * g_con[k]);
      }
      for (std::size_t q = 0; q < p; ++q) {
        lambda[q] =
            std::max(lambda[q] + cfg.eta_lambda * std::max(F[q], 0.0), 0.0);
      }
    }
    check_finite(theta, "theta");
    res.trace.push_back(trace_row(D, A, theta, lambda, cfg.c, j));
  }
  return res;
}

TrainResult train_projected(const Dataset& D, const TrainingConfig& cfg) {
  const std::size_t n = D.n(), d = D.d(), p = D.p();
  const std::size_t B = std::size_t{1} << cfg.batch_exp;
  const std::size_t epochs = cfg.resolved_epochs(n);
  const Matrix A = constraint_matrix(D);

  TrainResult res;
  res.params.theta.assign(d, 0.0);
  res.params.lambda.assign(p, 0.0);
  auto& theta = res.params.theta;

  for (std::size_t j = 0; j < epochs; ++j) {
    const auto perm = minibatch_permutation(cfg.seed, j, n);
    for (std::size_t t = 0; t < n / B; ++t) {
      std::vector<std::size_t> idx(perm.begin() + t * B,
                                   perm.begin() + (t + 1) * B);
      auto g = bce_gradient(D, idx, theta, cfg.sigmoid);

      // Active constraint rows.
      std::vector<std::size_t> active;
      for (std::size_t q = 0; q < p; ++q) {
        double dot = 0.0;
        for (std::size_t k = 0; k < d; ++k) dot += A.at(q, k) * theta[k];
        if (std::abs(dot) - cfg.c[q] > 0.0) active.push_back(q);
      }

      if (!active.empty()) {
        const std::size_t m = active.size();
        // G = Ahat Ahat^T, solve G w = Ahat g, then g <- g - Ahat^T w.
        std::vector<double> G(m * m, 0.0), rhs(m, 0.0);
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t b = 0; b < m; ++b) {
            for (std::size_t k = 0; k < d; ++k) {
              G[a * m + b] += A.at(active[a], k) * A.at(active[b], k);
            }
          }
          for (std::size_t k = 0; k < d; ++k) {
            rhs[a] += A.at(active[a], k) * g[k];
          }
        }
        // Gaussian elimination with partial pivoting; the pivot threshold
        // stands in for a condition-number cutoff of 1e12.
        double scale = 0.0;
        for (std::size_t a = 0; a < m; ++a) {
          scale = std::max(scale, std::abs(G[a * m + a]));
        }
        for (std::size_t col = 0; col < m; ++col) {
          std::size_t piv = col;
          for (std::size_t r = col + 1; r < m; ++r) {
            if (std::abs(G[r * m + col]) > std::abs(G[piv * m + col])) piv = r;
          }
          if (std::abs(G[piv * m + col]) < scale * 1e-12) {
            throw SingularProjection("active-set Gram matrix is singular");
          }
          if (piv != col) {
            for (std::size_t k = 0; k < m; ++k) {
              std::swap(G[piv * m + k], G[col * m + k]);
            }
            std::swap(rhs[piv], rhs[col]);
          }
          for (std::size_t r = col + 1; r < m; ++r) {
            const double f = G[r * m + col] / G[col * m + col];
            for (std::size_t k = col; k < m; ++k) {
              G[r * m + k] -= f * G[col * m + k];
            }
            rhs[r] -= f * rhs[col];
          }
        }
        std::vector<double> w(m, 0.0);
        for (std::size_t col = m; col-- > 0;) {
          double s = rhs[col];
          for (std::size_t k = col + 1; k < m; ++k) {
            s -= G[col * m + k] * w[k];
          }
          w[col] = s / G[col * m + col];
        }
        for (std::size_t a = 0; a < m; ++a) {
          for (std::size_t k = 0; k < d; ++k) {
            g[k] -= A.at(active[a], k) * w[a];
          }
        }
      }

      for (std::size_t k = 0; k < d; ++k) {
        theta[k] -= cfg.eta_theta * g[k];
      }
    }
    check_finite(theta, "theta");
    res.trace.push_back(
        trace_row(D, A, theta, res.params.lambda, cfg.c, j));
  }
  return res;
}

TrainResult train_iplb(const Dataset& D, const TrainingConfig& cfg) {
  const std::size_t n = D.n(), d = D.d();
  const std::size_t B = std::size_t{1} << cfg.batch_exp;
  const std::size_t epochs = cfg.resolved_epochs(n);
  const Matrix A = constraint_matrix(D);
  for (double cj : cfg.c) {
    if (cj <= 0.0) {
      throw BarrierDomainError("theta = 0 is infeasible for c <= 0");
    }
  }

  TrainResult res;
  res.params.theta.assign(d, 0.0);
  res.params.lambda.assign(D.p(), 0.0);
  auto& theta = res.params.theta;

  double t_barrier = 1.0;
  constexpr double kTCap = 1099511627776.0;  // 2^40, avoids overflow
  for (std::size_t j = 0; j < epochs; ++j) {
    const auto perm = minibatch_permutation(cfg.seed, j, n);
    for (std::size_t t = 0; t < n / B; ++t) {
      std::vector<std::size_t> idx(perm.begin() + t * B,
                                   perm.begin() + (t + 1) * B);
      auto g = bce_gradient(D, idx, theta, cfg.sigmoid);
      const auto gb = barrier_gradient(A, theta, cfg.c, t_barrier);
      for (std::size_t k = 0; k < d; ++k) {
        theta[k] -= cfg.eta_theta * (g[k] + gb[k]);
      }
    }
    check_finite(theta, "theta");
    res.trace.push_back(
        trace_row(D, A, theta, res.params.lambda, cfg.c, j));
    t_barrier = std::min(t_barrier * 2.0, kTCap);
  }
  return res;
}

// --- Fixed-point mirror ------------------------------------------------------

namespace {

int log2_exact(std::size_t x) {
  int s = 0;
  while ((std::size_t{1} << s) < x) ++s;
  return s;
}

inline std::uint8_t fx_msb(Ring v) {
  return static_cast<std::uint8_t>(v >> 63);
}

inline Ring fx_relu(Ring v) { return fx_msb(v) ? 0 : v; }

// b + c*(a - b) with c a 0/1 bit, mirroring the secure select.
inline Ring fx_select(std::uint8_t c, Ring a, Ring b) {
  return b + Ring{c} * (a - b);
}

Ring fx_sigmoid_pw(Ring z, const FxConfig& fx) {
  const Ring half = fx_encode(0.5, fx);
  const Ring one = fx_encode(1.0, fx);
  const Ring t = z + half;
  const std::uint8_t b_lo = fx_msb(t);
  const std::uint8_t b_hi = fx_msb(one - t);
  const Ring inner = fx_select(b_hi, one, t);
  return fx_select(b_lo, 0, inner);
}

}  // namespace

RingMatrix constraint_matrix_fx(const FxDataset& D, std::size_t block,
                                const FxConfig& fx) {
  const std::size_t n = D.X.rows, d = D.X.cols, p = D.Z.cols;
  if (block == 0 || (block & (block - 1)) != 0 || n % block != 0) {
    throw BlockSizeError("constraint_matrix_fx: block must be a power of two "
                         "dividing n");
  }
  const int ln = log2_exact(n);
  const int lb = log2_exact(block);
  const int lr = log2_exact(n / block);

  // Column means of Z by shift; centering is exact ring subtraction.
  std::vector<Ring> zbar(p, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      zbar[j] += D.Z.at(i, j);
    }
  }
  for (Ring& v : zbar) v = rescale_round(v, ln);

  RingMatrix acc(p, d);
  for (std::size_t t = 0; t < n / block; ++t) {
    for (std::size_t j = 0; j < p; ++j) {
      for (std::size_t k = 0; k < d; ++k) {
        Ring raw = 0;
        for (std::size_t i = 0; i < block; ++i) {
          const Ring zc = D.Z.at(t * block + i, j) - zbar[j];
          raw += zc * D.X.at(t * block + i, k);
        }
        Ring e = rescale_round(raw, fx.frac_bits);
        e = rescale_round(e, lb);
        acc.at(j, k) += e;
      }
    }
  }
  for (Ring& v : acc.v) v = rescale_round(v, lr);
  return acc;
}

FxTrainResult train_lagrange_fx(const FxDataset& D, const TrainingConfig& cfg,
                                const FxConfig& fx) {
  const std::size_t n = D.X.rows, d = D.X.cols, p = D.Z.cols;
  const std::size_t B = std::size_t{1} << cfg.batch_exp;
  const std::size_t epochs = cfg.resolved_epochs(n);
  const int fb = fx.frac_bits;

  const RingMatrix A = constraint_matrix_fx(D, cfg.block, fx);
  std::vector<Ring> c_ring(p);
  for (std::size_t q = 0; q < p; ++q) {
    c_ring[q] = fx_encode(cfg.c[q], fx);
  }
  const Ring el = fx_encode(cfg.eta_lambda, fx);

  FxTrainResult res;
  res.params.theta.assign(d, 0);
  res.params.lambda.assign(p, 0);
  auto& theta = res.params.theta;
  auto& lambda = res.params.lambda;

  // Float view for the per-epoch trace only; the update path is pure ring.
  Dataset Df;
  Df.X = Matrix(n, d);
  Df.Z = Matrix(n, p);
  Df.y.resize(n);
  for (std::size_t i = 0; i < n * d; ++i) Df.X.v[i] = fx_decode(D.X.v[i], fx);
  for (std::size_t i = 0; i < n * p; ++i) Df.Z.v[i] = fx_decode(D.Z.v[i], fx);
  for (std::size_t i = 0; i < n; ++i) {
    Df.y[i] = fx_decode(D.y[i], fx) >= 0.5 ? 1 : 0;
  }
  const Matrix Af = constraint_matrix(Df);

  for (std::size_t j = 0; j < epochs; ++j) {
    const double xi_bce =
        static_cast<double>(epochs) / static_cast<double>(epochs + j);
    const double xi_con =
        static_cast<double>(epochs + 10 * j) / static_cast<double>(epochs);
    const Ring eb = fx_encode(cfg.eta_theta * xi_bce, fx);
    const Ring ec = fx_encode(cfg.eta_theta * xi_con, fx);
    const auto perm = minibatch_permutation(cfg.seed, j, n);

    for (std::size_t t = 0; t < n / B; ++t) {
      // u = A theta, one rescale per entry.
      std::vector<Ring> u(p, 0);
      for (std::size_t q = 0; q < p; ++q) {
        Ring raw = 0;
        for (std::size_t k = 0; k < d; ++k) {
          raw += A.at(q, k) * theta[k];
        }
        u[q] = rescale_round(raw, fb);
      }

      std::vector<std::uint8_t> sign(p), act(p);
      std::vector<Ring> F(p), gl(p);
      for (std::size_t q = 0; q < p; ++q) {
        sign[q] = fx_msb(u[q]);
        const Ring absu = u[q] - 2 * (Ring{sign[q]} * u[q]);
        F[q] = absu - c_ring[q];
        gl[q] = fx_relu(F[q]);
        act[q] = fx_msb(ring_neg(F[q]));
      }

      // sigma = piecewise sigmoid of the minibatch logits.
      std::vector<Ring> dvec(B);
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t row = perm[t * B + b];
        Ring raw = 0;
        for (std::size_t k = 0; k < d; ++k) {
          raw += D.X.at(row, k) * theta[k];
        }
        const Ring z = rescale_round(raw, fb);
        dvec[b] = fx_sigmoid_pw(z, fx) - D.y[row];
      }

      // BCE gradient: X_batch^T dvec, rescaled, then averaged by shift.
      std::vector<Ring> g_bce(d);
      for (std::size_t k = 0; k < d; ++k) {
        Ring raw = 0;
        for (std::size_t b = 0; b < B; ++b) {
          raw += D.X.at(perm[t * B + b], k) * dvec[b];
        }
        g_bce[k] = rescale_round(rescale_round(raw, fb), cfg.batch_exp);
      }

      // Constraint gradient: active * sign * lambda_q * a_q.
      std::vector<Ring> g_con(d, 0);
      for (std::size_t q = 0; q < p; ++q) {
        const Ring g =
            Ring{act[q]} - 2 * (Ring{act[q]} * Ring{sign[q]});
        const Ring lg = lambda[q] * g;
        for (std::size_t k = 0; k < d; ++k) {
          g_con[k] += rescale_round(lg * A.at(q, k), fb);
        }
      }

      for (std::size_t k = 0; k < d; ++k) {
        theta[k] -= rescale_round(eb * g_bce[k], fb);
        theta[k] -= rescale_round(ec * g_con[k], fb);
      }
      for (std::size_t q = 0; q < p; ++q) {
        lambda[q] = fx_relu(lambda[q] + rescale_round(el * gl[q], fb));
      }
    }

    std::vector<double> theta_f(d), lambda_f(p);
    for (std::size_t k = 0; k < d; ++k) theta_f[k] = fx_decode(theta[k], fx);
    for (std::size_t q = 0; q < p; ++q) lambda_f[q] = fx_decode(lambda[q], fx);
    res.trace.push_back(trace_row(Df, Af, theta_f, lambda_f, cfg.c, j));
  }
  return res;
}

// --- Evaluation --------------------------------------------------------------

std::vector<int> predict(const Matrix& X, const std::vector<double>& theta) {
  return predict_rows(X, theta);
}

FairnessReport evaluate(const Dataset& D_test,
                        const std::vector<double>& theta) {
  if (D_test.n() == 0) {
    throw EmptyDataset("evaluate: empty test set");
  }
  const auto yhat = predict_rows(D_test.X, theta);
  FairnessReport rep;
  std::size_t correct = 0;
  for (std::size_t i = 0; i < D_test.n(); ++i) {
    correct += yhat[i] == D_test.y[i];
  }
  rep.accuracy = static_cast<double>(correct) / D_test.n();

  for (std::size_t col = 0; col < D_test.p(); ++col) {
    FairnessReport::GroupMetrics gm;
    // Per group g: confusion counts.
    std::size_t cnt[2] = {0, 0}, pos[2] = {0, 0}, tp[2] = {0, 0},
                fp[2] = {0, 0}, tn[2] = {0, 0}, fn[2] = {0, 0};
    for (std::size_t i = 0; i < D_test.n(); ++i) {
      const int g = D_test.Z.at(i, col) >= 0.5 ? 1 : 0;
      cnt[g] += 1;
      pos[g] += yhat[i];
      if (yhat[i] == 1 && D_test.y[i] == 1) tp[g] += 1;
      if (yhat[i] == 1 && D_test.y[i] == 0) fp[g] += 1;
      if (yhat[i] == 0 && D_test.y[i] == 0) tn[g] += 1;
      if (yhat[i] == 0 && D_test.y[i] == 1) fn[g] += 1;
    }
    auto ratio = [](std::size_t num, std::size_t den) -> std::optional<double> {
      if (den == 0) return std::nullopt;
      return static_cast<double>(num) / static_cast<double>(den);
    };
    auto gap = [](std::optional<double> a,
                  std::optional<double> b) -> std::optional<double> {
      if (!a || !b) return std::nullopt;
      return std::abs(*a - *b);
    };
    const auto ar0 = ratio(pos[0], cnt[0]), ar1 = ratio(pos[1], cnt[1]);
    gm.ar_gap = gap(ar0, ar1);
    gm.acc_gap = gap(ratio(tp[0] + tn[0], cnt[0]), ratio(tp[1] + tn[1], cnt[1]));
    gm.tpr_gap = gap(ratio(tp[0], tp[0] + fn[0]), ratio(tp[1], tp[1] + fn[1]));
    gm.tnr_gap = gap(ratio(tn[0], tn[0] + fp[0]), ratio(tn[1], tn[1] + fp[1]));
    gm.ppv_gap = gap(ratio(tp[0], tp[0] + fp[0]), ratio(tp[1], tp[1] + fp[1]));
    gm.npv_gap = gap(ratio(tn[0], tn[0] + fn[0]), ratio(tn[1], tn[1] + fn[1]));
    gm.rate_z0 = ar0.value_or(0.0);
    gm.rate_z1 = ar1.value_or(0.0);
    if (ar0 && ar1) {
      if (*ar0 == 0.0 && *ar1 == 0.0) {
        gm.p_percent = std::nullopt;
      } else {
        const double hi = std::max(*ar0, *ar1);
        const double lo = std::min(*ar0, *ar1);
        gm.p_percent = lo / hi;
      }
    }
    rep.groups.push_back(gm);
  }
  return rep;
}

void write_trace_csv(const std::string& path,
                     const std::vector<EpochTraceRow>& trace) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) {
    throw IOError("cannot create " + path);
  }
  std::fprintf(f, "epoch,loss,accuracy,max_constraint,lambda_norm,"
                  "rate_z0,rate_z1\n");
  for (const auto& r : trace) {
    std::fprintf(f, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", r.epoch, r.loss,
                 r.accuracy, r.max_constraint, r.lambda_norm, r.rate_z0,
                 r.rate_z1);
  }
  std::fclose(f);
}

}  // namespace blindfair
