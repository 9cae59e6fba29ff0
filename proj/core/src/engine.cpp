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

#include "blindfair/engine.hpp"

#include <cstring>
#include <string>

namespace blindfair {

namespace {

bool is_pow2(std::size_t x) { return x != 0 && (x & (x - 1)) == 0; }

int log2_exact(std::size_t x) {
  int s = 0;
  while ((std::size_t{1} << s) < x) ++s;
  return s;
}

std::vector<Ring> unpack_rings(const std::vector<std::uint8_t>& payload,
                               std::size_t expected) {
  if (payload.size() != expected * 8) {
    throw DimensionMismatch("peer sent " + std::to_string(payload.size()) +
                            " bytes, expected " + std::to_string(expected * 8));
  }
  std::vector<Ring> out(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    out[i] = get_u64_le(payload.data() + 8 * i);
  }
  return out;
}

void send_rings(PartyContext& ctx, FrameTag tag, std::span<const Ring> v) {
  ctx.channel->send(Frame{tag, serialize_ring_vector(v)});
}

std::vector<Ring> recv_rings(PartyContext& ctx, FrameTag tag,
                             std::size_t expected) {
  Frame f = ctx.channel->recv();
  if (f.tag == FrameTag::kAbort) {
    throw ProtocolAbort("peer aborted: " +
                        std::string(f.payload.begin(), f.payload.end()));
  }
  if (f.tag != tag) {
    throw UnknownTag("unexpected frame tag " +
                     std::to_string(static_cast<int>(f.tag)));
  }
  return unpack_rings(f.payload, expected);
}

// Symmetric exchange: both parties send their vector, then receive the
// peer's. Safe against deadlock because sends are buffered.
std::vector<Ring> exchange_rings(PartyContext& ctx, FrameTag tag,
                                 std::span<const Ring> mine) {
  send_rings(ctx, tag, mine);
  return recv_rings(ctx, tag, mine.size());
}

}  // namespace

void handshake(PartyContext& ctx) {
  if (ctx.triples && ctx.triples->run_id != ctx.run_id) {
    throw ConfigMismatch("triple store run_id does not match this run");
  }
  std::vector<std::uint8_t> payload;
  payload.push_back(static_cast<std::uint8_t>(kProtocolVersion & 0xff));
  payload.push_back(static_cast<std::uint8_t>(kProtocolVersion >> 8));
  payload.push_back(static_cast<std::uint8_t>(ctx.fx.total_bits));
  payload.push_back(static_cast<std::uint8_t>(ctx.fx.frac_bits));
  payload.push_back(static_cast<std::uint8_t>(ctx.fx.int_bits));
  payload.push_back(static_cast<std::uint8_t>(ctx.mode));
  payload.insert(payload.end(), ctx.run_id.begin(), ctx.run_id.end());
  put_u64_le(payload, ctx.public_seed);
  ctx.channel->send(Frame{FrameTag::kHandshake, payload});

  Frame f = ctx.channel->recv();
  if (f.tag != FrameTag::kHandshake || f.payload.size() != payload.size()) {
    throw VersionMismatch("malformed handshake from peer");
  }
  const std::uint16_t version =
      static_cast<std::uint16_t>(f.payload[0]) |
      (static_cast<std::uint16_t>(f.payload[1]) << 8);
  if (version != kProtocolVersion) {
    throw VersionMismatch("peer protocol version " + std::to_string(version));
  }
  if (std::memcmp(f.payload.data() + 2, payload.data() + 2,
                  payload.size() - 2) != 0) {
    throw ConfigMismatch("peer run parameters differ (fx/mode/run_id/seed)");
  }
}

SharedMatrix input_share_matrix(Role owner, const std::optional<RingMatrix>& M,
                                std::size_t rows, std::size_t cols,
                                PartyContext& ctx) {
  SharedMatrix out(rows, cols);
  const std::size_t count = rows * cols;
  if (ctx.role == owner) {
    if (!M || M->rows != rows || M->cols != cols) {
      throw DimensionMismatch("input_share_matrix: owner matrix missing or " +
                              std::to_string(rows) + "x" +
                              std::to_string(cols) + " expected");
    }
    std::vector<Ring> peer_shares(count);
    for (std::size_t i = 0; i < count; ++i) {
      const Ring r = ctx.private_rng();
      peer_shares[i] = r;
      out.v[i] = M->v[i] - r;
    }
    send_rings(ctx, FrameTag::kShareBatch, peer_shares);
  } else {
    if (M) {
      throw DimensionMismatch("input_share_matrix: non-owner supplied data");
    }
    out.v = recv_rings(ctx, FrameTag::kShareBatch, count);
  }
  return out;
}

std::vector<Ring> truncate_shares(std::span<const Ring> s, int bits,
                                  PartyContext& ctx, bool round_to_nearest) {
  std::vector<Ring> v(s.begin(), s.end());
  if (bits <= 0) {
    return v;
  }
  if (ctx.mode == TruncMode::Probabilistic) {
    // Party 2's negate-shift-negate contributes a +1/2 ulp carry on average,
    // so the local truncation is already centered on the round-to-nearest
    // value; adding the half constant here would bias it upward.
    for (Ring& x : v) x = prob_truncate(ctx.party(), x, bits);
    return v;
  }
  // The rounding bias is a public constant, so one party adds it.
  if (round_to_nearest && ctx.party() == 1) {
    const Ring half = Ring{1} << (bits - 1);
    for (Ring& x : v) x += half;
  }
  // Exact mode: party 1 reconstructs, shifts, and reshares. Test-only mode;
  // the value under truncation is revealed to party 1.
  if (ctx.party() == 2) {
    send_rings(ctx, FrameTag::kReconstruct, v);
    return recv_rings(ctx, FrameTag::kShareBatch, v.size());
  }
  const auto peer = recv_rings(ctx, FrameTag::kReconstruct, v.size());
  std::vector<Ring> reshare(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const Ring exact = arith_shift(v[i] + peer[i], bits);
    const Ring r = ctx.private_rng();
    reshare[i] = r;
    v[i] = exact - r;
  }
  send_rings(ctx, FrameTag::kShareBatch, reshare);
  return v;
}

std::vector<Ring> mul_elementwise(std::span<const Ring> x,
                                  std::span<const Ring> y, PartyContext& ctx,
                                  bool rescale) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("mul_elementwise: lane counts differ");
  }
  const std::size_t L = x.size();
  std::vector<Triple> ts(L);
  std::vector<Ring> ef(2 * L);
  for (std::size_t i = 0; i < L; ++i) {
    ts[i] = ctx.triples->next_scalar();
    ef[i] = x[i] - ts[i].a;
    ef[L + i] = y[i] - ts[i].b;
  }
  const auto peer = exchange_rings(ctx, FrameTag::kBeaverEF, ef);
  std::vector<Ring> z(L);
  for (std::size_t i = 0; i < L; ++i) {
    const Ring e = ef[i] + peer[i];
    const Ring f = ef[L + i] + peer[L + i];
    z[i] = f * ts[i].a + e * ts[i].b + ts[i].c;
    if (ctx.party() == 2) {
      z[i] += e * f;
    }
  }
  if (rescale) {
    z = truncate_shares(z, ctx.fx.frac_bits, ctx, true);
  }
  return z;
}

namespace {

// Raw ring product of shared matrices via one matrix triple; no rescale.
SharedMatrix matmul_raw(const SharedMatrix& A, const SharedMatrix& B,
                        PartyContext& ctx) {
  if (A.cols != B.rows) {
    throw DimensionMismatch("secure_matmul: inner dimensions " +
                            std::to_string(A.cols) + " vs " +
                            std::to_string(B.rows));
  }
  const std::size_t n = A.rows, k = A.cols, m = B.cols;
  MatrixTriple t = ctx.triples->next_matrix(n, k, m);
  std::vector<Ring> ef(n * k + k * m);
  for (std::size_t i = 0; i < n * k; ++i) ef[i] = A.v[i] - t.A[i];
  for (std::size_t i = 0; i < k * m; ++i) ef[n * k + i] = B.v[i] - t.B[i];
  const auto peer = exchange_rings(ctx, FrameTag::kBeaverEF, ef);
  std::vector<Ring> E(n * k), F(k * m);
  for (std::size_t i = 0; i < n * k; ++i) E[i] = ef[i] + peer[i];
  for (std::size_t i = 0; i < k * m; ++i) F[i] = ef[n * k + i] + peer[n * k + i];

  SharedMatrix Z(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      const Ring eij = E[i * k + j];
      const Ring aij = t.A[i * k + j];
      for (std::size_t l = 0; l < m; ++l) {
        Z.v[i * m + l] += eij * t.B[j * m + l] + aij * F[j * m + l];
      }
    }
  }
  for (std::size_t i = 0; i < n * m; ++i) Z.v[i] += t.C[i];
  if (ctx.party() == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < k; ++j) {
        const Ring eij = E[i * k + j];
        for (std::size_t l = 0; l < m; ++l) {
          Z.v[i * m + l] += eij * F[j * m + l];
        }
      }
    }
  }
  return Z;
}

}  // namespace

SharedMatrix secure_matmul_raw(const SharedMatrix& A, const SharedMatrix& B,
                               PartyContext& ctx) {
  return matmul_raw(A, B, ctx);
}

SharedMatrix secure_matmul(const SharedMatrix& A, const SharedMatrix& B,
                           PartyContext& ctx) {
  SharedMatrix Z = matmul_raw(A, B, ctx);
  Z.v = truncate_shares(Z.v, ctx.fx.frac_bits, ctx, true);
  return Z;
}

SharedMatrix blocked_mult_shift_avg(const SharedMatrix& Zt,
                                    const SharedMatrix& X, std::size_t block,
                                    PartyContext& ctx) {
  const std::size_t p = Zt.rows, n = Zt.cols, d = X.cols;
  if (X.rows != n) {
    throw DimensionMismatch("blocked_mult_shift_avg: inner dimension");
  }
  if (!is_pow2(block) || !is_pow2(n) || n % block != 0) {
    throw BlockSizeError("blocked_mult_shift_avg: n=" + std::to_string(n) +
                         " block=" + std::to_string(block));
  }
  const int lb = log2_exact(block);
  const int lr = log2_exact(n / block);
  SharedMatrix acc(p, d);
  for (std::size_t t = 0; t < n / block; ++t) {
    SharedMatrix zb(p, block), xb(block, d);
    for (std::size_t i = 0; i < p; ++i) {
      for (std::size_t j = 0; j < block; ++j) {
        zb.at(i, j) = Zt.at(i, t * block + j);
      }
    }
    for (std::size_t j = 0; j < block; ++j) {
      for (std::size_t l = 0; l < d; ++l) {
        xb.at(j, l) = X.at(t * block + j, l);
      }
    }
    SharedMatrix prod = matmul_raw(zb, xb, ctx);
    prod.v = truncate_shares(prod.v, ctx.fx.frac_bits, ctx, true);
    prod.v = truncate_shares(prod.v, lb, ctx, true);
    for (std::size_t i = 0; i < p * d; ++i) acc.v[i] += prod.v[i];
  }
  acc.v = truncate_shares(acc.v, lr, ctx, true);
  return acc;
}

std::optional<RingMatrix> reconstruct_to(Role target, const SharedMatrix& S,
                                         PartyContext& ctx) {
  if (ctx.role != target) {
    send_rings(ctx, FrameTag::kReconstruct, S.v);
    return std::nullopt;
  }
  const auto peer = recv_rings(ctx, FrameTag::kReconstruct, S.v.size());
  RingMatrix out(S.rows, S.cols);
  for (std::size_t i = 0; i < S.v.size(); ++i) {
    out.v[i] = S.v[i] + peer[i];
  }
  return out;
}

RingMatrix reconstruct_to_both(const SharedMatrix& S, PartyContext& ctx) {
  const auto peer = exchange_rings(ctx, FrameTag::kReconstruct, S.v);
  RingMatrix out(S.rows, S.cols);
  for (std::size_t i = 0; i < S.v.size(); ++i) {
    out.v[i] = S.v[i] + peer[i];
  }
  return out;
}

// --- Triple accounting -------------------------------------------------------

void TripleBudget::add_matrix(std::size_t n, std::size_t k, std::size_t m,
                              std::size_t count) {
  if (count == 0) return;
  const TripleShape shape{n, k, m};
  for (auto& [s, c] : matrix) {
    if (s == shape) {
      c += count;
      return;
    }
  }
  matrix.emplace_back(shape, count);
}

TripleBudget& TripleBudget::operator+=(const TripleBudget& o) {
  scalar += o.scalar;
  and_bits += o.and_bits;
  for (const auto& [s, c] : o.matrix) {
    add_matrix(std::get<0>(s), std::get<1>(s), std::get<2>(s), c);
  }
  return *this;
}

// Per training step (batch B = 2^s, p constraints, d features):
//   scalar: abs 2p, relu(F) 2p, active/sign conversions 4p, lambda
//           products p, constraint outer product pd, sigmoid 4B,
//           lambda relu 2p  -> 10p + pd + 4B
//   AND:    abs 125p, relu 125p, active msb 125p, lambda relu 125p,
//           sigmoid 250B    -> 500p + 250B
//   matrix: (p,d,1), (B,d,1), (d,B,1) once each
// plus n/block triples of shape (p,block,d) for the constraint matrix.
TripleBudget train_triple_budget(std::size_t n, std::size_t d, std::size_t p,
                                 int batch_exp, std::size_t epochs,
                                 std::size_t block) {
  const std::size_t B = std::size_t{1} << batch_exp;
  const std::size_t steps = epochs * (n / B);
  TripleBudget b;
  b.scalar = steps * (10 * p + p * d + 4 * B);
  b.and_bits = steps * (500 * p + 250 * B);
  b.add_matrix(p, block, d, n / block);
  b.add_matrix(p, d, 1, steps);
  b.add_matrix(B, d, 1, steps);
  b.add_matrix(d, B, 1, steps);
  return b;
}

TripleBudget certify_triple_budget(std::size_t n, std::size_t d,
                                   std::size_t p, std::size_t block) {
  TripleBudget b;
  b.scalar = 2 * p;               // abs conversion + product
  b.and_bits = 250 * p + (p - 1);  // abs msb, active msb, OR tree
  b.add_matrix(p, block, d, n / block);
  b.add_matrix(p, d, 1, 1);
  return b;
}

TripleBudget verify_triple_budget(std::size_t d) {
  TripleBudget b;
  b.and_bits = 125;  // one sign extraction
  b.add_matrix(1, d, 1, 1);
  return b;
}

}  // namespace blindfair
