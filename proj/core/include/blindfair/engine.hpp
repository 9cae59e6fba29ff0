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

// Two-party protocol runtime: party context, handshake, secure linear
// algebra on additively shared matrices, and reconstruction-to-one-party.
// Each party runs this code in its own thread/process; all secure ops are
// blocking and strictly ordered (lockstep with the peer).

#ifndef BLINDFAIR_ENGINE_HPP_
#define BLINDFAIR_ENGINE_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "blindfair/fxp.hpp"
#include "blindfair/rng.hpp"
#include "blindfair/shares.hpp"
#include "blindfair/transport.hpp"

namespace blindfair {

enum class Role : std::uint8_t { Modeler = 1, Regulator = 2 };

// Truncation after fixed-point multiplications:
//   Exact         - reconstruct-shift-reshare; bit-reproducible against the
//                   cleartext fixed-point reference (test mode: the value
//                   being truncated is revealed to party 1).
//   Probabilistic - local share truncation per the preprocessing model;
//                   +/- 1 ulp error, the faithful protocol.
enum class TruncMode : std::uint8_t { Exact = 0, Probabilistic = 1 };

struct PartyContext {
  Role role;
  Channel* channel;
  TripleStore* triples;
  FxConfig fx;
  std::uint64_t public_seed = 0;
  std::array<std::uint8_t, 16> run_id{};
  TruncMode mode = TruncMode::Probabilistic;
  Prng private_rng{0};

  int party() const { return role == Role::Modeler ? 1 : 2; }
  Role peer() const {
    return role == Role::Modeler ? Role::Regulator : Role::Modeler;
  }
};

// Cleartext ring matrix, row-major.
struct RingMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Ring> v;

  RingMatrix() = default;
  RingMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}
  Ring& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  Ring at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// This party's additive shares of a matrix; both parties hold equal dims.
struct SharedMatrix {
  std::size_t rows = 0, cols = 0;
  std::vector<Ring> v;

  SharedMatrix() = default;
  SharedMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), v(r * c, 0) {}
  Ring& at(std::size_t i, std::size_t j) { return v[i * cols + j]; }
  Ring at(std::size_t i, std::size_t j) const { return v[i * cols + j]; }
};

// Confirms matching fx config, run_id and protocol version with the peer;
// throws VersionMismatch/ConfigMismatch otherwise. Must be the first
// exchange of a run (guards against triple reuse across runs).
void handshake(PartyContext& ctx);

// Exactly one party supplies M; both end up with shares reconstructing to M.
SharedMatrix input_share_matrix(Role owner, const std::optional<RingMatrix>& M,
                                std::size_t rows, std::size_t cols,
                                PartyContext& ctx);

// Elementwise Beaver product of two share vectors. If `rescale` is set the
// result is truncated by frac_bits (round-to-nearest, see TruncMode).
std::vector<Ring> mul_elementwise(std::span<const Ring> x,
                                  std::span<const Ring> y, PartyContext& ctx,
                                  bool rescale);

// Truncation of a batch of shares by `bits` (with rounding bias when
// `round_to_nearest`), honoring ctx.mode.
std::vector<Ring> truncate_shares(std::span<const Ring> s, int bits,
                                  PartyContext& ctx,
                                  bool round_to_nearest = true);

// Shared matrix product via one matrix triple, one rescale per output entry.
SharedMatrix secure_matmul(const SharedMatrix& A, const SharedMatrix& B,
                           PartyContext& ctx);

// Same, without the rescale (raw ring product); used for integer-valued
// factors such as arithmetic-converted bits.
SharedMatrix secure_matmul_raw(const SharedMatrix& A, const SharedMatrix& B,
                               PartyContext& ctx);

// (1/n) * Zt * X with the inner dimension split into blocks of b columns;
// each block product is rescaled and divided by b via shifts, blocks are
// summed, and the sum is shifted by log2(n/b). Requires n and b powers of
// two with b | n.
SharedMatrix blocked_mult_shift_avg(const SharedMatrix& Zt,
                                    const SharedMatrix& X, std::size_t block,
                                    PartyContext& ctx);

// Non-target party sends its shares; only the target learns the cleartext.
std::optional<RingMatrix> reconstruct_to(Role target, const SharedMatrix& S,
                                         PartyContext& ctx);

// Reveal shares to both parties (used for public verdict bits).
RingMatrix reconstruct_to_both(const SharedMatrix& S, PartyContext& ctx);

// --- Triple accounting -----------------------------------------------------
// Consumption is a pure function of dimensions and iteration counts, which
// lets the dealer precompute exactly the online budget.

struct TripleBudget {
  std::size_t scalar = 0;
  std::size_t and_bits = 0;
  std::vector<std::pair<TripleShape, std::size_t>> matrix;

  void add_matrix(std::size_t n, std::size_t k, std::size_t m,
                  std::size_t count);
  TripleBudget& operator+=(const TripleBudget& o);
};

TripleBudget train_triple_budget(std::size_t n, std::size_t d, std::size_t p,
                                 int batch_exp, std::size_t epochs,
                                 std::size_t block);
TripleBudget certify_triple_budget(std::size_t n, std::size_t d,
                                   std::size_t p, std::size_t block);
TripleBudget verify_triple_budget(std::size_t d);

}  // namespace blindfair

#endif  // BLINDFAIR_ENGINE_HPP_
