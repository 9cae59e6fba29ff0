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

// Secure comparison and piecewise-linear gadgets on shared values, realized
// as GMW-style xor-shared Boolean circuits with dealer AND-triples. All
// gadgets are vectorized: the circuit is evaluated over all lanes at once so
// round counts depend only on the bit width, never on the data.

#ifndef BLINDFAIR_BOOLGADGET_HPP_
#define BLINDFAIR_BOOLGADGET_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "blindfair/engine.hpp"

namespace blindfair {

// This party's xor share of a batch of bits (secret bit = b1 ^ b2).
using BitVec = std::vector<std::uint8_t>;

// One round of batched AND gates on xor-shared bits.
BitVec xor_and_batch(std::span<const std::uint8_t> a,
                     std::span<const std::uint8_t> b, PartyContext& ctx);

// Most-significant bit (the two's-complement sign) of each reconstructed
// value, as xor-shared bits. Ripple-carry addition over the bit-decomposed
// arithmetic shares; 125 AND gates per lane.
BitVec msb_bits(std::span<const Ring> shares, PartyContext& ctx);

// I(x < y) per lane, via the sign of x - y. Callers guarantee |x - y| < 2^62
// so the subtraction never wraps.
BitVec secure_less_than(std::span<const Ring> x, std::span<const Ring> y,
                        PartyContext& ctx);

// Arithmetic shares of xor-shared bits: b = b1 + b2 - 2*b1*b2.
std::vector<Ring> bits_to_arith(std::span<const std::uint8_t> bits,
                                PartyContext& ctx);

// c ? a : b per lane, as b + c*(a - b) with an arithmetic bit conversion.
std::vector<Ring> secure_select(std::span<const std::uint8_t> c,
                                std::span<const Ring> a,
                                std::span<const Ring> b, PartyContext& ctx);

// max(x, 0) per lane.
std::vector<Ring> secure_relu(std::span<const Ring> x, PartyContext& ctx);

// |x| per lane; also returns the sign bits (reused by the constraint
// gradient's case split). abs_out reconstructs to -x where sign = 1.
BitVec secure_abs(std::span<const Ring> x, std::vector<Ring>& abs_out,
                  PartyContext& ctx);

// Piecewise-linear sigmoid: clamp(x + 1/2, 0, 1) at fixed-point resolution,
// with closed boundaries on the constant branches (x = -1/2 -> 0,
// x = +1/2 -> 1). Exact relative to the cleartext piecewise function.
std::vector<Ring> secure_sigmoid_approx(std::span<const Ring> x,
                                        PartyContext& ctx);

// Round/byte deltas of a gadget evaluation (from ChannelStats snapshots).
struct GadgetTranscript {
  std::uint64_t rounds = 0;
  std::uint64_t bytes_sent = 0;
};
GadgetTranscript transcript_delta(const ChannelStats& before,
                                  const ChannelStats& after);

}  // namespace blindfair

#endif  // BLINDFAIR_BOOLGADGET_HPP_
