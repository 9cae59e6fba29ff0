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

// Fixed-point arithmetic over Z_{2^64}: the numeric substrate shared by the
// cleartext reference and the secure protocol. Reals are encoded as
// round(x * 2^frac_bits) in two's complement; add/sub/neg are exact ring
// operations and wraparound is the defined semantics.

#ifndef BLINDFAIR_FXP_HPP_
#define BLINDFAIR_FXP_HPP_

#include <cstdint>
#include <cstring>
#include <span>
#include <vector>

#include "blindfair/errors.hpp"

namespace blindfair {

// One element of Z_{2^64}. Signedness is an interpretation: values in
// [2^63, 2^64) decode as negatives.
using Ring = std::uint64_t;

struct FxConfig {
  int total_bits = 64;
  int frac_bits = 16;
  int int_bits = 16;

  bool valid() const {
    return total_bits == 64 && frac_bits >= 1 &&
           frac_bits + int_bits <= total_bits;
  }
  bool operator==(const FxConfig&) const = default;
};

inline Ring ring_add(Ring a, Ring b) { return a + b; }
inline Ring ring_sub(Ring a, Ring b) { return a - b; }
inline Ring ring_neg(Ring a) { return ~a + 1; }
inline Ring ring_mul(Ring a, Ring b) { return a * b; }

inline std::int64_t to_signed(Ring a) { return static_cast<std::int64_t>(a); }
inline Ring from_signed(std::int64_t a) { return static_cast<Ring>(a); }

// Encodes a real onto the fixed-point grid. Ties round half away from zero
// (the paper leaves this open; flagged in the docs).
Ring fx_encode(double x, const FxConfig& cfg);

double fx_decode(Ring e, const FxConfig& cfg);

// Fixed-point product with exact cleartext truncation: the full 128-bit
// product is arithmetically right-shifted by frac_bits (floor semantics).
Ring fx_mul_trunc(Ring a, Ring b, const FxConfig& cfg);

// Arithmetic right shift by s bits; division by 2^s rounding toward -inf.
inline Ring arith_shift(Ring a, int s) {
  return from_signed(to_signed(a) >> s);
}
inline Ring shift_divide(Ring a, int s) { return arith_shift(a, s); }

// Round-to-nearest rescale by frac_bits: shift with a half-ulp bias. Used by
// the training pipeline so repeated rescaling carries no directional drift.
inline Ring rescale_round(Ring raw, int frac_bits) {
  if (frac_bits <= 0) return raw;
  return arith_shift(raw + (Ring{1} << (frac_bits - 1)), frac_bits);
}

// Canonical serialization: 8 bytes little-endian per element, index order.
void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v);
std::uint64_t get_u64_le(const std::uint8_t* p);
std::vector<std::uint8_t> serialize_ring_vector(std::span<const Ring> v);

}  // namespace blindfair

#endif  // BLINDFAIR_FXP_HPP_
