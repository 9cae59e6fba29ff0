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

#include "blindfair/fxp.hpp"

#include <cmath>
#include <string>

namespace blindfair {

Ring fx_encode(double x, const FxConfig& cfg) {
  if (!std::isfinite(x)) {
    throw OverflowError("fx_encode: non-finite input");
  }
  const double bound = std::ldexp(1.0, cfg.int_bits);
  if (std::abs(x) >= bound) {
    throw OverflowError("fx_encode: |" + std::to_string(x) + "| >= 2^" +
                        std::to_string(cfg.int_bits));
  }
  const double scaled = x * std::ldexp(1.0, cfg.frac_bits);
  // Ties round half away from zero.
  const double rounded = scaled < 0.0 ? std::ceil(scaled - 0.5)
                                      : std::floor(scaled + 0.5);
  return from_signed(static_cast<std::int64_t>(rounded));
}

double fx_decode(Ring e, const FxConfig& cfg) {
  return static_cast<double>(to_signed(e)) * std::ldexp(1.0, -cfg.frac_bits);
}

Ring fx_mul_trunc(Ring a, Ring b, const FxConfig& cfg) {
  const __int128 prod =
      static_cast<__int128>(to_signed(a)) * static_cast<__int128>(to_signed(b));
  const __int128 shifted = prod >> cfg.frac_bits;
  const __int128 limit = static_cast<__int128>(1)
                         << (cfg.int_bits + cfg.frac_bits);
  if (shifted >= limit || shifted < -limit) {
    throw OverflowError("fx_mul_trunc: product out of representable range");
  }
  return from_signed(static_cast<std::int64_t>(shifted));
}

void put_u64_le(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
}

std::uint64_t get_u64_le(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) {
    v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  }
  return v;
}

std::vector<std::uint8_t> serialize_ring_vector(std::span<const Ring> v) {
  std::vector<std::uint8_t> out;
  out.reserve(v.size() * 8);
  for (Ring e : v) {
    put_u64_le(out, e);
  }
  return out;
}

}  // namespace blindfair
