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

#include "blindfair/boolgadget.hpp"

#include <string>

namespace blindfair {

namespace {

BitVec exchange_bits(PartyContext& ctx, const BitVec& mine) {
  ctx.channel->send(Frame{FrameTag::kBitBatch, mine});
  Frame f = ctx.channel->recv();
  if (f.tag != FrameTag::kBitBatch) {
    throw UnknownTag("expected bit batch, got tag " +
                     std::to_string(static_cast<int>(f.tag)));
  }
  if (f.payload.size() != mine.size()) {
    throw DimensionMismatch("bit batch size mismatch");
  }
  return f.payload;
}

}  // namespace

BitVec xor_and_batch(std::span<const std::uint8_t> a,
                     std::span<const std::uint8_t> b, PartyContext& ctx) {
  if (a.size() != b.size()) {
    throw DimensionMismatch("xor_and_batch: lane counts differ");
  }
  const std::size_t L = a.size();
  std::vector<BitTriple> ts(L);
  BitVec masked(2 * L);
  for (std::size_t i = 0; i < L; ++i) {
    ts[i] = ctx.triples->next_and();
    masked[i] = a[i] ^ ts[i].a;
    masked[L + i] = b[i] ^ ts[i].b;
  }
  const BitVec peer = exchange_bits(ctx, masked);
  BitVec z(L);
  for (std::size_t i = 0; i < L; ++i) {
    const std::uint8_t d = masked[i] ^ peer[i];
    const std::uint8_t e = masked[L + i] ^ peer[L + i];
    z[i] = (d & ts[i].b) ^ (e & ts[i].a) ^ ts[i].c;
    if (ctx.party() == 2) {
      z[i] ^= d & e;
    }
  }
  return z;
}

BitVec msb_bits(std::span<const Ring> shares, PartyContext& ctx) {
  const std::size_t L = shares.size();
  // The secret is the sum of the two parties' shares; its bit 63 comes from
  // ripple-carry addition over the privately known share bits. Party 1's
  // share bits are xor-shared as (bit, 0), party 2's as (0, bit).
  auto a_bit = [&](std::size_t lane, int k) -> std::uint8_t {
    if (ctx.party() != 1) return 0;
    return static_cast<std::uint8_t>((shares[lane] >> k) & 1);
  };
  auto b_bit = [&](std::size_t lane, int k) -> std::uint8_t {
    if (ctx.party() != 2) return 0;
    return static_cast<std::uint8_t>((shares[lane] >> k) & 1);
  };

  BitVec a0(L), b0(L);
  for (std::size_t i = 0; i < L; ++i) {
    a0[i] = a_bit(i, 0);
    b0[i] = b_bit(i, 0);
  }
  BitVec carry = xor_and_batch(a0, b0, ctx);

  for (int k = 1; k <= 62; ++k) {
    // carry' = (a&b) ^ ((a^b)&carry), both ANDs in one batch of 2L lanes.
    BitVec lhs(2 * L), rhs(2 * L);
    for (std::size_t i = 0; i < L; ++i) {
      const std::uint8_t ak = a_bit(i, k);
      const std::uint8_t bk = b_bit(i, k);
      lhs[i] = ak;
      rhs[i] = bk;
      lhs[L + i] = ak ^ bk;
      rhs[L + i] = carry[i];
    }
    const BitVec t = xor_and_batch(lhs, rhs, ctx);
    for (std::size_t i = 0; i < L; ++i) {
      carry[i] = t[i] ^ t[L + i];
    }
  }

  BitVec msb(L);
  for (std::size_t i = 0; i < L; ++i) {
    msb[i] = a_bit(i, 63) ^ b_bit(i, 63) ^ carry[i];
  }
  return msb;
}

BitVec secure_less_than(std::span<const Ring> x, std::span<const Ring> y,
                        PartyContext& ctx) {
  if (x.size() != y.size()) {
    throw DimensionMismatch("secure_less_than: lane counts differ");
  }
  std::vector<Ring> diff(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    diff[i] = x[i] - y[i];
  }
  return msb_bits(diff, ctx);
}

std::vector<Ring> bits_to_arith(std::span<const std::uint8_t> bits,
                                PartyContext& ctx) {
  const std::size_t L = bits.size();
  // b = b1 + b2 - 2*b1*b2 with b1*b2 a Beaver product of the one-sided
  // arithmetic lifts (b1, 0) and (0, b2).
  std::vector<Ring> u(L, 0), v(L, 0);
  for (std::size_t i = 0; i < L; ++i) {
    if (ctx.party() == 1) {
      u[i] = bits[i];
    } else {
      v[i] = bits[i];
    }
  }
  const auto w = mul_elementwise(u, v, ctx, false);
  std::vector<Ring> out(L);
  for (std::size_t i = 0; i < L; ++i) {
    out[i] = Ring{bits[i]} - 2 * w[i];
  }
  return out;
}

std::vector<Ring> secure_select(std::span<const std::uint8_t> c,
                                std::span<const Ring> a,
                                std::span<const Ring> b, PartyContext& ctx) {
  if (c.size() != a.size() || a.size() != b.size()) {
    throw DimensionMismatch("secure_select: lane counts differ");
  }
  const auto ca = bits_to_arith(c, ctx);
  std::vector<Ring> diff(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff[i] = a[i] - b[i];
  }
  // The selector is integer-valued, so the product needs no rescale.
  const auto t = mul_elementwise(ca, diff, ctx, false);
  std::vector<Ring> out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = b[i] + t[i];
  }
  return out;
}

std::vector<Ring> secure_relu(std::span<const Ring> x, PartyContext& ctx) {
  const BitVec sign = msb_bits(x, ctx);
  const auto sa = bits_to_arith(sign, ctx);
  const auto t = mul_elementwise(sa, x, ctx, false);
  std::vector<Ring> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    out[i] = x[i] - t[i];
  }
  return out;
}

BitVec secure_abs(std::span<const Ring> x, std::vector<Ring>& abs_out,
                  PartyContext& ctx) {
  const BitVec sign = msb_bits(x, ctx);
  const auto sa = bits_to_arith(sign, ctx);
  const auto t = mul_elementwise(sa, x, ctx, false);
  abs_out.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    abs_out[i] = x[i] - 2 * t[i];
  }
  return sign;
}

std::vector<Ring> secure_sigmoid_approx(std::span<const Ring> x,
                                        PartyContext& ctx) {
  const std::size_t L = x.size();
  const Ring half = fx_encode(0.5, ctx.fx);
  const Ring one = fx_encode(1.0, ctx.fx);

  // t = x + 1/2; low branch when t < 0, high branch when t > 1.
  std::vector<Ring> t(x.begin(), x.end());
  std::vector<Ring> u(L, 0);
  for (std::size_t i = 0; i < L; ++i) {
    if (ctx.party() == 1) {
      t[i] += half;
    }
    u[i] = ring_neg(t[i]);
    if (ctx.party() == 1) {
      u[i] += one;
    }
  }
  const BitVec b_lo = msb_bits(t, ctx);
  const BitVec b_hi = msb_bits(u, ctx);

  std::vector<Ring> ones(L, 0), zeros(L, 0);
  if (ctx.party() == 1) {
    for (Ring& v : ones) v = one;
  }
  const auto inner = secure_select(b_hi, ones, t, ctx);
  return secure_select(b_lo, zeros, inner, ctx);
}

GadgetTranscript transcript_delta(const ChannelStats& before,
                                  const ChannelStats& after) {
  return GadgetTranscript{after.rounds - before.rounds,
                          after.bytes_sent - before.bytes_sent};
}

}  // namespace blindfair
