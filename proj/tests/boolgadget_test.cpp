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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "blindfair/boolgadget.hpp"
#include "blindfair/engine.hpp"
#include "blindfair/rng.hpp"
#include "pair_harness.hpp"

using namespace blindfair;
using blindfair_tests::PairBudget;
using blindfair_tests::run_pair;

namespace {

const FxConfig kFx{};

// Shares a vector of secrets between the two contexts and runs `gadget` on
// both sides; returns the reconstructed ring outputs.
template <typename Gadget>
std::vector<Ring> run_gadget(const std::vector<Ring>& secrets,
                             const PairBudget& budget, std::uint64_t seed,
                             Gadget&& gadget) {
  const std::size_t L = secrets.size();
  RingMatrix M(L, 1);
  M.v = secrets;
  std::vector<Ring> out;
  run_pair(
      budget, seed,
      [&](PartyContext& ctx) {
        const auto s = input_share_matrix(Role::Modeler, M, L, 1, ctx);
        const auto r = gadget(s.v, ctx);
        SharedMatrix rm(r.size(), 1);
        rm.v = r;
        (void)reconstruct_to(Role::Regulator, rm, ctx);
      },
      [&](PartyContext& ctx) {
        const auto s =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        const auto r = gadget(s.v, ctx);
        SharedMatrix rm(r.size(), 1);
        rm.v = r;
        const auto back = reconstruct_to(Role::Regulator, rm, ctx);
        REQUIRE(back.has_value());
        out = back->v;
      });
  return out;
}

// XOR-shared bit gadgets: reveal via XOR of both parties' bits.
template <typename Gadget>
BitVec run_bit_gadget(const std::vector<Ring>& secrets,
                      const PairBudget& budget, std::uint64_t seed,
                      Gadget&& gadget) {
  const std::size_t L = secrets.size();
  RingMatrix M(L, 1);
  M.v = secrets;
  BitVec b1, b2;
  run_pair(
      budget, seed,
      [&](PartyContext& ctx) {
        const auto s = input_share_matrix(Role::Modeler, M, L, 1, ctx);
        b1 = gadget(s.v, ctx);
      },
      [&](PartyContext& ctx) {
        const auto s =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        b2 = gadget(s.v, ctx);
      });
  BitVec out(L);
  for (std::size_t i = 0; i < L; ++i) out[i] = b1[i] ^ b2[i];
  return out;
}

PairBudget msb_budget(std::size_t lanes) {
  PairBudget b;
  b.and_bits = 125 * lanes;
  return b;
}

}  // namespace

TEST_CASE("msb sign extraction: pinned and randomized") {
  Prng rng(301);
  std::vector<Ring> secrets{fx_encode(-1.0, kFx), fx_encode(1.0, kFx), 0};
  for (int i = 0; i < 10000; ++i) secrets.push_back(rng());
  const BitVec bits =
      run_bit_gadget(secrets, msb_budget(secrets.size()), 401,
                     [](std::span<const Ring> s, PartyContext& ctx) {
                       return msb_bits(s, ctx);
                     });
  CHECK(bits[0] == 1);
  CHECK(bits[1] == 0);
  CHECK(bits[2] == 0);
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    REQUIRE(bits[i] == static_cast<std::uint8_t>(secrets[i] >> 63));
  }
}

TEST_CASE("secure_less_than agrees with the cleartext comparator") {
  Prng rng(302);
  const std::size_t L = 10000;
  std::vector<Ring> x(L), y(L);
  for (std::size_t i = 0; i < L; ++i) {
    // Keep |x - y| < 2^62 so subtraction cannot wrap.
    x[i] = from_signed(static_cast<std::int64_t>(rng() % (1ull << 40)) -
                       (1ll << 39));
    y[i] = from_signed(static_cast<std::int64_t>(rng() % (1ull << 40)) -
                       (1ll << 39));
  }
  x[0] = fx_encode(0.2, kFx);
  y[0] = fx_encode(0.5, kFx);
  x[1] = y[1];  // strictness: x < x is false

  BitVec b1, b2;
  RingMatrix Mx(L, 1), My(L, 1);
  Mx.v = x;
  My.v = y;
  run_pair(
      msb_budget(L), 402,
      [&](PartyContext& ctx) {
        const auto xs = input_share_matrix(Role::Modeler, Mx, L, 1, ctx);
        const auto ys = input_share_matrix(Role::Regulator, std::nullopt, L,
                                           1, ctx);
        b1 = secure_less_than(xs.v, ys.v, ctx);
      },
      [&](PartyContext& ctx) {
        const auto xs =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        const auto ys = input_share_matrix(Role::Regulator, My, L, 1, ctx);
        b2 = secure_less_than(xs.v, ys.v, ctx);
      });
  CHECK((b1[0] ^ b2[0]) == 1);
  CHECK((b1[1] ^ b2[1]) == 0);
  for (std::size_t i = 0; i < L; ++i) {
    REQUIRE((b1[i] ^ b2[i]) ==
            (to_signed(x[i]) < to_signed(y[i]) ? 1 : 0));
  }
}

TEST_CASE("secure_select matches the cleartext ternary") {
  Prng rng(303);
  const std::size_t L = 10000;
  std::vector<Ring> a(L), b(L);
  BitVec c_clear(L);
  for (std::size_t i = 0; i < L; ++i) {
    a[i] = rng();
    b[i] = rng();
    c_clear[i] = static_cast<std::uint8_t>(rng() & 1);
  }
  PairBudget budget;
  budget.scalar = 3 * L;  // one b2a lift + one product per lane... (2 per lane)
  budget.and_bits = 0;

  std::vector<Ring> out;
  RingMatrix Ma(L, 1), Mb(L, 1);
  Ma.v = a;
  Mb.v = b;
  run_pair(
      budget, 403,
      [&](PartyContext& ctx) {
        const auto as = input_share_matrix(Role::Modeler, Ma, L, 1, ctx);
        const auto bs = input_share_matrix(Role::Modeler, Mb, L, 1, ctx);
        // Party 1 holds the selector bits in the clear (xor share c = c ^ 0).
        const auto r = secure_select(c_clear, as.v, bs.v, ctx);
        SharedMatrix rm(L, 1);
        rm.v = r;
        (void)reconstruct_to(Role::Regulator, rm, ctx);
      },
      [&](PartyContext& ctx) {
        const auto as =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        const auto bs =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        const BitVec zeros(L, 0);
        const auto r = secure_select(zeros, as.v, bs.v, ctx);
        SharedMatrix rm(L, 1);
        rm.v = r;
        const auto back = reconstruct_to(Role::Regulator, rm, ctx);
        REQUIRE(back.has_value());
        out = back->v;
      });
  for (std::size_t i = 0; i < L; ++i) {
    REQUIRE(out[i] == (c_clear[i] ? a[i] : b[i]));
  }
}

TEST_CASE("secure_relu matches max(x, 0) exactly") {
  Prng rng(304);
  std::vector<Ring> secrets{fx_encode(-3.0, kFx), fx_encode(2.5, kFx), 0};
  for (int i = 0; i < 10000; ++i) {
    secrets.push_back(from_signed(
        static_cast<std::int64_t>(rng() % (1ull << 40)) - (1ll << 39)));
  }
  PairBudget budget;
  budget.and_bits = 125 * secrets.size();
  budget.scalar = 2 * secrets.size();
  const auto out = run_gadget(secrets, budget, 404,
                              [](std::span<const Ring> s, PartyContext& ctx) {
                                return secure_relu(s, ctx);
                              });
  CHECK(out[0] == Ring{0});
  CHECK(out[1] == fx_encode(2.5, kFx));
  CHECK(out[2] == Ring{0});
  for (std::size_t i = 0; i < secrets.size(); ++i) {
    const std::int64_t v = to_signed(secrets[i]);
    REQUIRE(to_signed(out[i]) == std::max<std::int64_t>(v, 0));
  }
}

TEST_CASE("secure_abs returns |x| and the sign bit") {
  Prng rng(305);
  std::vector<Ring> secrets;
  for (int i = 0; i < 2000; ++i) {
    secrets.push_back(from_signed(
        static_cast<std::int64_t>(rng() % (1ull << 40)) - (1ll << 39)));
  }
  const std::size_t L = secrets.size();
  PairBudget budget;
  budget.and_bits = 125 * L;
  budget.scalar = 2 * L;
  RingMatrix M(L, 1);
  M.v = secrets;
  std::vector<Ring> abs_rec;
  BitVec s1, s2;
  run_pair(
      budget, 405,
      [&](PartyContext& ctx) {
        const auto s = input_share_matrix(Role::Modeler, M, L, 1, ctx);
        std::vector<Ring> abs_half;
        s1 = secure_abs(s.v, abs_half, ctx);
        SharedMatrix rm(L, 1);
        rm.v = abs_half;
        (void)reconstruct_to(Role::Regulator, rm, ctx);
      },
      [&](PartyContext& ctx) {
        const auto s =
            input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
        std::vector<Ring> abs_half;
        s2 = secure_abs(s.v, abs_half, ctx);
        SharedMatrix rm(L, 1);
        rm.v = abs_half;
        const auto back = reconstruct_to(Role::Regulator, rm, ctx);
        REQUIRE(back.has_value());
        abs_rec = back->v;
      });
  for (std::size_t i = 0; i < L; ++i) {
    const std::int64_t v = to_signed(secrets[i]);
    REQUIRE(to_signed(abs_rec[i]) == std::llabs(v));
    REQUIRE((s1[i] ^ s2[i]) == (v < 0 ? 1 : 0));
  }
}

TEST_CASE("secure sigmoid: branch points exact, 2 ulp elsewhere") {
  Prng rng(306);
  std::vector<Ring> secrets{
      fx_encode(0.0, kFx),    fx_encode(-0.75, kFx), fx_encode(0.25, kFx),
      fx_encode(-0.5, kFx),   fx_encode(0.5, kFx),   fx_encode(-5.0, kFx),
      fx_encode(5.0, kFx)};
  for (int i = 0; i < 5000; ++i) {
    const double x = (static_cast<double>(rng() % 160001) - 80000) / 10000.0;
    secrets.push_back(fx_encode(x, kFx));
  }
  const std::size_t L = secrets.size();
  PairBudget budget;
  budget.and_bits = 250 * L;
  budget.scalar = 4 * L;
  const auto out = run_gadget(secrets, budget, 406,
                              [](std::span<const Ring> s, PartyContext& ctx) {
                                return secure_sigmoid_approx(s, ctx);
                              });
  CHECK(out[0] == fx_encode(0.5, kFx));
  CHECK(out[1] == fx_encode(0.0, kFx));
  CHECK(out[2] == fx_encode(0.75, kFx));
  CHECK(out[3] == fx_encode(0.0, kFx));  // closed boundary at -1/2
  CHECK(out[4] == fx_encode(1.0, kFx));  // closed boundary at +1/2
  CHECK(out[5] == fx_encode(0.0, kFx));
  CHECK(out[6] == fx_encode(1.0, kFx));
  for (std::size_t i = 0; i < L; ++i) {
    const double x = fx_decode(secrets[i], kFx);
    const double want = std::clamp(x + 0.5, 0.0, 1.0);
    const double got = fx_decode(out[i], kFx);
    REQUIRE(std::abs(got - want) <= 2.0 * std::ldexp(1.0, -16));
  }
}

TEST_CASE("gadget transcripts are value-independent and deterministic") {
  auto run_with = [&](double v) {
    std::vector<Ring> secrets(16, fx_encode(v, kFx));
    RingMatrix M(16, 1);
    M.v = secrets;
    PairBudget budget;
    budget.and_bits = 250 * 16;
    budget.scalar = 4 * 16;
    return run_pair(
        budget, 407,
        [&](PartyContext& ctx) {
          const auto s = input_share_matrix(Role::Modeler, M, 16, 1, ctx);
          (void)secure_sigmoid_approx(s.v, ctx);
        },
        [&](PartyContext& ctx) {
          const auto s =
              input_share_matrix(Role::Modeler, std::nullopt, 16, 1, ctx);
          (void)secure_sigmoid_approx(s.v, ctx);
        });
  };
  const auto a = run_with(-7.5);
  const auto b = run_with(3.25);
  const auto c = run_with(-7.5);
  CHECK(a.stats1.frames_sent == b.stats1.frames_sent);
  CHECK(a.stats1.bytes_sent == b.stats1.bytes_sent);
  CHECK(a.stats1.rounds == b.stats1.rounds);
  CHECK(a.stats2.bytes_sent == b.stats2.bytes_sent);
  CHECK(a.stats1.bytes_sent == c.stats1.bytes_sent);
  CHECK(a.stats1.rounds == c.stats1.rounds);
}

TEST_CASE("xor_and_batch computes shared AND and exhausts triples") {
  BitVec out1, out2;
  run_pair(
      PairBudget{0, 4, {}}, 408,
      [&](PartyContext& ctx) {
        const BitVec a{1, 1, 0, 0}, b{1, 0, 1, 0};
        out1 = xor_and_batch(a, b, ctx);
        CHECK_THROWS_AS(xor_and_batch(a, b, ctx), TripleExhausted);
        ctx.channel->close();
      },
      [&](PartyContext& ctx) {
        const BitVec zero{0, 0, 0, 0};
        out2 = xor_and_batch(zero, zero, ctx);
        try {
          (void)xor_and_batch(zero, zero, ctx);
        } catch (const std::exception&) {
        }
      });
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(((out1[i] ^ out2[i]) & 1) == ((i == 0) ? 1 : 0));
  }
}
