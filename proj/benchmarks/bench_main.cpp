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

// Microbenchmarks for the hot paths: fixed-point primitives, Beaver
// multiplication, dealer triple generation, and the in-process two-party
// gadgets. Protocol benchmarks include the channel round trips, so they
// report the loopback (zero network latency) cost.

#include <benchmark/benchmark.h>

#include <cstddef>
#include <vector>

#include "blindfair/boolgadget.hpp"
#include "blindfair/engine.hpp"
#include "blindfair/fxp.hpp"
#include "blindfair/rng.hpp"
#include "blindfair/shares.hpp"
#include "pair_harness.hpp"

using namespace blindfair;
using blindfair_tests::PairBudget;
using blindfair_tests::run_pair;

namespace {

const FxConfig kFx{};

void BM_FxMulTrunc(benchmark::State& state) {
  Prng rng(1);
  std::vector<Ring> xs(4096), ys(4096);
  for (auto& v : xs) v = fx_encode((rng() % 2000) / 1000.0 - 1.0, kFx);
  for (auto& v : ys) v = fx_encode((rng() % 2000) / 1000.0 - 1.0, kFx);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(fx_mul_trunc(xs[i & 4095], ys[i & 4095], kFx));
    ++i;
  }
}
BENCHMARK(BM_FxMulTrunc);

void BM_BeaverScalar(benchmark::State& state) {
  Prng rng(2);
  constexpr std::size_t kBatch = 1 << 16;
  auto stores = dealer_generate(kBatch, 0, {}, 3);
  std::size_t used = 0;
  for (auto _ : state) {
    if (used == kBatch) {
      state.PauseTiming();
      stores = dealer_generate(kBatch, 0, {}, 3);
      used = 0;
      state.ResumeTiming();
    }
    auto [x1, x2] = share_secret(rng(), rng);
    auto [y1, y2] = share_secret(rng(), rng);
    const Triple t1 = stores.first.next_scalar();
    const Triple t2 = stores.second.next_scalar();
    ++used;
    benchmark::DoNotOptimize(beaver_mul(x1, y1, x2, y2, t1, t2));
  }
}
BENCHMARK(BM_BeaverScalar);

void BM_DealerScalarTriples(benchmark::State& state) {
  const std::size_t count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dealer_generate(count, 0, {}, 4));
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_DealerScalarTriples)->Arg(1 << 12)->Arg(1 << 16);

void BM_DealerAndTriples(benchmark::State& state) {
  const std::size_t count = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(dealer_generate(0, count, {}, 5));
  }
  state.SetItemsProcessed(state.iterations() * count);
}
BENCHMARK(BM_DealerAndTriples)->Arg(1 << 14)->Arg(1 << 18);

// One secure matrix product (d x d) including reconstruction, per iteration.
void BM_SecureMatmul(benchmark::State& state) {
  const std::size_t d = static_cast<std::size_t>(state.range(0));
  Prng rng(6);
  RingMatrix A(d, d), B(d, d);
  for (auto& v : A.v) v = fx_encode((rng() % 2000) / 1000.0 - 1.0, kFx);
  for (auto& v : B.v) v = fx_encode((rng() % 2000) / 1000.0 - 1.0, kFx);
  for (auto _ : state) {
    PairBudget budget;
    budget.matrix = {{TripleShape{d, d, d}, 1}};
    run_pair(
        budget, 7,
        [&](PartyContext& ctx) {
          const auto sa = input_share_matrix(Role::Modeler, A, d, d, ctx);
          const auto sb = input_share_matrix(Role::Modeler, B, d, d, ctx);
          const auto sc = secure_matmul(sa, sb, ctx);
          benchmark::DoNotOptimize(reconstruct_to_both(sc, ctx));
        },
        [&](PartyContext& ctx) {
          const auto sa =
              input_share_matrix(Role::Modeler, std::nullopt, d, d, ctx);
          const auto sb =
              input_share_matrix(Role::Modeler, std::nullopt, d, d, ctx);
          const auto sc = secure_matmul(sa, sb, ctx);
          benchmark::DoNotOptimize(reconstruct_to_both(sc, ctx));
        },
        TruncMode::Probabilistic);
  }
}
BENCHMARK(BM_SecureMatmul)->Arg(8)->Arg(64);

// Batched sign extraction over L lanes; the dominant gadget cost in
// training. Reports lanes/second.
void BM_MsbGadget(benchmark::State& state) {
  const std::size_t L = static_cast<std::size_t>(state.range(0));
  Prng rng(8);
  RingMatrix M(L, 1);
  for (auto& v : M.v) v = rng();
  for (auto _ : state) {
    PairBudget budget;
    budget.and_bits = 125 * L;
    run_pair(
        budget, 9,
        [&](PartyContext& ctx) {
          const auto s = input_share_matrix(Role::Modeler, M, L, 1, ctx);
          benchmark::DoNotOptimize(msb_bits(s.v, ctx));
        },
        [&](PartyContext& ctx) {
          const auto s =
              input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
          benchmark::DoNotOptimize(msb_bits(s.v, ctx));
        });
  }
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_MsbGadget)->Arg(64)->Arg(1024)->Arg(8192);

// Piecewise sigmoid over L lanes, the per-minibatch activation cost.
void BM_SigmoidGadget(benchmark::State& state) {
  const std::size_t L = static_cast<std::size_t>(state.range(0));
  Prng rng(10);
  RingMatrix M(L, 1);
  for (auto& v : M.v) v = fx_encode((rng() % 4000) / 1000.0 - 2.0, kFx);
  for (auto _ : state) {
    PairBudget budget;
    budget.and_bits = 300 * L;
    budget.scalar = 8 * L;
    run_pair(
        budget, 11,
        [&](PartyContext& ctx) {
          const auto s = input_share_matrix(Role::Modeler, M, L, 1, ctx);
          benchmark::DoNotOptimize(secure_sigmoid_approx(s.v, ctx));
        },
        [&](PartyContext& ctx) {
          const auto s =
              input_share_matrix(Role::Modeler, std::nullopt, L, 1, ctx);
          benchmark::DoNotOptimize(secure_sigmoid_approx(s.v, ctx));
        });
  }
  state.SetItemsProcessed(state.iterations() * L);
}
BENCHMARK(BM_SigmoidGadget)->Arg(64)->Arg(1024);

// Blocked constraint-matrix product (p x n times n x d) with per-block
// rescaling, the certification preprocessing cost.
void BM_BlockedMatmul(benchmark::State& state) {
  const std::size_t n = static_cast<std::size_t>(state.range(0));
  constexpr std::size_t d = 4, p = 1, block = 64;
  Prng rng(12);
  RingMatrix Zt(p, n), X(n, d);
  for (auto& v : Zt.v) v = fx_encode((rng() % 2) ? 0.5 : -0.5, kFx);
  for (auto& v : X.v) v = fx_encode((rng() % 2000) / 1000.0 - 1.0, kFx);
  for (auto _ : state) {
    PairBudget budget;
    budget.matrix = {{TripleShape{p, block, d}, n / block}};
    run_pair(
        budget, 13,
        [&](PartyContext& ctx) {
          const auto sz = input_share_matrix(Role::Modeler, Zt, p, n, ctx);
          const auto sx = input_share_matrix(Role::Modeler, X, n, d, ctx);
          benchmark::DoNotOptimize(
              blocked_mult_shift_avg(sz, sx, block, ctx));
        },
        [&](PartyContext& ctx) {
          const auto sz =
              input_share_matrix(Role::Modeler, std::nullopt, p, n, ctx);
          const auto sx =
              input_share_matrix(Role::Modeler, std::nullopt, n, d, ctx);
          benchmark::DoNotOptimize(
              blocked_mult_shift_avg(sz, sx, block, ctx));
        },
        TruncMode::Probabilistic);
  }
}
BENCHMARK(BM_BlockedMatmul)->Arg(1024)->Arg(4096);

}  // namespace

BENCHMARK_MAIN();
