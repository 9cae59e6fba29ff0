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

// Deterministic randomness helpers. std::mt19937_64 output is pinned by the
// standard, so seeded streams reproduce bit-for-bit across platforms; the
// bounded-int and shuffle helpers below avoid the implementation-defined
// std::uniform_int_distribution / std::shuffle.

#ifndef BLINDFAIR_RNG_HPP_
#define BLINDFAIR_RNG_HPP_

#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

namespace blindfair {

using Prng = std::mt19937_64;

// Unbiased integer in [0, n) via rejection sampling.
inline std::uint64_t bounded_u64(Prng& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

// Fisher-Yates permutation of 0..n-1, deterministic given the rng state.
inline std::vector<std::size_t> random_permutation(Prng& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    std::size_t j = static_cast<std::size_t>(bounded_u64(rng, i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

// Minibatch order for epoch `epoch`: a public-seed-driven permutation that
// both parties (and the cleartext reference) derive identically.
inline std::vector<std::size_t> minibatch_permutation(std::uint64_t public_seed,
                                                      std::uint64_t epoch,
                                                      std::size_t n) {
  Prng rng(public_seed ^ (0x9e3779b97f4a7c15ULL * (epoch + 1)));
  return random_permutation(rng, n);
}

}  // namespace blindfair

#endif  // BLINDFAIR_RNG_HPP_
