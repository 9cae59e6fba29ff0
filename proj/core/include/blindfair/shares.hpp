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

// Additive secret sharing over Z_{2^64}, trusted-dealer triple generation
// (the data-independent offline phase), Beaver multiplication, and
// probabilistic truncation on shares.

#ifndef BLINDFAIR_SHARES_HPP_
#define BLINDFAIR_SHARES_HPP_

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "blindfair/fxp.hpp"
#include "blindfair/rng.hpp"

namespace blindfair {

// One party's additive share: secret = share1.value + share2.value mod 2^64.
struct Share {
  int party_index;  // 1 or 2
  Ring value;
};

inline Ring reconstruct(const Share& a, const Share& b) {
  return a.value + b.value;
}

// share1 = x - r, share2 = r with r uniform; each share alone is uniform.
std::pair<Share, Share> share_secret(Ring x, Prng& rng);

// Beaver multiplication triple, one party's half: c reconstructs to a*b.
struct Triple {
  Ring a, b, c;
};

// Boolean AND triple over xor shares: c = a & b after reconstruction.
struct BitTriple {
  std::uint8_t a, b, c;
};

// Matrix multiplication triple half: C (n x m) reconstructs to A (n x k)
// times B (k x m) in the ring. Row-major storage.
struct MatrixTriple {
  std::size_t n, k, m;
  std::vector<Ring> A, B, C;
};

using TripleShape = std::tuple<std::size_t, std::size_t, std::size_t>;

// One party's stock of correlated randomness for a protocol run. Both
// parties consume entries strictly in order; a triple is used at most once.
class TripleStore {
 public:
  std::array<std::uint8_t, 16> run_id{};

  Triple next_scalar();
  BitTriple next_and();
  MatrixTriple next_matrix(std::size_t n, std::size_t k, std::size_t m);

  std::size_t scalar_remaining() const { return scalars_.size() - scalar_cursor_; }
  std::size_t and_remaining() const { return ands_.size() - and_cursor_; }
  std::size_t matrix_remaining(const TripleShape& s) const;

  std::size_t scalar_consumed() const { return scalar_cursor_; }
  std::size_t and_consumed() const { return and_cursor_; }
  std::size_t matrix_consumed(const TripleShape& s) const;

  void save(const std::string& path) const;
  static TripleStore load(const std::string& path);

  friend std::pair<TripleStore, TripleStore> dealer_generate(
      std::size_t count_scalar, std::size_t count_and,
      const std::vector<std::pair<TripleShape, std::size_t>>& shapes,
      std::uint64_t seed);

 private:
  std::vector<Triple> scalars_;
  std::vector<BitTriple> ands_;
  std::map<TripleShape, std::deque<MatrixTriple>> matrices_;
  std::map<TripleShape, std::size_t> matrix_consumed_;
  std::size_t scalar_cursor_ = 0;
  std::size_t and_cursor_ = 0;
};

// Offline phase: generates both parties' stores. Deterministic given seed;
// paired entries reconstruct to valid triples.
std::pair<TripleStore, TripleStore> dealer_generate(
    std::size_t count_scalar, std::size_t count_and,
    const std::vector<std::pair<TripleShape, std::size_t>>& shapes,
    std::uint64_t seed);

// Two-sided Beaver multiplication (models the two-round e/f exchange in one
// call; the channel-based variant lives in the engine). Returns the parties'
// shares of x*y.
std::pair<Share, Share> beaver_mul(const Share& x1, const Share& y1,
                                   const Share& x2, const Share& y2,
                                   const Triple& t1, const Triple& t2);

// Local probabilistic truncation of one share by `frac_bits` bits. Party 1
// arithmetic-shifts; party 2 negates, shifts, negates. The reconstructed
// result is the exact truncation +/- 1 ulp except with probability
// proportional to |secret| / 2^63.
Ring prob_truncate(int party_index, Ring share_value, int frac_bits);

}  // namespace blindfair

#endif  // BLINDFAIR_SHARES_HPP_
