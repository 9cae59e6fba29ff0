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

#include "blindfair/shares.hpp"

#include <cstdio>
#include <cstring>

#include "blindfair/errors.hpp"

namespace blindfair {

std::pair<Share, Share> share_secret(Ring x, Prng& rng) {
  const Ring r = rng();
  return {Share{1, x - r}, Share{2, r}};
}

Triple TripleStore::next_scalar() {
  if (scalar_cursor_ >= scalars_.size()) {
    throw TripleExhausted("scalar triples exhausted after " +
                          std::to_string(scalar_cursor_));
  }
  return scalars_[scalar_cursor_++];
}

BitTriple TripleStore::next_and() {
  if (and_cursor_ >= ands_.size()) {
    throw TripleExhausted("AND triples exhausted after " +
                          std::to_string(and_cursor_));
  }
  return ands_[and_cursor_++];
}

MatrixTriple TripleStore::next_matrix(std::size_t n, std::size_t k,
                                      std::size_t m) {
  const TripleShape shape{n, k, m};
  auto it = matrices_.find(shape);
  if (it == matrices_.end() || it->second.empty()) {
    throw TripleExhausted("matrix triples (" + std::to_string(n) + "," +
                          std::to_string(k) + "," + std::to_string(m) +
                          ") exhausted");
  }
  MatrixTriple t = std::move(it->second.front());
  it->second.pop_front();
  matrix_consumed_[shape] += 1;
  return t;
}

std::size_t TripleStore::matrix_remaining(const TripleShape& s) const {
  auto it = matrices_.find(s);
  return it == matrices_.end() ? 0 : it->second.size();
}

std::size_t TripleStore::matrix_consumed(const TripleShape& s) const {
  auto it = matrix_consumed_.find(s);
  return it == matrix_consumed_.end() ? 0 : it->second;
}

namespace {

void put_bytes(std::vector<std::uint8_t>& out, const void* p, std::size_t n) {
  const auto* b = static_cast<const std::uint8_t*>(p);
  out.insert(out.end(), b, b + n);
}

void put_u16_le(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

struct Reader {
  const std::uint8_t* p;
  const std::uint8_t* end;

  void need(std::size_t n) const {
    if (static_cast<std::size_t>(end - p) < n) {
      throw IOError("truncated triple file");
    }
  }
  std::uint16_t u16() {
    need(2);
    std::uint16_t v = static_cast<std::uint16_t>(p[0]) |
                      (static_cast<std::uint16_t>(p[1]) << 8);
    p += 2;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = get_u64_le(p);
    p += 8;
    return v;
  }
  std::uint8_t u8() {
    need(1);
    return *p++;
  }
};

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    throw IOError("cannot open " + path);
  }
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<std::uint8_t> buf(size < 0 ? 0 : static_cast<std::size_t>(size));
  if (!buf.empty() && std::fread(buf.data(), 1, buf.size(), f) != buf.size()) {
    std::fclose(f);
    throw IOError("short read on " + path);
  }
  std::fclose(f);
  return buf;
}

void write_file(const std::string& path, const std::vector<std::uint8_t>& b) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    throw IOError("cannot create " + path);
  }
  if (!b.empty() && std::fwrite(b.data(), 1, b.size(), f) != b.size()) {
    std::fclose(f);
    throw IOError("short write on " + path);
  }
  std::fclose(f);
}

constexpr std::uint16_t kTripleFileVersion = 1;

}  // namespace

void TripleStore::save(const std::string& path) const {
  std::vector<std::uint8_t> out;
  put_bytes(out, "BFTR", 4);
  put_u16_le(out, kTripleFileVersion);
  put_u16_le(out, 64);  // ring bits
  put_bytes(out, run_id.data(), run_id.size());
  // Unconsumed entries only; a loaded store starts at cursor 0.
  put_u64_le(out, scalars_.size() - scalar_cursor_);
  put_u64_le(out, ands_.size() - and_cursor_);
  put_u64_le(out, matrices_.size());
  for (std::size_t i = scalar_cursor_; i < scalars_.size(); ++i) {
    put_u64_le(out, scalars_[i].a);
    put_u64_le(out, scalars_[i].b);
    put_u64_le(out, scalars_[i].c);
  }
  for (std::size_t i = and_cursor_; i < ands_.size(); ++i) {
    out.push_back(static_cast<std::uint8_t>(ands_[i].a | (ands_[i].b << 1) |
                                            (ands_[i].c << 2)));
  }
  for (const auto& [shape, deq] : matrices_) {
    put_u64_le(out, std::get<0>(shape));
    put_u64_le(out, std::get<1>(shape));
    put_u64_le(out, std::get<2>(shape));
    put_u64_le(out, deq.size());
    for (const MatrixTriple& t : deq) {
      for (Ring v : t.A) put_u64_le(out, v);
      for (Ring v : t.B) put_u64_le(out, v);
      for (Ring v : t.C) put_u64_le(out, v);
    }
  }
  write_file(path, out);
}

TripleStore TripleStore::load(const std::string& path) {
  const auto buf = read_file(path);
  Reader r{buf.data(), buf.data() + buf.size()};
  r.need(4);
  if (std::memcmp(r.p, "BFTR", 4) != 0) {
    throw IOError("bad triple file magic in " + path);
  }
  r.p += 4;
  if (r.u16() != kTripleFileVersion) {
    throw VersionMismatch("unsupported triple file version in " + path);
  }
  if (r.u16() != 64) {
    throw ConfigMismatch("unsupported ring width in " + path);
  }
  TripleStore store;
  r.need(store.run_id.size());
  std::memcpy(store.run_id.data(), r.p, store.run_id.size());
  r.p += store.run_id.size();
  const std::uint64_t n_scalar = r.u64();
  const std::uint64_t n_and = r.u64();
  const std::uint64_t n_shapes = r.u64();
  store.scalars_.reserve(n_scalar);
  for (std::uint64_t i = 0; i < n_scalar; ++i) {
    Triple t;
    t.a = r.u64();
    t.b = r.u64();
    t.c = r.u64();
    store.scalars_.push_back(t);
  }
  store.ands_.reserve(n_and);
  for (std::uint64_t i = 0; i < n_and; ++i) {
    const std::uint8_t packed = r.u8();
    store.ands_.push_back(BitTriple{
        static_cast<std::uint8_t>(packed & 1),
        static_cast<std::uint8_t>((packed >> 1) & 1),
        static_cast<std::uint8_t>((packed >> 2) & 1)});
  }
  for (std::uint64_t s = 0; s < n_shapes; ++s) {
    const std::size_t n = r.u64(), k = r.u64(), m = r.u64();
    const std::uint64_t count = r.u64();
    auto& deq = store.matrices_[TripleShape{n, k, m}];
    for (std::uint64_t i = 0; i < count; ++i) {
      MatrixTriple t;
      t.n = n;
      t.k = k;
      t.m = m;
      t.A.resize(n * k);
      t.B.resize(k * m);
      t.C.resize(n * m);
      for (Ring& v : t.A) v = r.u64();
      for (Ring& v : t.B) v = r.u64();
      for (Ring& v : t.C) v = r.u64();
      deq.push_back(std::move(t));
    }
  }
  if (r.p != r.end) {
    throw IOError("trailing bytes in " + path);
  }
  return store;
}

std::pair<TripleStore, TripleStore> dealer_generate(
    std::size_t count_scalar, std::size_t count_and,
    const std::vector<std::pair<TripleShape, std::size_t>>& shapes,
    std::uint64_t seed) {
  Prng rng(seed);
  TripleStore s1, s2;
  for (int i = 0; i < 16; i += 8) {
    const std::uint64_t word = rng();
    for (int b = 0; b < 8; ++b) {
      s1.run_id[i + b] = static_cast<std::uint8_t>(word >> (8 * b));
    }
  }
  s2.run_id = s1.run_id;

  s1.scalars_.reserve(count_scalar);
  s2.scalars_.reserve(count_scalar);
  for (std::size_t i = 0; i < count_scalar; ++i) {
    const Ring a = rng(), b = rng();
    const Ring c = a * b;
    const Ring a2 = rng(), b2 = rng(), c2 = rng();
    s1.scalars_.push_back(Triple{a - a2, b - b2, c - c2});
    s2.scalars_.push_back(Triple{a2, b2, c2});
  }

  s1.ands_.reserve(count_and);
  s2.ands_.reserve(count_and);
  for (std::size_t i = 0; i < count_and; ++i) {
    const std::uint64_t bits = rng();
    const std::uint8_t a = bits & 1, b = (bits >> 1) & 1;
    const std::uint8_t c = a & b;
    const std::uint8_t a2 = (bits >> 2) & 1, b2 = (bits >> 3) & 1,
                       c2 = (bits >> 4) & 1;
    s1.ands_.push_back(BitTriple{static_cast<std::uint8_t>(a ^ a2),
                                 static_cast<std::uint8_t>(b ^ b2),
                                 static_cast<std::uint8_t>(c ^ c2)});
    s2.ands_.push_back(BitTriple{a2, b2, c2});
  }

  for (const auto& [shape, count] : shapes) {
    const auto [n, k, m] = shape;
    auto& d1 = s1.matrices_[shape];
    auto& d2 = s2.matrices_[shape];
    for (std::size_t t = 0; t < count; ++t) {
      MatrixTriple m1{n, k, m, {}, {}, {}}, m2{n, k, m, {}, {}, {}};
      std::vector<Ring> A(n * k), B(k * m), C(n * m, 0);
      for (Ring& v : A) v = rng();
      for (Ring& v : B) v = rng();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < k; ++j) {
          const Ring aij = A[i * k + j];
          for (std::size_t l = 0; l < m; ++l) {
            C[i * m + l] += aij * B[j * m + l];
          }
        }
      }
      m2.A.resize(n * k);
      m2.B.resize(k * m);
      m2.C.resize(n * m);
      for (Ring& v : m2.A) v = rng();
      for (Ring& v : m2.B) v = rng();
      for (Ring& v : m2.C) v = rng();
      m1.A.resize(n * k);
      m1.B.resize(k * m);
      m1.C.resize(n * m);
      for (std::size_t i = 0; i < n * k; ++i) m1.A[i] = A[i] - m2.A[i];
      for (std::size_t i = 0; i < k * m; ++i) m1.B[i] = B[i] - m2.B[i];
      for (std::size_t i = 0; i < n * m; ++i) m1.C[i] = C[i] - m2.C[i];
      d1.push_back(std::move(m1));
      d2.push_back(std::move(m2));
    }
  }
  return {std::move(s1), std::move(s2)};
}

std::pair<Share, Share> beaver_mul(const Share& x1, const Share& y1,
                                   const Share& x2, const Share& y2,
                                   const Triple& t1, const Triple& t2) {
  // The masked values e = x - a and f = y - b are public after the exchange.
  const Ring e = (x1.value - t1.a) + (x2.value - t2.a);
  const Ring f = (y1.value - t1.b) + (y2.value - t2.b);
  const Ring z1 = f * t1.a + e * t1.b + t1.c;
  const Ring z2 = e * f + f * t2.a + e * t2.b + t2.c;
  return {Share{1, z1}, Share{2, z2}};
}

Ring prob_truncate(int party_index, Ring share_value, int frac_bits) {
  if (party_index == 1) {
    return arith_shift(share_value, frac_bits);
  }
  return ring_neg(arith_shift(ring_neg(share_value), frac_bits));
}

}  // namespace blindfair
