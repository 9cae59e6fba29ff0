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

#include "blindfair/fairmpc.hpp"

#include <openssl/sha.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <ctime>

#include "blindfair/boolgadget.hpp"

namespace blindfair {

Sha256Digest model_signature(const std::vector<Ring>& theta) {
  const auto bytes = serialize_ring_vector(theta);
  Sha256Digest digest{};
  SHA256(bytes.data(), bytes.size(), digest.data());
  return digest;
}

namespace {

int log2_exact(std::size_t x) {
  int s = 0;
  while ((std::size_t{1} << s) < x) ++s;
  return s;
}

void put_f64_le(std::vector<std::uint8_t>& out, double v) {
  put_u64_le(out, std::bit_cast<std::uint64_t>(v));
}

double get_f64_le(const std::uint8_t* p) {
  return std::bit_cast<double>(get_u64_le(p));
}

constexpr std::uint16_t kCertVersion = 1;

// Multiply shares by a public ring constant, then rescale.
std::vector<Ring> mul_public(std::span<const Ring> s, Ring k,
                             PartyContext& ctx) {
  std::vector<Ring> v(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    v[i] = s[i] * k;
  }
  return truncate_shares(v, ctx.fx.frac_bits, ctx, true);
}

// Reveals xor-shared bits to both parties.
BitVec reveal_bits_to_both(const BitVec& mine, PartyContext& ctx) {
  ctx.channel->send(Frame{FrameTag::kBitBatch, mine});
  Frame f = ctx.channel->recv();
  if (f.tag != FrameTag::kBitBatch || f.payload.size() != mine.size()) {
    throw ProtocolAbort("malformed bit reveal");
  }
  BitVec out(mine.size());
  for (std::size_t i = 0; i < mine.size(); ++i) {
    out[i] = mine[i] ^ f.payload[i];
  }
  return out;
}

// Centered Z transpose: subtracts the shift-divided column means from the
// shares (centering is linear, so it needs no triples).
SharedMatrix centered_zt(const SharedMatrix& Z, PartyContext& ctx) {
  const std::size_t n = Z.rows, p = Z.cols;
  std::vector<Ring> zbar(p, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      zbar[j] += Z.at(i, j);
    }
  }
  zbar = truncate_shares(zbar, log2_exact(n), ctx, true);
  SharedMatrix Zt(p, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < p; ++j) {
      Zt.at(j, i) = Z.at(i, j) - zbar[j];
    }
  }
  return Zt;
}

// F = |A theta| - c on shares; also hands back the sign bits of A theta.
struct ConstraintEval {
  std::vector<Ring> F;
  BitVec sign;
};

ConstraintEval eval_constraints(const SharedMatrix& A, const SharedMatrix& th,
                                const std::vector<Ring>& c_ring,
                                PartyContext& ctx) {
  SharedMatrix u = secure_matmul(A, th, ctx);
  ConstraintEval out;
  out.sign = secure_abs(u.v, out.F, ctx);
  if (ctx.party() == 1) {
    for (std::size_t q = 0; q < out.F.size(); ++q) {
      out.F[q] -= c_ring[q];
    }
  }
  return out;
}

}  // namespace

void Certificate::save(const std::string& path) const {
  std::vector<std::uint8_t> out;
  out.insert(out.end(), {'B', 'F', 'C', 'T'});
  out.push_back(static_cast<std::uint8_t>(kCertVersion & 0xff));
  out.push_back(static_cast<std::uint8_t>(kCertVersion >> 8));
  out.insert(out.end(), run_id.begin(), run_id.end());
  for (int i = 0; i < 4; ++i) out.push_back((d >> (8 * i)) & 0xff);
  for (int i = 0; i < 4; ++i) out.push_back((p >> (8 * i)) & 0xff);
  out.push_back(static_cast<std::uint8_t>(fx.total_bits));
  out.push_back(static_cast<std::uint8_t>(fx.frac_bits));
  out.push_back(static_cast<std::uint8_t>(fx.int_bits));
  out.push_back(pass ? 1 : 0);
  out.insert(out.end(), signature.begin(), signature.end());
  if (whitening.mean.size() != d || whitening.scale.size() != d ||
      c.size() != p) {
    throw DimensionMismatch("certificate fields inconsistent with d/p");
  }
  for (double v : whitening.mean) put_f64_le(out, v);
  for (double v : whitening.scale) put_f64_le(out, v);
  for (Ring v : c) put_u64_le(out, v);
  put_u64_le(out, static_cast<std::uint64_t>(timestamp));

  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    throw IOError("cannot create " + path);
  }
  if (std::fwrite(out.data(), 1, out.size(), f) != out.size()) {
    std::fclose(f);
    throw IOError("short write on " + path);
  }
  std::fclose(f);
}

Certificate Certificate::load(const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "rb");
  if (!f) {
    throw NoCertificate("cannot open certificate " + path);
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

  const std::size_t fixed = 4 + 2 + 16 + 4 + 4 + 3 + 1 + 32;
  if (buf.size() < fixed || std::memcmp(buf.data(), "BFCT", 4) != 0) {
    throw IntegrityError("bad certificate header in " + path);
  }
  const std::uint8_t* q = buf.data() + 4;
  const std::uint16_t version = q[0] | (q[1] << 8);
  if (version != kCertVersion) {
    throw IntegrityError("unsupported certificate version");
  }
  q += 2;
  Certificate cert;
  std::memcpy(cert.run_id.data(), q, 16);
  q += 16;
  cert.d = 0;
  cert.p = 0;
  for (int i = 0; i < 4; ++i) cert.d |= static_cast<std::uint32_t>(q[i]) << (8 * i);
  q += 4;
  for (int i = 0; i < 4; ++i) cert.p |= static_cast<std::uint32_t>(q[i]) << (8 * i);
  q += 4;
  cert.fx.total_bits = q[0];
  cert.fx.frac_bits = q[1];
  cert.fx.int_bits = q[2];
  q += 3;
  if (q[0] > 1 || !cert.fx.valid()) {
    throw IntegrityError("corrupt certificate fields in " + path);
  }
  cert.pass = q[0] == 1;
  q += 1;
  std::memcpy(cert.signature.data(), q, 32);
  q += 32;
  const std::size_t expected =
      fixed + 8 * (2 * static_cast<std::size_t>(cert.d) + cert.p) + 8;
  if (buf.size() != expected) {
    throw IntegrityError("certificate size mismatch in " + path);
  }
  cert.whitening.mean.resize(cert.d);
  cert.whitening.scale.resize(cert.d);
  cert.c.resize(cert.p);
  for (std::uint32_t i = 0; i < cert.d; ++i, q += 8) {
    cert.whitening.mean[i] = get_f64_le(q);
  }
  for (std::uint32_t i = 0; i < cert.d; ++i, q += 8) {
    cert.whitening.scale[i] = get_f64_le(q);
  }
  for (std::uint32_t i = 0; i < cert.p; ++i, q += 8) {
    cert.c[i] = get_u64_le(q);
  }
  cert.timestamp = static_cast<std::int64_t>(get_u64_le(q));
  return cert;
}

std::optional<std::vector<Ring>> protocol_train(PartyContext& ctx,
                                                const TrainInputs& in,
                                                const TrainingConfig& cfg) {
  handshake(ctx);
  const std::size_t n = in.n, d = in.d, p = in.p;
  const std::size_t B = std::size_t{1} << cfg.batch_exp;
  const std::size_t epochs = cfg.resolved_epochs(n);
  if (in.Z_share.rows != n || in.Z_share.cols != p || cfg.c.size() != p) {
    throw DimensionMismatch("protocol_train: input dimensions");
  }

  const SharedMatrix Xs =
      input_share_matrix(Role::Modeler, in.X, n, d, ctx);
  std::optional<RingMatrix> ym;
  if (in.y) {
    ym = RingMatrix(n, 1);
    ym->v = *in.y;
  }
  const SharedMatrix ys = input_share_matrix(Role::Modeler, ym, n, 1, ctx);

  const SharedMatrix Zct = centered_zt(in.Z_share, ctx);
  const SharedMatrix A = blocked_mult_shift_avg(Zct, Xs, cfg.block, ctx);

  std::vector<Ring> c_ring(p);
  for (std::size_t q = 0; q < p; ++q) {
    c_ring[q] = fx_encode(cfg.c[q], ctx.fx);
  }
  const Ring el = fx_encode(cfg.eta_lambda, ctx.fx);

  SharedMatrix theta(d, 1);
  std::vector<Ring> lambda(p, 0);

  for (std::size_t j = 0; j < epochs; ++j) {
    const double xi_bce =
        static_cast<double>(epochs) / static_cast<double>(epochs + j);
    const double xi_con =
        static_cast<double>(epochs + 10 * j) / static_cast<double>(epochs);
    const Ring eb = fx_encode(cfg.eta_theta * xi_bce, ctx.fx);
    const Ring ec = fx_encode(cfg.eta_theta * xi_con, ctx.fx);
    const auto perm = minibatch_permutation(ctx.public_seed, j, n);

    for (std::size_t t = 0; t < n / B; ++t) {
      ConstraintEval ce = eval_constraints(A, theta, c_ring, ctx);
      const auto gl = secure_relu(ce.F, ctx);
      std::vector<Ring> negF(p);
      for (std::size_t q = 0; q < p; ++q) negF[q] = ring_neg(ce.F[q]);
      const BitVec act = msb_bits(negF, ctx);

      SharedMatrix Xb(B, d);
      std::vector<Ring> yb(B);
      for (std::size_t b = 0; b < B; ++b) {
        const std::size_t row = perm[t * B + b];
        for (std::size_t k = 0; k < d; ++k) {
          Xb.at(b, k) = Xs.at(row, k);
        }
        yb[b] = ys.at(row, 0);
      }
      const SharedMatrix z = secure_matmul(Xb, theta, ctx);
      auto sigma = secure_sigmoid_approx(z.v, ctx);
      SharedMatrix dvec(B, 1);
      for (std::size_t b = 0; b < B; ++b) {
        dvec.at(b, 0) = sigma[b] - yb[b];
      }

      SharedMatrix Xbt(d, B);
      for (std::size_t b = 0; b < B; ++b) {
        for (std::size_t k = 0; k < d; ++k) {
          Xbt.at(k, b) = Xb.at(b, k);
        }
      }
      SharedMatrix graw = secure_matmul(Xbt, dvec, ctx);
      const auto g_bce =
          truncate_shares(graw.v, cfg.batch_exp, ctx, true);

      const auto act_a = bits_to_arith(act, ctx);
      const auto sign_a = bits_to_arith(ce.sign, ctx);
      const auto pr = mul_elementwise(act_a, sign_a, ctx, false);
      std::vector<Ring> g(p);
      for (std::size_t q = 0; q < p; ++q) {
        g[q] = act_a[q] - 2 * pr[q];
      }
      const auto lg = mul_elementwise(lambda, g, ctx, false);

      std::vector<Ring> lhs(p * d);
      for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t k = 0; k < d; ++k) {
          lhs[q * d + k] = lg[q];
        }
      }
      const auto prod = mul_elementwise(lhs, A.v, ctx, true);
      std::vector<Ring> g_con(d, 0);
      for (std::size_t q = 0; q < p; ++q) {
        for (std::size_t k = 0; k < d; ++k) {
          g_con[k] += prod[q * d + k];
        }
      }

      const auto upd_bce = mul_public(g_bce, eb, ctx);
      const auto upd_con = mul_public(g_con, ec, ctx);
      for (std::size_t k = 0; k < d; ++k) {
        theta.at(k, 0) -= upd_bce[k];
        theta.at(k, 0) -= upd_con[k];
      }

      const auto dl = mul_public(gl, el, ctx);
      std::vector<Ring> lam_next(p);
      for (std::size_t q = 0; q < p; ++q) {
        lam_next[q] = lambda[q] + dl[q];
      }
      lambda = secure_relu(lam_next, ctx);
    }
  }

  const auto rec = reconstruct_to(Role::Modeler, theta, ctx);
  if (!rec) {
    return std::nullopt;
  }
  return rec->v;
}

Certificate protocol_certify(PartyContext& ctx, const CertifyInputs& in) {
  handshake(ctx);
  const std::size_t n = in.n, d = in.d, p = in.p;
  if (in.Z_share.rows != n || in.Z_share.cols != p || in.c.size() != p) {
    throw DimensionMismatch("protocol_certify: input dimensions");
  }

  std::optional<RingMatrix> thm;
  if (in.theta) {
    if (in.theta->size() != d) {
      throw DimensionMismatch("protocol_certify: theta dimension");
    }
    thm = RingMatrix(d, 1);
    thm->v = *in.theta;
  }
  const SharedMatrix th = input_share_matrix(Role::Modeler, thm, d, 1, ctx);
  const SharedMatrix Xs =
      input_share_matrix(Role::Regulator, in.X, n, d, ctx);

  const SharedMatrix Zct = centered_zt(in.Z_share, ctx);
  const SharedMatrix A = blocked_mult_shift_avg(Zct, Xs, in.block, ctx);
  ConstraintEval ce = eval_constraints(A, th, in.c, ctx);

  // Fail iff some constraint is strictly violated: OR over msb(-F_j).
  std::vector<Ring> negF(p);
  for (std::size_t q = 0; q < p; ++q) negF[q] = ring_neg(ce.F[q]);
  const BitVec act = msb_bits(negF, ctx);
  BitVec acc{act[0]};
  for (std::size_t q = 1; q < p; ++q) {
    BitVec a{acc[0]}, b{act[q]};
    const BitVec ab = xor_and_batch(a, b, ctx);
    acc[0] = acc[0] ^ act[q] ^ ab[0];
  }
  const BitVec verdict = reveal_bits_to_both(acc, ctx);
  const bool pass = verdict[0] == 0;

  // The reconstruction and digest exchange run on both verdicts so the
  // transcript length depends only on dimensions.
  const auto rec = reconstruct_to(Role::Modeler, th, ctx);
  Sha256Digest digest{};
  if (ctx.role == Role::Modeler) {
    if (pass) {
      digest = model_signature(rec->v);
    }
    ctx.channel->send(Frame{FrameTag::kCertificate,
                            {digest.begin(), digest.end()}});
  } else {
    Frame f = ctx.channel->recv();
    if (f.tag != FrameTag::kCertificate || f.payload.size() != 32) {
      throw ProtocolAbort("malformed certificate frame");
    }
    std::memcpy(digest.data(), f.payload.data(), 32);
  }

  Certificate cert;
  cert.run_id = ctx.run_id;
  cert.c = in.c;
  cert.pass = pass;
  cert.signature = pass ? digest : Sha256Digest{};
  cert.fx = ctx.fx;
  cert.d = static_cast<std::uint32_t>(d);
  cert.p = static_cast<std::uint32_t>(p);
  cert.timestamp = static_cast<std::int64_t>(std::time(nullptr));
  cert.whitening = in.whitening;
  if (cert.whitening.mean.size() != d) {
    cert.whitening.mean.assign(d, 0.0);
    cert.whitening.scale.assign(d, 1.0);
  }
  return cert;
}

VerificationResult protocol_verify(PartyContext& ctx,
                                   const VerifyInputs& in) {
  if (ctx.role == Role::Regulator && !in.certificate) {
    throw NoCertificate("protocol_verify: Regulator holds no certificate");
  }
  handshake(ctx);
  const std::size_t d = in.d;

  // Modeler commits to theta' by its digest; Regulator checks it against
  // the stored certificate and reports the outcome.
  std::uint8_t match = 0;
  if (ctx.role == Role::Modeler) {
    if (!in.theta || in.theta->size() != d) {
      throw DimensionMismatch("protocol_verify: theta dimension");
    }
    const Sha256Digest digest = model_signature(*in.theta);
    ctx.channel->send(Frame{FrameTag::kCertificate,
                            {digest.begin(), digest.end()}});
    Frame f = ctx.channel->recv();
    if (f.tag != FrameTag::kCertificate || f.payload.size() != 1) {
      throw ProtocolAbort("malformed verification reply");
    }
    match = f.payload[0];
  } else {
    Frame f = ctx.channel->recv();
    if (f.tag != FrameTag::kCertificate || f.payload.size() != 32) {
      throw ProtocolAbort("malformed digest frame");
    }
    const auto& cert = *in.certificate;
    match = cert.pass &&
            std::memcmp(f.payload.data(), cert.signature.data(), 32) == 0;
    ctx.channel->send(Frame{FrameTag::kCertificate, {match}});
  }

  // The prediction subprotocol always runs so the transcript length is
  // value-independent; its output is only meaningful on a match.
  std::optional<RingMatrix> thm, xm;
  if (ctx.role == Role::Modeler) {
    thm = RingMatrix(1, d);
    thm->v = *in.theta;
  } else {
    if (!in.x || in.x->size() != d) {
      throw DimensionMismatch("protocol_verify: x dimension");
    }
    xm = RingMatrix(d, 1);
    xm->v = *in.x;
  }
  const SharedMatrix th = input_share_matrix(Role::Modeler, thm, 1, d, ctx);
  const SharedMatrix xv = input_share_matrix(Role::Regulator, xm, d, 1, ctx);
  const SharedMatrix dot = secure_matmul(th, xv, ctx);
  const BitVec sign = msb_bits(dot.v, ctx);
  const BitVec revealed = reveal_bits_to_both(sign, ctx);

  VerificationResult res;
  res.signature_match = match == 1;
  if (res.signature_match) {
    res.prediction = revealed[0] == 0 ? 1 : 0;
  }
  return res;
}

}  // namespace blindfair
