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

// The three end-to-end secure protocols: fair model training on shares,
// fairness certification with model signing, and decision verification.

#ifndef BLINDFAIR_FAIRMPC_HPP_
#define BLINDFAIR_FAIRMPC_HPP_

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blindfair/clearref.hpp"
#include "blindfair/engine.hpp"

namespace blindfair {

using Sha256Digest = std::array<std::uint8_t, 32>;

// SHA-256 of the canonical little-endian serialization of theta.
Sha256Digest model_signature(const std::vector<Ring>& theta);

struct Certificate {
  std::array<std::uint8_t, 16> run_id{};
  std::vector<Ring> c;  // ring-encoded constraint vector
  bool pass = false;
  Sha256Digest signature{};  // meaningful only when pass
  FxConfig fx;
  std::uint32_t d = 0, p = 0;
  std::int64_t timestamp = 0;  // unix seconds
  Whitening whitening;         // so verification preprocesses x identically

  void save(const std::string& path) const;
  static Certificate load(const std::string& path);
};

struct VerificationResult {
  bool signature_match = false;
  std::optional<int> prediction;  // present iff signature_match
};

// Per-role inputs to protocol_train. The Modeler supplies X, y (cleartext,
// shared into the protocol) and its half of Z; the Regulator supplies the
// other half of Z.
struct TrainInputs {
  std::optional<RingMatrix> X;      // Modeler only
  std::optional<std::vector<Ring>> y;  // Modeler only
  SharedMatrix Z_share;             // both (n x p)
  std::size_t n = 0, d = 0, p = 0;
};

// Executes the Lagrangian training loop entirely on shares; theta is
// reconstructed to the Modeler only (empty optional at the Regulator).
std::optional<std::vector<Ring>> protocol_train(PartyContext& ctx,
                                                const TrainInputs& in,
                                                const TrainingConfig& cfg);

struct CertifyInputs {
  std::optional<std::vector<Ring>> theta;  // Modeler only
  std::optional<RingMatrix> X;             // Regulator only (whitened, fx)
  SharedMatrix Z_share;                    // both
  std::vector<Ring> c;                     // public, ring-encoded
  Whitening whitening;                     // public metadata for the cert
  std::size_t n = 0, d = 0, p = 0;
  std::size_t block = 64;
};

// Checks F(theta) = |A theta| - c <= 0 on shares; a single pass/fail bit is
// revealed to both parties. On pass, theta is reconstructed at the Modeler,
// who computes the SHA-256 signature and transmits it. Both store the
// certificate.
Certificate protocol_certify(PartyContext& ctx, const CertifyInputs& in);

struct VerifyInputs {
  std::optional<std::vector<Ring>> theta;     // Modeler only (theta')
  std::optional<Certificate> certificate;     // Regulator only
  std::optional<std::vector<Ring>> x;         // Regulator only (whitened, fx)
  std::size_t d = 0;
};

// The Modeler's theta' is hashed and compared against the certificate; on
// match, the prediction I(x^T theta' >= 0) is computed on shares and
// revealed to the Regulator. Result is meaningful at the Regulator.
VerificationResult protocol_verify(PartyContext& ctx, const VerifyInputs& in);

}  // namespace blindfair

#endif  // BLINDFAIR_FAIRMPC_HPP_
