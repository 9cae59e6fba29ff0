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

#ifndef BLINDFAIR_ERRORS_HPP_
#define BLINDFAIR_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace blindfair {

// Error classes map 1:1 onto the CLI's stable exit-code enumeration, see
// tools/blindfair.cpp.
struct OverflowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TripleExhausted : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct VersionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ChannelClosed : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FrameTooLarge : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct UnknownTag : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConnectionRefused : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct HandshakeTimeout : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ProtocolAbort : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BlockSizeError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonFiniteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct SingularProjection : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BarrierDomainError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NonBinaryColumn : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EmptyDataset : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoCertificate : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IOError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace blindfair

#endif  // BLINDFAIR_ERRORS_HPP_
