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

// Duplex message channel between the two parties. Framing is bit-exact and
// language-neutral: u32 little-endian payload length, u8 tag, payload bytes.

#ifndef BLINDFAIR_TRANSPORT_HPP_
#define BLINDFAIR_TRANSPORT_HPP_

#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "blindfair/errors.hpp"

namespace blindfair {

enum class FrameTag : std::uint8_t {
  kHandshake = 0x01,
  kShareBatch = 0x02,
  kBeaverEF = 0x03,
  kBitBatch = 0x04,
  kReconstruct = 0x05,
  kCertificate = 0x06,
  kAbort = 0x07,
};

bool frame_tag_known(std::uint8_t tag);

struct Frame {
  FrameTag tag;
  std::vector<std::uint8_t> payload;
};

constexpr std::size_t kMaxFramePayload = std::size_t{1} << 30;
constexpr std::uint16_t kProtocolVersion = 1;

struct ChannelStats {
  std::uint64_t frames_sent = 0;
  std::uint64_t bytes_sent = 0;
  std::uint64_t rounds = 0;  // send->recv direction changes
};

// Encode/decode one frame to/from the wire layout (used by both channel
// implementations and directly testable).
std::vector<std::uint8_t> encode_frame(const Frame& f);
Frame decode_frame(const std::uint8_t* data, std::size_t size);

class Channel {
 public:
  virtual ~Channel() = default;
  virtual void send(const Frame& f) = 0;
  virtual Frame recv() = 0;
  virtual void close() = 0;
  const ChannelStats& stats() const { return stats_; }

 protected:
  void note_send(const Frame& f);
  void note_recv();
  // Zeroes the counters (used after the transport preamble so stats cover
  // protocol traffic only, matching the in-process channel).
  void reset_stats();
  ChannelStats stats_;

 private:
  bool last_was_send_ = false;
};

// In-process channel: a pair of endpoints backed by two queues. Used by
// tests and --loopback mode.
class InProcChannel : public Channel {
 public:
  static std::pair<std::unique_ptr<InProcChannel>, std::unique_ptr<InProcChannel>>
  create_pair();

  void send(const Frame& f) override;
  Frame recv() override;
  void close() override;

 private:
  struct Queue {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<Frame> frames;
    bool closed = false;
  };
  InProcChannel() = default;
  std::shared_ptr<Queue> in_, out_;
};

// TCP channel for two-process deployment. The connecting side sends a
// handshake frame (version, role) first; the accepting side checks it.
class TcpChannel : public Channel {
 public:
  // addr is "host:port".
  static std::unique_ptr<TcpChannel> connect(const std::string& addr,
                                             int role,
                                             int timeout_seconds = 10);
  static std::unique_ptr<TcpChannel> accept(const std::string& addr,
                                            int role,
                                            int timeout_seconds = 10);
  ~TcpChannel() override;

  void send(const Frame& f) override;
  Frame recv() override;
  void close() override;

 private:
  explicit TcpChannel(int fd) : fd_(fd) {}
  void write_all(const std::uint8_t* p, std::size_t n);
  void read_all(std::uint8_t* p, std::size_t n);
  int fd_ = -1;
};

}  // namespace blindfair

#endif  // BLINDFAIR_TRANSPORT_HPP_
