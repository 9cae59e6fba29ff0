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

#include "blindfair/transport.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

namespace blindfair {

bool frame_tag_known(std::uint8_t tag) { return tag >= 0x01 && tag <= 0x07; }

void Channel::note_send(const Frame& f) {
  stats_.frames_sent += 1;
  stats_.bytes_sent += 5 + f.payload.size();
  last_was_send_ = true;
}

void Channel::reset_stats() {
  stats_ = ChannelStats{};
  last_was_send_ = false;
}

void Channel::note_recv() {
  // A round is a send followed by the next receive.
  if (last_was_send_) {
    stats_.rounds += 1;
    last_was_send_ = false;
  }
}

std::vector<std::uint8_t> encode_frame(const Frame& f) {
  if (f.payload.size() > kMaxFramePayload) {
    throw FrameTooLarge("frame payload " + std::to_string(f.payload.size()) +
                        " exceeds limit");
  }
  std::vector<std::uint8_t> out;
  out.reserve(5 + f.payload.size());
  const std::uint32_t len = static_cast<std::uint32_t>(f.payload.size());
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<std::uint8_t>(len >> (8 * i)));
  }
  out.push_back(static_cast<std::uint8_t>(f.tag));
  out.insert(out.end(), f.payload.begin(), f.payload.end());
  return out;
}

Frame decode_frame(const std::uint8_t* data, std::size_t size) {
  if (size < 5) {
    throw ChannelClosed("truncated frame header");
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= static_cast<std::uint32_t>(data[i]) << (8 * i);
  }
  if (len > kMaxFramePayload) {
    throw FrameTooLarge("frame payload " + std::to_string(len) +
                        " exceeds limit");
  }
  if (size != 5 + static_cast<std::size_t>(len)) {
    throw ChannelClosed("frame length mismatch");
  }
  if (!frame_tag_known(data[4])) {
    throw UnknownTag("unknown frame tag " + std::to_string(data[4]));
  }
  Frame f;
  f.tag = static_cast<FrameTag>(data[4]);
  f.payload.assign(data + 5, data + 5 + len);
  return f;
}

// --- InProcChannel -----------------------------------------------------------

std::pair<std::unique_ptr<InProcChannel>, std::unique_ptr<InProcChannel>>
InProcChannel::create_pair() {
  auto q1 = std::make_shared<Queue>();
  auto q2 = std::make_shared<Queue>();
  auto a = std::unique_ptr<InProcChannel>(new InProcChannel());
  auto b = std::unique_ptr<InProcChannel>(new InProcChannel());
  a->out_ = q1;
  a->in_ = q2;
  b->out_ = q2;
  b->in_ = q1;
  return {std::move(a), std::move(b)};
}

void InProcChannel::send(const Frame& f) {
  if (f.payload.size() > kMaxFramePayload) {
    throw FrameTooLarge("frame payload " + std::to_string(f.payload.size()) +
                        " exceeds limit");
  }
  {
    std::lock_guard<std::mutex> lock(out_->mu);
    if (out_->closed) {
      throw ChannelClosed("send on closed channel");
    }
    out_->frames.push_back(f);
  }
  out_->cv.notify_one();
  note_send(f);
}

Frame InProcChannel::recv() {
  std::unique_lock<std::mutex> lock(in_->mu);
  in_->cv.wait(lock, [&] { return !in_->frames.empty() || in_->closed; });
  if (in_->frames.empty()) {
    throw ChannelClosed("recv on closed channel");
  }
  Frame f = std::move(in_->frames.front());
  in_->frames.pop_front();
  lock.unlock();
  note_recv();
  return f;
}

void InProcChannel::close() {
  for (auto& q : {in_, out_}) {
    if (!q) continue;
    {
      std::lock_guard<std::mutex> lock(q->mu);
      q->closed = true;
    }
    q->cv.notify_all();
  }
}

// --- TcpChannel --------------------------------------------------------------

namespace {

// Splits "host:port"; throws ConnectionRefused on malformed input.
std::pair<std::string, std::string> split_addr(const std::string& addr) {
  const auto pos = addr.rfind(':');
  if (pos == std::string::npos || pos == 0 || pos + 1 == addr.size()) {
    throw ConnectionRefused("malformed address: " + addr);
  }
  return {addr.substr(0, pos), addr.substr(pos + 1)};
}

int resolve_and_socket(const std::string& addr, sockaddr_storage* sa,
                       socklen_t* sa_len) {
  auto [host, port] = split_addr(addr);
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res) {
    throw ConnectionRefused("cannot resolve " + addr);
  }
  int fd = socket(res->ai_family, res->ai_socktype, res->ai_protocol);
  if (fd < 0) {
    freeaddrinfo(res);
    throw ConnectionRefused("socket() failed for " + addr);
  }
  std::memcpy(sa, res->ai_addr, res->ai_addrlen);
  *sa_len = res->ai_addrlen;
  freeaddrinfo(res);
  return fd;
}

void set_nodelay(int fd) {
  int one = 1;
  setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
}

// Tiny fixed preamble exchanged before any protocol frame: version u16 and
// role u8, carried inside a handshake-tagged frame.
Frame preamble_frame(int role) {
  Frame f;
  f.tag = FrameTag::kHandshake;
  f.payload = {static_cast<std::uint8_t>(kProtocolVersion & 0xff),
               static_cast<std::uint8_t>(kProtocolVersion >> 8),
               static_cast<std::uint8_t>(role)};
  return f;
}

void check_preamble(const Frame& f, int my_role) {
  if (f.tag != FrameTag::kHandshake || f.payload.size() != 3) {
    throw VersionMismatch("bad transport preamble");
  }
  const std::uint16_t version =
      static_cast<std::uint16_t>(f.payload[0]) |
      (static_cast<std::uint16_t>(f.payload[1]) << 8);
  if (version != kProtocolVersion) {
    throw VersionMismatch("peer protocol version " + std::to_string(version));
  }
  const int peer_role = f.payload[2];
  if (peer_role == my_role || peer_role < 1 || peer_role > 2) {
    throw ConfigMismatch("peer claims role " + std::to_string(peer_role));
  }
}

}  // namespace

std::unique_ptr<TcpChannel> TcpChannel::connect(const std::string& addr,
                                                int role,
                                                int timeout_seconds) {
  sockaddr_storage sa{};
  socklen_t sa_len = 0;
  int fd = resolve_and_socket(addr, &sa, &sa_len);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&sa), sa_len) != 0) {
    ::close(fd);
    throw ConnectionRefused("connect to " + addr + ": " +
                            std::strerror(errno));
  }
  set_nodelay(fd);
  auto ch = std::unique_ptr<TcpChannel>(new TcpChannel(fd));
  ch->send(preamble_frame(role));
  struct pollfd pfd {
    fd, POLLIN, 0
  };
  if (poll(&pfd, 1, timeout_seconds * 1000) <= 0) {
    throw HandshakeTimeout("no preamble reply from " + addr);
  }
  check_preamble(ch->recv(), role);
  ch->reset_stats();
  return ch;
}

std::unique_ptr<TcpChannel> TcpChannel::accept(const std::string& addr,
                                               int role,
                                               int timeout_seconds) {
  sockaddr_storage sa{};
  socklen_t sa_len = 0;
  int lfd = resolve_and_socket(addr, &sa, &sa_len);
  int one = 1;
  setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  if (bind(lfd, reinterpret_cast<sockaddr*>(&sa), sa_len) != 0 ||
      listen(lfd, 1) != 0) {
    ::close(lfd);
    throw ConnectionRefused("bind/listen on " + addr + ": " +
                            std::strerror(errno));
  }
  struct pollfd pfd {
    lfd, POLLIN, 0
  };
  if (poll(&pfd, 1, timeout_seconds * 1000) <= 0) {
    ::close(lfd);
    throw HandshakeTimeout("no connection on " + addr);
  }
  int fd = ::accept(lfd, nullptr, nullptr);
  ::close(lfd);
  if (fd < 0) {
    throw ConnectionRefused("accept on " + addr + ": " + std::strerror(errno));
  }
  set_nodelay(fd);
  auto ch = std::unique_ptr<TcpChannel>(new TcpChannel(fd));
  struct pollfd cfd {
    fd, POLLIN, 0
  };
  if (poll(&cfd, 1, timeout_seconds * 1000) <= 0) {
    throw HandshakeTimeout("no preamble on " + addr);
  }
  check_preamble(ch->recv(), role);
  ch->send(preamble_frame(role));
  ch->reset_stats();
  return ch;
}

TcpChannel::~TcpChannel() { close(); }

void TcpChannel::write_all(const std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t w = ::write(fd_, p, n);
    if (w <= 0) {
      if (w < 0 && errno == EINTR) continue;
      throw ChannelClosed("tcp write failed");
    }
    p += w;
    n -= static_cast<std::size_t>(w);
  }
}

void TcpChannel::read_all(std::uint8_t* p, std::size_t n) {
  while (n > 0) {
    const ssize_t r = ::read(fd_, p, n);
    if (r <= 0) {
      if (r < 0 && errno == EINTR) continue;
      throw ChannelClosed("tcp read failed or peer closed");
    }
    p += r;
    n -= static_cast<std::size_t>(r);
  }
}

void TcpChannel::send(const Frame& f) {
  if (fd_ < 0) {
    throw ChannelClosed("send on closed channel");
  }
  const auto bytes = encode_frame(f);
  write_all(bytes.data(), bytes.size());
  note_send(f);
}

Frame TcpChannel::recv() {
  if (fd_ < 0) {
    throw ChannelClosed("recv on closed channel");
  }
  std::uint8_t header[5];
  read_all(header, 5);
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) {
    len |= static_cast<std::uint32_t>(header[i]) << (8 * i);
  }
  if (len > kMaxFramePayload) {
    throw FrameTooLarge("frame payload " + std::to_string(len) +
                        " exceeds limit");
  }
  if (!frame_tag_known(header[4])) {
    throw UnknownTag("unknown frame tag " + std::to_string(header[4]));
  }
  Frame f;
  f.tag = static_cast<FrameTag>(header[4]);
  f.payload.resize(len);
  if (len > 0) {
    read_all(f.payload.data(), len);
  }
  note_recv();
  return f;
}

void TcpChannel::close() {
  if (fd_ >= 0) {
    ::close(fd_);
    fd_ = -1;
  }
}

}  // namespace blindfair
