// Copyright 2026 The privagg Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "privagg/tcp_transport.h"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <vector>

#include "privagg/errors.h"
#include "privagg/rng.h"

namespace privagg {

namespace {

void SendAll(int fd, const uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    ssize_t n = ::send(fd, data + off, len - off, MSG_NOSIGNAL);
    if (n <= 0) throw ChannelClosed("send failed");
    off += static_cast<size_t>(n);
  }
}

bool RecvAll(int fd, uint8_t* data, size_t len) {
  size_t off = 0;
  while (off < len) {
    ssize_t n = ::recv(fd, data + off, len - off, MSG_WAITALL);
    if (n <= 0) return false;
    off += static_cast<size_t>(n);
  }
  return true;
}

void SendRecord(int fd, const std::vector<uint8_t>& body) {
  uint8_t len[4] = {
      static_cast<uint8_t>((body.size() >> 24) & 0xff),
      static_cast<uint8_t>((body.size() >> 16) & 0xff),
      static_cast<uint8_t>((body.size() >> 8) & 0xff),
      static_cast<uint8_t>(body.size() & 0xff),
  };
  SendAll(fd, len, 4);
  SendAll(fd, body.data(), body.size());
}

bool RecvRecord(int fd, std::vector<uint8_t>& body) {
  uint8_t len[4];
  if (!RecvAll(fd, len, 4)) return false;
  const uint32_t n = (static_cast<uint32_t>(len[0]) << 24) |
                     (static_cast<uint32_t>(len[1]) << 16) |
                     (static_cast<uint32_t>(len[2]) << 8) | len[3];
  if (n > (64u << 20)) throw Error("oversized record");
  body.resize(n);
  return RecvAll(fd, body.data(), n);
}

struct OutLink {
  int fd = -1;
  uint32_t salt = 0;
  uint64_t counter = 0;
  AeadKey key{};
};

struct InLink {
  int fd = -1;
  uint32_t peer = 0;
  uint32_t salt = 0;
  uint64_t last_seq = 0;
  bool seen_any = false;
  AeadKey key{};
};

class TcpTransport : public Transport {
 public:
  TcpTransport(uint32_t party_id, std::map<uint32_t, TcpPeer> peers,
               AeadKey master)
      : party_id_(party_id), peers_(std::move(peers)), master_(master) {
    auto it = peers_.find(party_id_);
    if (it == peers_.end()) throw InvalidConfig("party missing from peer map");
    listen_fd_ = ::socket(AF_INET, SOCK_STREAM, 0);
    if (listen_fd_ < 0) throw ChannelClosed("socket failed");
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(it->second.port);
    addr.sin_addr.s_addr = htonl(INADDR_ANY);
    if (::bind(listen_fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) !=
        0) {
      throw ChannelClosed("bind failed");
    }
    if (::listen(listen_fd_, 256) != 0) throw ChannelClosed("listen failed");
  }

  ~TcpTransport() override {
    for (auto& [peer, link] : out_links_) {
      if (link.fd >= 0) ::close(link.fd);
    }
    for (auto& link : in_links_) {
      if (link.fd >= 0) ::close(link.fd);
    }
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  void Send(const Frame& frame) override {
    OutLink& link = Connect(frame.recipient);
    link.counter++;  // counters start at 1 so nonces never repeat
    std::vector<uint8_t> plain;
    const std::vector<uint8_t> encoded = frame.Encode();
    plain.reserve(8 + encoded.size());
    for (int i = 0; i < 8; ++i) {
      plain.push_back(static_cast<uint8_t>((link.counter >> (8 * i)) & 0xff));
    }
    plain.insert(plain.end(), encoded.begin(), encoded.end());
    const auto nonce = MakeNonce(link.salt, link.counter);
    SendRecord(link.fd, AeadSeal(link.key, nonce, plain));
  }

  std::optional<Frame> Recv(std::chrono::milliseconds timeout) override {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    for (;;) {
      const auto now = std::chrono::steady_clock::now();
      const int wait_ms =
          now >= deadline
              ? 0
              : static_cast<int>(
                    std::chrono::duration_cast<std::chrono::milliseconds>(
                        deadline - now)
                        .count()) +
                    1;
      std::vector<pollfd> fds;
      fds.push_back({listen_fd_, POLLIN, 0});
      for (const InLink& link : in_links_) fds.push_back({link.fd, POLLIN, 0});
      const int rc = ::poll(fds.data(), fds.size(), wait_ms);
      if (rc < 0) throw ChannelClosed("poll failed");
      if (rc == 0) return std::nullopt;  // timeout
      if (fds[0].revents & POLLIN) Accept();
      for (size_t i = 1; i < fds.size(); ++i) {
        if (!(fds[i].revents & (POLLIN | POLLHUP))) continue;
        auto frame = ReadFrom(in_links_[i - 1]);
        if (frame) return frame;
        // closed or rejected frame; drop the link and keep polling
        if (in_links_[i - 1].fd < 0) {
          in_links_.erase(in_links_.begin() + static_cast<long>(i - 1));
        }
        break;
      }
      if (std::chrono::steady_clock::now() >= deadline) return std::nullopt;
    }
  }

 private:
  OutLink& Connect(uint32_t peer) {
    auto it = out_links_.find(peer);
    if (it != out_links_.end()) return it->second;
    auto pit = peers_.find(peer);
    if (pit == peers_.end()) throw InvalidConfig("unknown peer");
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw ChannelClosed("socket failed");
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(pit->second.port);
    if (::inet_pton(AF_INET, pit->second.host.c_str(), &addr.sin_addr) != 1) {
      ::close(fd);
      throw InvalidConfig("bad peer address");
    }
    if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
      ::close(fd);
      throw ChannelClosed("connect failed");
    }
    OutLink link;
    link.fd = fd;
    // Directional salt bit keeps both directions of the shared link key on
    // disjoint nonce spaces.
    link.salt = static_cast<uint32_t>(salt_gen_.NextUint64()) & 0x7fffffffu;
    if (party_id_ < peer) link.salt |= 0x80000000u;
    link.key = DeriveLinkKey(master_, party_id_, peer);
    // Hello record, plaintext: sender id + link salt.
    std::vector<uint8_t> hello(8);
    for (int i = 0; i < 4; ++i) {
      hello[i] = static_cast<uint8_t>((party_id_ >> (8 * i)) & 0xff);
      hello[4 + i] = static_cast<uint8_t>((link.salt >> (8 * i)) & 0xff);
    }
    SendRecord(fd, hello);
    return out_links_.emplace(peer, std::move(link)).first->second;
  }

  void Accept() {
    int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) return;
    std::vector<uint8_t> hello;
    if (!RecvRecord(fd, hello) || hello.size() != 8) {
      ::close(fd);
      return;
    }
    InLink link;
    link.fd = fd;
    for (int i = 0; i < 4; ++i) {
      link.peer |= static_cast<uint32_t>(hello[i]) << (8 * i);
      link.salt |= static_cast<uint32_t>(hello[4 + i]) << (8 * i);
    }
    link.key = DeriveLinkKey(master_, party_id_, link.peer);
    in_links_.push_back(link);
  }

  std::optional<Frame> ReadFrom(InLink& link) {
    std::vector<uint8_t> record;
    if (!RecvRecord(link.fd, record)) {
      ::close(link.fd);
      link.fd = -1;
      return std::nullopt;
    }
    const auto nonce_guess = [&](uint64_t seq) {
      return MakeNonce(link.salt, seq);
    };
    // Sequence number is bound into the ciphertext; decrypt with the next
    // expected counter values and reject replays/duplicates.
    std::vector<uint8_t> plain;
    uint64_t seq = link.last_seq + 1;
    try {
      plain = AeadOpen(link.key, nonce_guess(seq), record);
    } catch (const AuthenticationFailure&) {
      ::close(link.fd);
      link.fd = -1;
      return std::nullopt;  // tampered or replayed frame: drop the link
    }
    uint64_t seq_in = 0;
    if (plain.size() < 8) return std::nullopt;
    for (int i = 0; i < 8; ++i) {
      seq_in |= static_cast<uint64_t>(plain[i]) << (8 * i);
    }
    if (seq_in != seq || !link.seen_any && seq_in != 1) {
      ::close(link.fd);
      link.fd = -1;
      return std::nullopt;
    }
    link.last_seq = seq;
    link.seen_any = true;
    Frame frame = Frame::Decode(
        std::span<const uint8_t>(plain.data() + 8, plain.size() - 8));
    if (frame.recipient != party_id_) return std::nullopt;
    return frame;
  }

  uint32_t party_id_;
  std::map<uint32_t, TcpPeer> peers_;
  AeadKey master_;
  int listen_fd_ = -1;
  std::map<uint32_t, OutLink> out_links_;
  std::vector<InLink> in_links_;
  SecureBitGen salt_gen_;
};

}  // namespace

TcpNetwork::TcpNetwork(std::map<uint32_t, TcpPeer> peers, AeadKey master_key)
    : peers_(std::move(peers)), master_key_(master_key) {}

std::unique_ptr<Transport> TcpNetwork::Join(uint32_t party_id) {
  return std::make_unique<TcpTransport>(party_id, peers_, master_key_);
}

}  // namespace privagg
