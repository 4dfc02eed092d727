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
//
// Socket transport: length-prefixed TCP framing with AES-GCM-256 under
// pre-shared per-link keys. Framing per record: u32 big-endian length,
// then AEAD ciphertext of (u64 sequence number || frame bytes). Nonce is
// a 32-bit link salt followed by a 64-bit counter. Key distribution is
// out of scope; per-link keys are derived from one pre-shared master key.

#ifndef PRIVAGG_TCP_TRANSPORT_H_
#define PRIVAGG_TCP_TRANSPORT_H_

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "privagg/aead.h"
#include "privagg/transport.h"

namespace privagg {

struct TcpPeer {
  std::string host = "127.0.0.1";
  uint16_t port = 0;
};

class TcpNetwork : public Network {
 public:
  // peers maps every party id (including the local ones) to its listen
  // address. All parties joined through one TcpNetwork share the master key.
  TcpNetwork(std::map<uint32_t, TcpPeer> peers, AeadKey master_key);

  std::unique_ptr<Transport> Join(uint32_t party_id) override;

 private:
  std::map<uint32_t, TcpPeer> peers_;
  AeadKey master_key_;
};

}  // namespace privagg

#endif  // PRIVAGG_TCP_TRANSPORT_H_
