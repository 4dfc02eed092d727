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

#include "privagg/rng.h"

#include <openssl/rand.h>

#include <stdexcept>

namespace privagg {

uint64_t SecureBitGen::NextUint64() {
  if (pos_ == buf_.size()) {
    buf_.resize(kBufWords);
    if (RAND_bytes(reinterpret_cast<unsigned char*>(buf_.data()),
                   static_cast<int>(buf_.size() * sizeof(uint64_t))) != 1) {
      throw std::runtime_error("RAND_bytes failed");
    }
    pos_ = 0;
  }
  return buf_[pos_++];
}

uint64_t Mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t DeriveSeed(uint64_t master_seed, const std::string& tag) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return Mix64(master_seed ^ Mix64(h));
}

RngFactory SecureRngFactory() {
  return [](uint32_t) { return std::make_unique<SecureBitGen>(); };
}

RngFactory SeededRngFactory(uint64_t master_seed) {
  return [master_seed](uint32_t party_id) {
    return std::make_unique<SeededBitGen>(
        Mix64(master_seed ^ Mix64(party_id + 1)));
  };
}

}  // namespace privagg
