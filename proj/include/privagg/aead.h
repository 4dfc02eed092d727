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

#ifndef PRIVAGG_AEAD_H_
#define PRIVAGG_AEAD_H_

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace privagg {

using AeadKey = std::array<uint8_t, 32>;

// 96-bit nonce: 32-bit link salt followed by a 64-bit counter, both
// little-endian. Counters never repeat within a link.
std::array<uint8_t, 12> MakeNonce(uint32_t link_salt, uint64_t counter);

// AES-GCM-256 seal; returns ciphertext || 16-byte tag.
std::vector<uint8_t> AeadSeal(const AeadKey& key,
                              std::span<const uint8_t, 12> nonce,
                              std::span<const uint8_t> plaintext);

// Throws AuthenticationFailure when the tag does not verify.
std::vector<uint8_t> AeadOpen(const AeadKey& key,
                              std::span<const uint8_t, 12> nonce,
                              std::span<const uint8_t> ciphertext);

// Per-link key derived from a pre-shared master secret and the unordered
// party pair, via SHA-256.
AeadKey DeriveLinkKey(const AeadKey& master, uint32_t party_a, uint32_t party_b);

AeadKey ParseKeyHex(const std::string& hex);

}  // namespace privagg

#endif  // PRIVAGG_AEAD_H_
