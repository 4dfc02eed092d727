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

#include "privagg/aead.h"

#include <openssl/evp.h>
#include <openssl/sha.h>

#include <memory>
#include <stdexcept>
#include <string>

#include "privagg/errors.h"

namespace privagg {

namespace {
constexpr size_t kTagLen = 16;

struct CtxDeleter {
  void operator()(EVP_CIPHER_CTX* ctx) const { EVP_CIPHER_CTX_free(ctx); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;
}  // namespace

std::array<uint8_t, 12> MakeNonce(uint32_t link_salt, uint64_t counter) {
  std::array<uint8_t, 12> nonce;
  for (int i = 0; i < 4; ++i) {
    nonce[i] = static_cast<uint8_t>((link_salt >> (8 * i)) & 0xff);
  }
  for (int i = 0; i < 8; ++i) {
    nonce[4 + i] = static_cast<uint8_t>((counter >> (8 * i)) & 0xff);
  }
  return nonce;
}

std::vector<uint8_t> AeadSeal(const AeadKey& key,
                              std::span<const uint8_t, 12> nonce,
                              std::span<const uint8_t> plaintext) {
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    throw std::runtime_error("AES-GCM encrypt init failed");
  }
  std::vector<uint8_t> out(plaintext.size() + kTagLen);
  int len = 0;
  if (EVP_EncryptUpdate(ctx.get(), out.data(), &len, plaintext.data(),
                        static_cast<int>(plaintext.size())) != 1) {
    throw std::runtime_error("AES-GCM encrypt failed");
  }
  int fin = 0;
  if (EVP_EncryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw std::runtime_error("AES-GCM finalize failed");
  }
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, kTagLen,
                          out.data() + plaintext.size()) != 1) {
    throw std::runtime_error("AES-GCM tag extraction failed");
  }
  return out;
}

std::vector<uint8_t> AeadOpen(const AeadKey& key,
                              std::span<const uint8_t, 12> nonce,
                              std::span<const uint8_t> ciphertext) {
  if (ciphertext.size() < kTagLen) {
    throw AuthenticationFailure("ciphertext shorter than tag");
  }
  const size_t body_len = ciphertext.size() - kTagLen;
  CipherCtx ctx(EVP_CIPHER_CTX_new());
  if (!ctx) throw std::runtime_error("EVP_CIPHER_CTX_new failed");
  if (EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(),
                         nonce.data()) != 1) {
    throw std::runtime_error("AES-GCM decrypt init failed");
  }
  std::vector<uint8_t> out(body_len);
  int len = 0;
  if (body_len > 0 &&
      EVP_DecryptUpdate(ctx.get(), out.data(), &len, ciphertext.data(),
                        static_cast<int>(body_len)) != 1) {
    throw AuthenticationFailure("AES-GCM decrypt failed");
  }
  std::array<uint8_t, kTagLen> tag;
  std::copy(ciphertext.begin() + body_len, ciphertext.end(), tag.begin());
  if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, kTagLen,
                          tag.data()) != 1) {
    throw std::runtime_error("AES-GCM tag set failed");
  }
  int fin = 0;
  if (EVP_DecryptFinal_ex(ctx.get(), out.data() + len, &fin) != 1) {
    throw AuthenticationFailure("frame failed authentication");
  }
  return out;
}

AeadKey DeriveLinkKey(const AeadKey& master, uint32_t party_a, uint32_t party_b) {
  if (party_a > party_b) std::swap(party_a, party_b);
  std::array<uint8_t, 32 + 8> input;
  std::copy(master.begin(), master.end(), input.begin());
  for (int i = 0; i < 4; ++i) {
    input[32 + i] = static_cast<uint8_t>((party_a >> (8 * i)) & 0xff);
    input[36 + i] = static_cast<uint8_t>((party_b >> (8 * i)) & 0xff);
  }
  AeadKey out;
  SHA256(input.data(), input.size(), out.data());
  return out;
}

AeadKey ParseKeyHex(const std::string& hex) {
  if (hex.size() != 64) throw InvalidConfig("key must be 64 hex characters");
  AeadKey key;
  for (size_t i = 0; i < 32; ++i) {
    key[i] = static_cast<uint8_t>(std::stoi(hex.substr(2 * i, 2), nullptr, 16));
  }
  return key;
}

}  // namespace privagg
