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

#ifndef PRIVAGG_RNG_H_
#define PRIVAGG_RNG_H_

#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <vector>

namespace privagg {

// Uniform 64-bit generator interface. Protocol security rests on blinding
// shares drawn from a cryptographically secure source (SecureBitGen);
// tests and the harness inject SeededBitGen for reproducibility.
class BitGen {
 public:
  virtual ~BitGen() = default;
  virtual uint64_t NextUint64() = 0;
};

// CSPRNG backed by OpenSSL RAND_bytes, buffered.
class SecureBitGen : public BitGen {
 public:
  SecureBitGen() = default;
  uint64_t NextUint64() override;

 private:
  static constexpr size_t kBufWords = 512;
  std::vector<uint64_t> buf_;
  size_t pos_ = 0;
};

// Deterministic generator for tests and seeded experiment runs.
class SeededBitGen : public BitGen {
 public:
  explicit SeededBitGen(uint64_t seed) : engine_(seed) {}
  uint64_t NextUint64() override { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Adapter satisfying UniformRandomBitGenerator for use with <random>
// distributions.
struct BitGenRef {
  using result_type = uint64_t;
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<uint64_t>::max();
  }
  result_type operator()() { return gen->NextUint64(); }
  BitGen* gen;
};

// One generator per party; the factory owns seed derivation.
using RngFactory = std::function<std::unique_ptr<BitGen>(uint32_t party_id)>;

RngFactory SecureRngFactory();
RngFactory SeededRngFactory(uint64_t master_seed);

// SplitMix64 finalizer; stable across platforms.
uint64_t Mix64(uint64_t x);

// Stable string hash (FNV-1a + mix) for per-cell seed derivation.
uint64_t DeriveSeed(uint64_t master_seed, const std::string& tag);

}  // namespace privagg

#endif  // PRIVAGG_RNG_H_
