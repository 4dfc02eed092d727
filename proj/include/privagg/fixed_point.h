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
// Fixed-point vectors over Z_{2^b}. Additive blinding shares cancel
// bit-exactly under modular addition, which floating point cannot offer.
// Negative reals use the two's-complement reading of the modular word.

#ifndef PRIVAGG_FIXED_POINT_H_
#define PRIVAGG_FIXED_POINT_H_

#include <cstdint>
#include <span>
#include <vector>

#include "privagg/rng.h"

namespace privagg {

struct FixedPointParams {
  uint16_t bit_width = 64;  // total bits b, at most 64, multiple of 8
  uint16_t frac_bits = 32;  // fractional bits f, 0 < f < b

  // Throws InvalidConfig if the invariants above do not hold.
  void Validate() const;
  // Largest representable magnitude, 2^(b-f-1).
  double RangeBound() const;
  // Mask keeping the low b bits of a word.
  uint64_t Mask() const;

  friend bool operator==(const FixedPointParams&,
                         const FixedPointParams&) = default;
};

class FixedPointVector {
 public:
  FixedPointVector() = default;
  FixedPointVector(std::vector<uint64_t> values, FixedPointParams params);

  // Rounds each component to f fractional bits, reduced mod 2^b.
  // Throws OverflowError when |x_j| >= 2^(b-f-1).
  static FixedPointVector Encode(std::span<const double> x,
                                 FixedPointParams params);

  // Signed (two's-complement) reading scaled back by 2^-f.
  std::vector<double> Decode() const;

  // Componentwise addition mod 2^b. Throws DimensionMismatch when the
  // dimension or params differ.
  FixedPointVector Add(const FixedPointVector& other) const;
  // Componentwise subtraction mod 2^b.
  FixedPointVector Sub(const FixedPointVector& other) const;

  // Additive secret shares: shares 1..M-1 uniform on [0, 2^b)^d, share M
  // chosen so the modular sum of all M shares equals *this.
  std::vector<FixedPointVector> SplitShares(size_t n_shares,
                                            BitGen& gen) const;

  static FixedPointVector Zero(size_t dimension, FixedPointParams params);

  size_t dimension() const { return values_.size(); }
  const FixedPointParams& params() const { return params_; }
  const std::vector<uint64_t>& values() const { return values_; }

  // Wire format: u16 bit_width, u16 frac_bits, u32 dimension, then d
  // little-endian b-bit words.
  std::vector<uint8_t> Serialize() const;
  static FixedPointVector Deserialize(std::span<const uint8_t> bytes);

  friend bool operator==(const FixedPointVector&,
                         const FixedPointVector&) = default;

 private:
  std::vector<uint64_t> values_;
  FixedPointParams params_;
};

}  // namespace privagg

#endif  // PRIVAGG_FIXED_POINT_H_
