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

#include "privagg/fixed_point.h"

#include <cmath>
#include <cstring>

#include "privagg/errors.h"

namespace privagg {

void FixedPointParams::Validate() const {
  if (bit_width == 0 || bit_width > 64 || bit_width % 8 != 0) {
    throw InvalidConfig("bit_width must be a multiple of 8 in (0, 64]");
  }
  if (frac_bits == 0 || frac_bits >= bit_width) {
    throw InvalidConfig("frac_bits must satisfy 0 < f < b");
  }
}

double FixedPointParams::RangeBound() const {
  return std::ldexp(1.0, bit_width - frac_bits - 1);
}

uint64_t FixedPointParams::Mask() const {
  return bit_width == 64 ? ~0ULL : ((1ULL << bit_width) - 1);
}

FixedPointVector::FixedPointVector(std::vector<uint64_t> values,
                                   FixedPointParams params)
    : values_(std::move(values)), params_(params) {
  params_.Validate();
  const uint64_t mask = params_.Mask();
  for (uint64_t& v : values_) v &= mask;
}

FixedPointVector FixedPointVector::Encode(std::span<const double> x,
                                          FixedPointParams params) {
  params.Validate();
  const double bound = params.RangeBound();
  const double scale = std::ldexp(1.0, params.frac_bits);
  const uint64_t mask = params.Mask();
  std::vector<uint64_t> values(x.size());
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(std::fabs(x[i]) < bound)) {
      throw OverflowError("component exceeds representable range");
    }
    const double scaled = std::nearbyint(x[i] * scale);
    // |scaled| <= 2^(b-1) holds, so the signed word fits in 64 bits.
    const int64_t word = static_cast<int64_t>(scaled);
    values[i] = static_cast<uint64_t>(word) & mask;
  }
  return FixedPointVector(std::move(values), params);
}

std::vector<double> FixedPointVector::Decode() const {
  const double inv_scale = std::ldexp(1.0, -params_.frac_bits);
  const uint64_t sign_bit = 1ULL << (params_.bit_width - 1);
  std::vector<double> out(values_.size());
  for (size_t i = 0; i < values_.size(); ++i) {
    int64_t word;
    if (params_.bit_width == 64) {
      word = static_cast<int64_t>(values_[i]);
    } else if (values_[i] & sign_bit) {
      word = static_cast<int64_t>(values_[i]) -
             static_cast<int64_t>(1ULL << params_.bit_width);
    } else {
      word = static_cast<int64_t>(values_[i]);
    }
    out[i] = static_cast<double>(word) * inv_scale;
  }
  return out;
}

FixedPointVector FixedPointVector::Add(const FixedPointVector& other) const {
  if (other.values_.size() != values_.size() || other.params_ != params_) {
    throw DimensionMismatch("fixed-point vectors are not compatible");
  }
  const uint64_t mask = params_.Mask();
  std::vector<uint64_t> out(values_.size());
  for (size_t i = 0; i < values_.size(); ++i) {
    out[i] = (values_[i] + other.values_[i]) & mask;
  }
  return FixedPointVector(std::move(out), params_);
}

FixedPointVector FixedPointVector::Sub(const FixedPointVector& other) const {
  if (other.values_.size() != values_.size() || other.params_ != params_) {
    throw DimensionMismatch("fixed-point vectors are not compatible");
  }
  const uint64_t mask = params_.Mask();
  std::vector<uint64_t> out(values_.size());
  for (size_t i = 0; i < values_.size(); ++i) {
    out[i] = (values_[i] - other.values_[i]) & mask;
  }
  return FixedPointVector(std::move(out), params_);
}

std::vector<FixedPointVector> FixedPointVector::SplitShares(
    size_t n_shares, BitGen& gen) const {
  if (n_shares == 0) throw InvalidConfig("need at least one share");
  const uint64_t mask = params_.Mask();
  std::vector<FixedPointVector> shares;
  shares.reserve(n_shares);
  std::vector<uint64_t> running(values_.size(), 0);
  for (size_t k = 0; k + 1 < n_shares; ++k) {
    std::vector<uint64_t> r(values_.size());
    for (size_t i = 0; i < r.size(); ++i) {
      r[i] = gen.NextUint64() & mask;
      running[i] = (running[i] + r[i]) & mask;
    }
    shares.emplace_back(std::move(r), params_);
  }
  // Last share closes the telescoping sum: v - sum of the others mod 2^b.
  std::vector<uint64_t> last(values_.size());
  for (size_t i = 0; i < last.size(); ++i) {
    last[i] = (values_[i] - running[i]) & mask;
  }
  shares.emplace_back(std::move(last), params_);
  return shares;
}

FixedPointVector FixedPointVector::Zero(size_t dimension,
                                        FixedPointParams params) {
  return FixedPointVector(std::vector<uint64_t>(dimension, 0), params);
}

std::vector<uint8_t> FixedPointVector::Serialize() const {
  const size_t word_bytes = params_.bit_width / 8;
  std::vector<uint8_t> out;
  out.reserve(8 + values_.size() * word_bytes);
  auto put16 = [&out](uint16_t v) {
    out.push_back(static_cast<uint8_t>(v & 0xff));
    out.push_back(static_cast<uint8_t>(v >> 8));
  };
  put16(params_.bit_width);
  put16(params_.frac_bits);
  const uint32_t dim = static_cast<uint32_t>(values_.size());
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<uint8_t>((dim >> (8 * i)) & 0xff));
  }
  for (uint64_t v : values_) {
    for (size_t i = 0; i < word_bytes; ++i) {
      out.push_back(static_cast<uint8_t>((v >> (8 * i)) & 0xff));
    }
  }
  return out;
}

FixedPointVector FixedPointVector::Deserialize(std::span<const uint8_t> b) {
  if (b.size() < 8) throw Error("fixed-point frame too short");
  FixedPointParams params;
  params.bit_width = static_cast<uint16_t>(b[0] | (b[1] << 8));
  params.frac_bits = static_cast<uint16_t>(b[2] | (b[3] << 8));
  params.Validate();
  uint32_t dim = 0;
  for (int i = 0; i < 4; ++i) dim |= static_cast<uint32_t>(b[4 + i]) << (8 * i);
  const size_t word_bytes = params.bit_width / 8;
  if (b.size() != 8 + static_cast<size_t>(dim) * word_bytes) {
    throw Error("fixed-point frame length mismatch");
  }
  std::vector<uint64_t> values(dim);
  size_t pos = 8;
  for (uint32_t j = 0; j < dim; ++j) {
    uint64_t v = 0;
    for (size_t i = 0; i < word_bytes; ++i) {
      v |= static_cast<uint64_t>(b[pos++]) << (8 * i);
    }
    values[j] = v;
  }
  return FixedPointVector(std::move(values), params);
}

}  // namespace privagg
