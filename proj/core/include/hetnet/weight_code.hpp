// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hetnet/topology.hpp"

namespace hetnet::net {

inline constexpr int kMaxWeightLevel = 7;

/// Programmable state of one signed 3-bit synapse: a sign switch selecting the
/// negative mirror branch plus three magnitude bits (w2 w1 w0).
struct WeightCode {
  bool negative = false;
  std::uint8_t bits = 0;  // 0..7

  bool bit(int b) const noexcept { return (bits >> b) & 1U; }
  friend bool operator==(const WeightCode&, const WeightCode&) = default;
};

/// (negative ? -1 : +1) * (4*w2 + 2*w1 + w0). Total.
constexpr int decode_weight(WeightCode code) noexcept {
  const int magnitude = code.bits & 0x7;
  return code.negative ? -magnitude : magnitude;
}

/// Inverse of decode_weight; zero is encoded with a positive sign.
/// Throws RangeError when |value| > 7.
WeightCode encode_weight(int value);

/// Real weight in [-1, 1] realized by a code: decode / 7.
constexpr double effective_weight(WeightCode code) noexcept {
  return static_cast<double>(decode_weight(code)) / kMaxWeightLevel;
}

/// Dense (post x pre) matrix of codes between two consecutive layers.
class CodeMatrix {
 public:
  CodeMatrix() = default;
  CodeMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), codes_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  WeightCode& operator()(std::size_t post, std::size_t pre) { return codes_[post * cols_ + pre]; }
  const WeightCode& operator()(std::size_t post, std::size_t pre) const {
    return codes_[post * cols_ + pre];
  }
  const std::vector<WeightCode>& codes() const noexcept { return codes_; }

  friend bool operator==(const CodeMatrix&, const CodeMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<WeightCode> codes_;
};

/// One CodeMatrix per consecutive layer pair.
using WeightMatrix = std::vector<CodeMatrix>;

/// All-zero codes shaped for `topology`.
WeightMatrix zero_weights(const Topology& topology);

/// Throws ShapeError if `weights` does not match `topology`.
void check_shape(const Topology& topology, const WeightMatrix& weights);

}  // namespace hetnet::net
