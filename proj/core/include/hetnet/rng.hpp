// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>
#include <boost/random/uniform_real_distribution.hpp>

namespace hetnet {

// std::mt19937_64 is fully specified by the standard; the boost distributions
// are used instead of <random>'s because their output is identical across
// standard library implementations.
using Engine = std::mt19937_64;

/// Independent stream seed for (seed, stream) pairs.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline double standard_normal(Engine& engine) {
  return boost::random::normal_distribution<double>(0.0, 1.0)(engine);
}

inline double uniform_real(Engine& engine, double lo, double hi) {
  return boost::random::uniform_real_distribution<double>(lo, hi)(engine);
}

inline std::size_t uniform_index(Engine& engine, std::size_t n) {
  return boost::random::uniform_int_distribution<std::size_t>(0, n - 1)(engine);
}

/// Fisher-Yates shuffle with a portable index distribution.
template <typename T>
void shuffle(std::span<T> values, Engine& engine) {
  for (std::size_t i = values.size(); i > 1; --i) {
    const std::size_t j = uniform_index(engine, i);
    std::swap(values[i - 1], values[j]);
  }
}

}  // namespace hetnet
