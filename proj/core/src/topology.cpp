// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/topology.hpp"

#include <charconv>
#include <numeric>

#include "hetnet/error.hpp"

namespace hetnet::net {

Topology::Topology(std::vector<std::size_t> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) {
    throw ParameterError("topology needs at least two layers");
  }
  for (std::size_t n : sizes_) {
    if (n == 0) {
      throw ParameterError("topology layer sizes must be >= 1");
    }
  }
}

Topology Topology::parse(std::string_view text) {
  std::vector<std::size_t> sizes;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t dash = std::min(text.find('-', pos), text.size());
    const std::string_view token = text.substr(pos, dash - pos);
    std::size_t value = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (token.empty() || ec != std::errc{} || end != token.data() + token.size()) {
      throw ParameterError("bad topology string '" + std::string(text) +
                           "': expected N-N-...-N");
    }
    sizes.push_back(value);
    pos = dash + 1;
  }
  return Topology(std::move(sizes));
}

std::string Topology::to_string() const {
  std::string out;
  for (std::size_t k = 0; k < sizes_.size(); ++k) {
    if (k) out += '-';
    out += std::to_string(sizes_[k]);
  }
  return out;
}

std::size_t Topology::neuron_count() const noexcept {
  return std::accumulate(sizes_.begin(), sizes_.end(), std::size_t{0});
}

std::size_t Topology::synapse_count() const noexcept {
  std::size_t total = 0;
  for (std::size_t k = 0; k + 1 < sizes_.size(); ++k) total += sizes_[k] * sizes_[k + 1];
  return total;
}

}  // namespace hetnet::net
