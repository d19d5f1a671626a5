// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace hetnet::net {

/// Layer sizes of a feed-forward network, input layer first.
class Topology {
 public:
  Topology() = default;
  /// Throws ParameterError unless there are at least two layers of size >= 1.
  explicit Topology(std::vector<std::size_t> layer_sizes);

  /// Parses the canonical "N-N-...-N" spelling.
  static Topology parse(std::string_view text);
  std::string to_string() const;

  const std::vector<std::size_t>& layer_sizes() const noexcept { return sizes_; }
  std::size_t num_layers() const noexcept { return sizes_.size(); }
  std::size_t size(std::size_t layer) const { return sizes_.at(layer); }
  std::size_t input_size() const { return sizes_.front(); }
  std::size_t output_size() const { return sizes_.back(); }
  std::size_t neuron_count() const noexcept;
  /// Number of programmable synapses; one multiply-accumulate each per presentation.
  std::size_t synapse_count() const noexcept;

  friend bool operator==(const Topology&, const Topology&) = default;

 private:
  std::vector<std::size_t> sizes_;
};

}  // namespace hetnet::net
