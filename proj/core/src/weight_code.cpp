// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/weight_code.hpp"

#include <cstdlib>
#include <string>

#include "hetnet/error.hpp"

namespace hetnet::net {

WeightCode encode_weight(int value) {
  if (value < -kMaxWeightLevel || value > kMaxWeightLevel) {
    throw RangeError("weight value " + std::to_string(value) + " outside [-7, 7]");
  }
  return WeightCode{value < 0, static_cast<std::uint8_t>(std::abs(value))};
}

WeightMatrix zero_weights(const Topology& topology) {
  WeightMatrix weights;
  for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
    weights.emplace_back(topology.size(k + 1), topology.size(k));
  }
  return weights;
}

void check_shape(const Topology& topology, const WeightMatrix& weights) {
  if (weights.size() + 1 != topology.num_layers()) {
    throw ShapeError("weight matrix count does not match topology " + topology.to_string());
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != topology.size(k + 1) || weights[k].cols() != topology.size(k)) {
      throw ShapeError("weight matrix " + std::to_string(k) + " has wrong shape for topology " +
                       topology.to_string());
    }
  }
}

}  // namespace hetnet::net
