// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/topology.hpp"
#include "hetnet/weight_code.hpp"

namespace hetnet::net {

/// Per-neuron description of a heterogeneous rectified-linear network.
///
/// Neuron i of layer k computes x = max(0, slopes[k][i] * s) where s is its
/// summed input current. A negative synapse driven by neuron j contributes
/// neg_gains[k][j] * w * x_j instead of w * x_j, i.e. the negative-branch
/// mismatch belongs to the presynaptic soma. Output-layer gains exist for
/// uniform indexing but are never used.
struct TransferProfile {
  std::vector<Eigen::VectorXd> slopes;
  std::vector<Eigen::VectorXd> neg_gains;

  /// All slopes and gains equal to one.
  static TransferProfile ideal(const Topology& topology);

  /// Throws ShapeError / DomainError if the profile does not fit `topology`
  /// or contains non-positive or non-finite entries.
  void validate(const Topology& topology) const;

  /// Divides every layer's slopes by that layer's mean slope.
  void normalize_slopes();

  friend bool operator==(const TransferProfile&, const TransferProfile&) = default;
};

/// Real-valued (post x pre) weight matrices, one per layer pair.
using RealWeights = std::vector<Eigen::MatrixXd>;

/// decode/7 for every code.
RealWeights to_real(const WeightMatrix& codes);

void check_shape(const Topology& topology, const RealWeights& weights);

/// Per-layer summed input currents and rectified outputs of one forward pass.
/// inputs[0] is the applied input vector.
struct Activations {
  std::vector<Eigen::VectorXd> inputs;
  std::vector<Eigen::VectorXd> outputs;

  const Eigen::VectorXd& output() const { return outputs.back(); }
};

/// Evaluates the network on one input vector (entries must be >= 0).
Activations forward(const Topology& topology, const TransferProfile& profile,
                    const RealWeights& weights, std::span<const double> input);
Activations forward(const Topology& topology, const TransferProfile& profile,
                    const WeightMatrix& codes, std::span<const double> input);

/// Batched forward pass; columns of `inputs` are samples. Returns the rectified
/// outputs of every layer.
std::vector<Eigen::MatrixXd> forward_batch(const Topology& topology, const TransferProfile& profile,
                                           const RealWeights& weights,
                                           const Eigen::MatrixXd& inputs);

/// Mean squared error and its exact gradient with respect to every weight.
struct Gradients {
  double loss = 0.0;
  RealWeights weights;
  Eigen::MatrixXd outputs;  // output-layer activations, one column per sample
};

/// Loss is averaged over output units and batch columns. Subgradient of the
/// rectifier at zero is zero.
Gradients backward(const Topology& topology, const TransferProfile& profile,
                   const RealWeights& weights, std::span<const double> input,
                   std::span<const double> target);
Gradients backward_batch(const Topology& topology, const TransferProfile& profile,
                         const RealWeights& weights, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets);

/// Weight matrices with negative entries scaled by the source neuron's negative
/// gain; the matrix the summing node actually sees.
RealWeights signed_gain_weights(const TransferProfile& profile, const RealWeights& weights);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(const Eigen::Ref<const Eigen::VectorXd>& values);

}  // namespace hetnet::net
