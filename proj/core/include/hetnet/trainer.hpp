// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "hetnet/datasets.hpp"
#include "hetnet/netcore.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/topology.hpp"
#include "hetnet/weight_code.hpp"

namespace hetnet::train {

enum class InitScheme {
  kGlorotUniform,  // +-sqrt(6 / (fan_in + fan_out)) per layer
  kUniform,        // +-init_range everywhere
};

std::string to_string(InitScheme scheme);
InitScheme parse_init_scheme(const std::string& text);

struct Hyperparams {
  double learning_rate = 0.0065;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t epochs = 50;
  std::size_t batch_size = 200;
  double l1_negative = 1e-6;
  std::uint64_t seed = 1;
  bool quantize = true;
  InitScheme init = InitScheme::kGlorotUniform;
  /// Only used by InitScheme::kUniform.
  double init_range = 0.25;
  /// Value of the correct class in the one-hot MSE target.
  double target = 1.0;
  /// Redraw the incoming weights of units that are silent on the whole
  /// training set, at initialization and after any epoch in which some output
  /// unit never fired.
  bool redraw_dead = true;
  /// Independent initializations trained; the one with the lowest final
  /// training loss is kept. Restart r > 0 uses derive_seed(seed, r).
  std::size_t restarts = 1;

  /// Throws ParameterError when a value is out of range.
  void validate() const;

  static Hyperparams mnist();
  static Hyperparams iris();
};

/// Nearest level of {-7..7}/7, ties away from zero. Values outside [-1, 1]
/// are clamped with a warning.
net::WeightCode quantize(double shadow);
net::WeightMatrix quantize(const net::RealWeights& shadow);

struct TrainState {
  net::RealWeights shadow;
  net::RealWeights first_moment;
  net::RealWeights second_moment;
  std::size_t step = 0;
  net::TransferProfile profile;
  Engine rng;
};

/// Shadow weights drawn per hp.init, zero moments.
TrainState init_state(const net::Topology& topology, const net::TransferProfile& profile,
                      const Hyperparams& hp);

/// Redraws, layer by layer, the incoming row of every unit whose output is zero
/// for all columns of `inputs` under the quantized forward weights, up to
/// `max_attempts` times per unit, and clears the ADAM moments of redrawn rows.
/// Returns the number of units still silent.
std::size_t redraw_dead_units(TrainState& state, const net::Topology& topology,
                              const Eigen::MatrixXd& inputs, const Hyperparams& hp,
                              std::size_t max_attempts = 100);

/// Bias-corrected ADAM update of the shadow weights followed by clipping to
/// [-1, 1]. Throws TrainingError (carrying `batch`) on a non-finite gradient.
void adam_step(TrainState& state, const net::RealWeights& gradients, const Hyperparams& hp,
               std::size_t batch = 0);

/// Adds the L1 subgradient l1_negative * sign(w) for every negative shadow weight.
void regularize(net::RealWeights& gradients, const net::RealWeights& shadow, double l1_negative);

/// Weights the forward pass uses: decode(quantize(shadow))/7, or the shadow
/// weights themselves when quantization is off.
net::RealWeights forward_weights(const net::RealWeights& shadow, bool quantize);

struct EpochMetrics {
  std::size_t epoch = 0;
  double train_loss = 0.0;
  double train_accuracy = 0.0;
  double test_accuracy = -1.0;  // negative when no test set was given
};

struct TrainedModel {
  net::Topology topology;
  net::WeightMatrix codes;
  net::RealWeights shadow;
  std::string profile_hash;
  std::string device_hash;
  Hyperparams hyperparams;
  std::vector<EpochMetrics> log;
};

/// One-hot targets (rows = classes) for `labels`.
Eigen::MatrixXd one_hot(const std::vector<int>& labels, std::size_t first, std::size_t count,
                        int num_classes);

/// Fraction of samples whose output argmax equals the label.
double accuracy(const net::Topology& topology, const net::TransferProfile& profile,
                const net::RealWeights& weights, const data::Dataset& dataset);

/// MSE of the network on `dataset` against one-hot targets of height `target`.
double dataset_loss(const net::Topology& topology, const net::TransferProfile& profile,
                    const net::RealWeights& weights, const data::Dataset& dataset, double target);

/// Mismatch-aware training through `profile`: shuffled mini-batches, MSE
/// loss, straight-through 3-bit quantization and L1 on negative weights.
TrainedModel train(const net::Topology& topology, const net::TransferProfile& profile,
                   const data::Dataset& train_set, const data::Dataset* test_set,
                   const Hyperparams& hp);

}  // namespace hetnet::train
