// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/error.hpp"
#include "hetnet/netcore.hpp"
#include "hetnet/rng.hpp"
#include "hetnet/topology.hpp"
#include "hetnet/vdevice.hpp"
#include "hetnet/weight_code.hpp"

namespace hetnet::charlab {

/// Currents observable on a device for one applied input.
struct Readings {
  /// Per layer, the rectified summed input current of every soma (nA). Layer 0
  /// holds the applied input currents.
  std::vector<Eigen::VectorXd> input_currents;
  /// Output currents of the readout synapses (nA).
  Eigen::VectorXd output_currents;
};

/// Anything that can be programmed and probed: a simulated device or an
/// adapter to real hardware.
class DeviceUnderTest {
 public:
  virtual ~DeviceUnderTest() = default;
  virtual const net::Topology& topology() const = 0;
  virtual void program(const net::WeightMatrix& codes) = 0;
  virtual Readings apply_input(std::span<const double> input_na) = 0;
};

/// DeviceUnderTest backed by a VirtualDevice's DC response, optionally with
/// multiplicative Gaussian read noise.
class VirtualDut final : public DeviceUnderTest {
 public:
  explicit VirtualDut(const device::VirtualDevice& device, double read_noise = 0.0,
                      std::uint64_t noise_seed = 0);

  const net::Topology& topology() const override { return device_->topology(); }
  void program(const net::WeightMatrix& codes) override;
  Readings apply_input(std::span<const double> input_na) override;

  const device::VirtualDevice& device() const noexcept { return *device_; }

 private:
  const device::VirtualDevice* device_;
  net::TransferProfile profile_;
  net::RealWeights weights_;
  double read_noise_;
  Engine noise_;
};

/// One wiring of the network: every neuron of layer k+1 listens to exactly one
/// neuron of layer k through a maximum positive weight.
struct Configuration {
  /// sources[k][i] = index in layer k feeding neuron i of layer k+1.
  std::vector<std::vector<std::size_t>> sources;
  double input_na = 0.0;
};

struct MeasurementPlan {
  net::Topology topology;
  std::uint64_t seed = 0;
  std::vector<Configuration> configs;

  /// Code matrix realizing configuration `c`.
  net::WeightMatrix codes(std::size_t c) const;
  /// Data points each neuron receives over the whole plan, per layer.
  std::vector<std::vector<std::size_t>> probe_counts() const;
};

/// Builds `n_configs` one-to-one configurations. Sources are taken round-robin
/// through a seeded permutation of each layer so coverage is balanced; input
/// levels cycle through `levels_na`. Throws PlanError if any neuron would be
/// probed fewer than `min_points` times.
MeasurementPlan plan_measurements(const net::Topology& topology, std::size_t n_configs,
                                  const std::vector<double>& levels_na, std::uint64_t seed,
                                  std::size_t min_points = 1);

/// (input, output) current pair of one neuron in one configuration.
struct ProbePoint {
  NeuronId neuron;
  double in_na = 0.0;
  double out_na = 0.0;
};

struct MeasurementRecord {
  std::size_t config_id = 0;
  double input_na = 0.0;
  /// False when the configuration carried no signal (zero input level).
  bool usable = true;
  std::vector<std::vector<std::size_t>> sources;
  std::vector<ProbePoint> points;
};

/// Programs every configuration of `plan` and records, for each neuron, its
/// own input current and the input current of the neuron it drives (or its
/// readout current in the output layer). Throws MeasurementError on
/// non-finite or negative readings.
std::vector<MeasurementRecord> run_protocol(DeviceUnderTest& dut, const MeasurementPlan& plan);

struct FitResult {
  /// Layer-normalized slopes; negative gains set to one.
  net::TransferProfile profile;
  std::vector<Eigen::VectorXd> raw_slopes;
  std::vector<Eigen::VectorXd> residual_rms;
  std::vector<std::vector<std::size_t>> points;
  std::vector<std::string> warnings;
};

inline constexpr double kDeadSlopeFloor = 1e-3;

/// Least-squares line through the origin per neuron, a = sum(in*out)/sum(in^2),
/// then layer-wise normalization to mean 1. Dead neurons get kDeadSlopeFloor.
/// Throws FitError for a neuron with fewer than two usable points.
FitResult fit_slopes(const net::Topology& topology, std::span<const MeasurementRecord> records);

struct NegGainOptions {
  double input_na = 20.0;
  std::size_t monitors = 3;
  /// Minimum fraction of the positive-only response that must survive the
  /// negative input for a reading to count as unsaturated.
  double min_residual = 0.1;
};

struct NegGainResult {
  /// Per layer; the output layer has no programmable outgoing synapses and keeps 1.
  std::vector<Eigen::VectorXd> gains;
  std::vector<NeuronId> dead;
  std::vector<std::string> warnings;
};

/// Infers the strength of each neuron's unit negative weight by driving a
/// monitor neuron through a positive reference synapse with and without an
/// opposing negative synapse from the neuron under test. Monitor and reference
/// choices rotate with `seed`.
NegGainResult estimate_negative_gains(DeviceUnderTest& dut, std::uint64_t seed,
                                      const NegGainOptions& options = {});

/// Full characterization: plan, protocol, slope fit and negative gains.
struct Characterization {
  MeasurementPlan plan;
  std::vector<MeasurementRecord> records;
  FitResult fit;
  NegGainResult neg;
  net::TransferProfile profile;
};

Characterization characterize(DeviceUnderTest& dut, std::size_t n_configs,
                              const std::vector<double>& levels_na, std::uint64_t seed,
                              const NegGainOptions& neg_options = {});

}  // namespace hetnet::charlab
