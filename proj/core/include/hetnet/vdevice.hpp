// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "hetnet/netcore.hpp"
#include "hetnet/topology.hpp"
#include "hetnet/weight_code.hpp"

namespace hetnet::device {

/// How the threshold-voltage standard deviation scales with geometry.
enum class SigmaRule {
  kAspectRatio,  // A_VT / sqrt(W/L)
  kPelgrom,      // A_VT / sqrt(W*L)
};

std::string to_string(SigmaRule rule);
SigmaRule parse_sigma_rule(const std::string& text);

struct MismatchParams {
  double avt_mv_um = 3.3;
  double n_slope = 1.5;
  double ut_mv = 25.85;  // 300 K
  SigmaRule sigma_rule = SigmaRule::kAspectRatio;

  double n_ut_mv() const noexcept { return n_slope * ut_mv; }
  /// Throws ParameterError on negative A_VT or non-positive n / U_T.
  void validate() const;
};

struct TransistorGeometry {
  std::string name;
  double w_um = 0.0;
  double l_um = 0.0;

  double aspect_ratio() const noexcept { return w_um / l_um; }
  double area() const noexcept { return w_um * l_um; }
};

/// Soma transistors M0-M4, then synapse transistors M10-M20.
std::vector<TransistorGeometry> default_geometry();

/// Looks up a transistor by name; throws ParameterError if absent.
const TransistorGeometry& find_transistor(const std::vector<TransistorGeometry>& geometry,
                                          const std::string& name);

/// Threshold-shift standard deviation in mV.
double threshold_sigma_mv(const MismatchParams& params, const TransistorGeometry& transistor);

/// Subthreshold mirror gain exp((dvt_in - dvt_out) / (n U_T)).
double mirror_gain(double dvt_in_mv, double dvt_out_mv, double n_ut_mv);

/// Threshold shifts (mV) of the five soma transistors M0..M4 of one neuron.
using SomaShifts = std::array<double, 5>;

struct DeviceOptions {
  double synapse_cap_ff = 11.0;
  double i_floor_na = 0.1;
  double vdd_v = 1.8;
  /// Draw threshold shifts for the synapse mirror transistors as well.
  bool synapse_jitter = false;
};

/// A simulated fabricated network: geometry, mismatch model and the per-transistor
/// threshold shifts drawn for one seed.
class VirtualDevice {
 public:
  static VirtualDevice fabricate(const net::Topology& topology, std::uint64_t seed,
                                 const MismatchParams& params = {},
                                 std::vector<TransistorGeometry> geometry = default_geometry(),
                                 const DeviceOptions& options = {});

  const net::Topology& topology() const noexcept { return topology_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const MismatchParams& params() const noexcept { return params_; }
  const std::vector<TransistorGeometry>& geometry() const noexcept { return geometry_; }
  const DeviceOptions& options() const noexcept { return options_; }

  const SomaShifts& soma_shifts(std::size_t layer, std::size_t neuron) const {
    return soma_.at(layer).at(neuron);
  }
  /// Overrides the shifts of one neuron, e.g. to inject a known defect.
  void set_soma_shifts(std::size_t layer, std::size_t neuron, const SomaShifts& shifts);
  const std::vector<std::vector<SomaShifts>>& all_soma_shifts() const noexcept { return soma_; }

  /// Ground-truth raw (unnormalized) slopes and negative-branch gains.
  net::TransferProfile effective_profile() const;

  /// Real weight each programmed synapse realizes: decode/7 unless synapse
  /// jitter is enabled.
  net::RealWeights synapse_weights(const net::WeightMatrix& codes) const;

  /// Steady-state currents (nA) for a programmed code matrix.
  net::Activations dc_response(const net::WeightMatrix& codes,
                               std::span<const double> input_na) const;

  /// Supply current (nA) drawn when every neuron carries `outputs` and the
  /// input sources deliver `input_na`.
  double supply_current_na(const net::RealWeights& weights, std::span<const Eigen::VectorXd> outputs,
                           std::span<const double> input_na) const;

  /// Lumped node capacitance (fF) of every neuron: per-synapse capacitance times fan-out.
  std::vector<Eigen::VectorXd> node_capacitance_ff() const;

 private:
  VirtualDevice() = default;
  void draw_synapse_shifts();

  net::Topology topology_;
  std::uint64_t seed_ = 0;
  MismatchParams params_;
  std::vector<TransistorGeometry> geometry_;
  DeviceOptions options_;
  std::vector<std::vector<SomaShifts>> soma_;
  // Per layer pair, per (post, pre) synapse: shifts of M13-M15 then M10-M12.
  std::vector<std::vector<std::array<double, 6>>> synapse_;

  friend VirtualDevice restore_device(const net::Topology&, std::uint64_t, const MismatchParams&,
                                      std::vector<TransistorGeometry>, const DeviceOptions&,
                                      const std::vector<std::vector<SomaShifts>>&);
};

/// Restores a device from stored fields (device files). `soma` may be empty, in
/// which case shifts are regenerated from the seed.
VirtualDevice restore_device(const net::Topology& topology, std::uint64_t seed,
                             const MismatchParams& params,
                             std::vector<TransistorGeometry> geometry, const DeviceOptions& options,
                             const std::vector<std::vector<SomaShifts>>& soma);

// ---------------------------------------------------------------------------
// Transient dynamics
// ---------------------------------------------------------------------------

/// Input vector applied from `time_us` until the next event.
struct InputEvent {
  double time_us = 0.0;
  std::vector<double> input_na;
};

struct TransientOptions {
  double dt_us = 0.02;
  double t_end_us = 15.0;
  /// State starts at the steady state of this input; zero state when absent.
  std::optional<std::vector<double>> initial_input_na;
};

struct TransientTrace {
  std::vector<double> time_us;
  /// Per layer, a (neurons x samples) matrix of output currents in nA.
  std::vector<Eigen::MatrixXd> currents_na;
  std::vector<double> supply_ua;
  std::vector<double> switch_times_us;

  std::size_t samples() const noexcept { return time_us.size(); }
  /// Index of the most active output unit at sample `t`.
  std::size_t output_argmax(std::size_t t) const;
};

/// Relaxation time constant (us) n U_T C / max(I, I_floor).
double relaxation_time_us(double n_ut_mv, double cap_ff, double current_na, double floor_na);

/// Simulates per-neuron first-order relaxation toward the instantaneous DC
/// target. Throws ParameterError for dt <= 0 or non-increasing event times.
TransientTrace transient(const VirtualDevice& device, const net::WeightMatrix& codes,
                         std::span<const InputEvent> schedule, const TransientOptions& options);

struct TimeToOutput {
  bool converged = false;
  double time_us = 0.0;  // relative to the last input switch
};

/// Earliest time after the last switch from which the output argmax equals
/// `asymptotic_argmax` for the rest of the trace.
TimeToOutput time_to_output(const TransientTrace& trace, std::size_t asymptotic_argmax);

struct Energy {
  double joules = 0.0;
  double joules_per_op = 0.0;
};

/// V_dd times the supply current integrated over [t0, t1] (trapezoidal rule),
/// and that energy divided by the synapse count.
Energy energy(const VirtualDevice& device, const TransientTrace& trace, double t0_us,
              double t1_us);

}  // namespace hetnet::device
