// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/vdevice.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet::device {

std::string to_string(SigmaRule rule) {
  return rule == SigmaRule::kPelgrom ? "pelgrom" : "aspect-ratio";
}

SigmaRule parse_sigma_rule(const std::string& text) {
  if (text == "aspect-ratio") return SigmaRule::kAspectRatio;
  if (text == "pelgrom") return SigmaRule::kPelgrom;
  throw ParameterError("unknown sigma rule '" + text + "' (expected aspect-ratio or pelgrom)");
}

void MismatchParams::validate() const {
  if (!(avt_mv_um >= 0.0) || !(n_slope > 0.0) || !(ut_mv > 0.0)) {
    throw ParameterError("mismatch parameters must be positive (A_VT may be zero)");
  }
}

std::vector<TransistorGeometry> default_geometry() {
  std::vector<TransistorGeometry> g;
  for (int i = 0; i <= 4; ++i) g.push_back({"M" + std::to_string(i), 2.7, 0.45});
  // Magnitude-bit mirrors, negative branch M10-M12 and positive branch M13-M15.
  const double widths[3] = {0.27, 0.54, 1.08};
  for (int b = 0; b < 3; ++b) g.push_back({"M" + std::to_string(10 + b), widths[b], 0.54});
  for (int b = 0; b < 3; ++b) g.push_back({"M" + std::to_string(13 + b), widths[b], 0.54});
  for (int i = 16; i <= 20; ++i) g.push_back({"M" + std::to_string(i), 0.54, 0.54});
  return g;
}

const TransistorGeometry& find_transistor(const std::vector<TransistorGeometry>& geometry,
                                          const std::string& name) {
  const auto it = std::find_if(geometry.begin(), geometry.end(),
                               [&](const TransistorGeometry& t) { return t.name == name; });
  if (it == geometry.end()) throw ParameterError("geometry has no transistor " + name);
  return *it;
}

double threshold_sigma_mv(const MismatchParams& params, const TransistorGeometry& transistor) {
  if (!(transistor.w_um > 0.0) || !(transistor.l_um > 0.0)) {
    throw ParameterError("transistor " + transistor.name + " needs W > 0 and L > 0");
  }
  const double scale = params.sigma_rule == SigmaRule::kPelgrom ? transistor.area()
                                                                 : transistor.aspect_ratio();
  return params.avt_mv_um / std::sqrt(scale);
}

double mirror_gain(double dvt_in_mv, double dvt_out_mv, double n_ut_mv) {
  return std::exp((dvt_in_mv - dvt_out_mv) / n_ut_mv);
}

namespace {

void validate_geometry(const std::vector<TransistorGeometry>& geometry) {
  for (const auto& t : geometry) {
    if (!(t.w_um > 0.0) || !(t.l_um > 0.0)) {
      throw ParameterError("transistor " + t.name + " needs W > 0 and L > 0");
    }
  }
}

void validate_options(const DeviceOptions& options) {
  if (!(options.synapse_cap_ff > 0.0) || !(options.i_floor_na > 0.0) || !(options.vdd_v > 0.0)) {
    throw ParameterError("capacitance, current floor and V_dd must be positive");
  }
}

}  // namespace

VirtualDevice VirtualDevice::fabricate(const net::Topology& topology, std::uint64_t seed,
                                       const MismatchParams& params,
                                       std::vector<TransistorGeometry> geometry,
                                       const DeviceOptions& options) {
  return restore_device(topology, seed, params, std::move(geometry), options, {});
}

VirtualDevice restore_device(const net::Topology& topology, std::uint64_t seed,
                             const MismatchParams& params,
                             std::vector<TransistorGeometry> geometry, const DeviceOptions& options,
                             const std::vector<std::vector<SomaShifts>>& soma) {
  params.validate();
  validate_geometry(geometry);
  validate_options(options);

  VirtualDevice device;
  device.topology_ = topology;
  device.seed_ = seed;
  device.params_ = params;
  device.geometry_ = std::move(geometry);
  device.options_ = options;

  if (soma.empty()) {
    std::array<double, 5> sigma{};
    for (int t = 0; t < 5; ++t) {
      sigma[t] = threshold_sigma_mv(params, find_transistor(device.geometry_, "M" + std::to_string(t)));
    }
    Engine engine(seed);
    for (std::size_t n : topology.layer_sizes()) {
      std::vector<SomaShifts> layer(n);
      for (SomaShifts& shifts : layer) {
        for (int t = 0; t < 5; ++t) shifts[t] = sigma[t] * standard_normal(engine);
      }
      device.soma_.push_back(std::move(layer));
    }
  } else {
    if (soma.size() != topology.num_layers()) {
      throw ShapeError("threshold-shift table does not match topology");
    }
    for (std::size_t k = 0; k < soma.size(); ++k) {
      if (soma[k].size() != topology.size(k)) {
        throw ShapeError("threshold-shift table layer " + std::to_string(k) + " has wrong size");
      }
      for (const SomaShifts& s : soma[k]) {
        if (!std::all_of(s.begin(), s.end(), [](double v) { return std::isfinite(v); })) {
          throw DomainError("threshold shifts must be finite");
        }
      }
    }
    device.soma_ = soma;
  }
  if (options.synapse_jitter) device.draw_synapse_shifts();
  return device;
}

void VirtualDevice::draw_synapse_shifts() {
  std::array<double, 6> sigma{};
  for (int b = 0; b < 3; ++b) {
    sigma[b] = threshold_sigma_mv(params_, find_transistor(geometry_, "M" + std::to_string(13 + b)));
    sigma[3 + b] =
        threshold_sigma_mv(params_, find_transistor(geometry_, "M" + std::to_string(10 + b)));
  }
  Engine engine(derive_seed(seed_, 1));
  synapse_.clear();
  for (std::size_t k = 0; k + 1 < topology_.num_layers(); ++k) {
    std::vector<std::array<double, 6>> pair(topology_.size(k) * topology_.size(k + 1));
    for (auto& shifts : pair) {
      for (int t = 0; t < 6; ++t) shifts[t] = sigma[t] * standard_normal(engine);
    }
    synapse_.push_back(std::move(pair));
  }
}

void VirtualDevice::set_soma_shifts(std::size_t layer, std::size_t neuron,
                                    const SomaShifts& shifts) {
  soma_.at(layer).at(neuron) = shifts;
}

net::TransferProfile VirtualDevice::effective_profile() const {
  const double n_ut = params_.n_ut_mv();
  net::TransferProfile profile;
  for (const auto& layer : soma_) {
    Eigen::VectorXd slopes(static_cast<Eigen::Index>(layer.size()));
    Eigen::VectorXd gains(static_cast<Eigen::Index>(layer.size()));
    for (std::size_t i = 0; i < layer.size(); ++i) {
      const SomaShifts& d = layer[i];
      // M0 -> M1 mirror, then M2 driving the positive synapse pFETs.
      slopes[static_cast<Eigen::Index>(i)] = mirror_gain(d[0], d[1], n_ut) * mirror_gain(d[2], 0.0, n_ut);
      // The negative branch replaces M2 -> synapse by M2 -> M3 and M4 -> synapse.
      gains[static_cast<Eigen::Index>(i)] = mirror_gain(d[4], d[3], n_ut);
    }
    profile.slopes.push_back(std::move(slopes));
    profile.neg_gains.push_back(std::move(gains));
  }
  return profile;
}

net::RealWeights VirtualDevice::synapse_weights(const net::WeightMatrix& codes) const {
  net::check_shape(topology_, codes);
  net::RealWeights real = net::to_real(codes);
  if (!options_.synapse_jitter) return real;

  const double n_ut = params_.n_ut_mv();
  for (std::size_t k = 0; k < codes.size(); ++k) {
    const net::CodeMatrix& m = codes[k];
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        const net::WeightCode code = m(i, j);
        const auto& shifts = synapse_[k][i * m.cols() + j];
        const int branch = code.negative ? 3 : 0;
        double magnitude = 0.0;
        for (int b = 0; b < 3; ++b) {
          if (code.bit(b)) magnitude += (1 << b) * mirror_gain(0.0, shifts[branch + b], n_ut);
        }
        real[k](static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
            (code.negative ? -magnitude : magnitude) / net::kMaxWeightLevel;
      }
    }
  }
  return real;
}

net::Activations VirtualDevice::dc_response(const net::WeightMatrix& codes,
                                            std::span<const double> input_na) const {
  return net::forward(topology_, effective_profile(), synapse_weights(codes), input_na);
}

double VirtualDevice::supply_current_na(const net::RealWeights& weights,
                                        std::span<const Eigen::VectorXd> outputs,
                                        std::span<const double> input_na) const {
  const double n_ut = params_.n_ut_mv();
  double total = 0.0;
  for (double v : input_na) total += v;
  for (std::size_t k = 0; k < outputs.size(); ++k) {
    const Eigen::VectorXd& y = outputs[k];
    for (Eigen::Index i = 0; i < y.size(); ++i) {
      const SomaShifts& d = soma_[k][static_cast<std::size_t>(i)];
      // M1/M2 leg and the M3/M4 leg feeding the negative branch.
      const double leg = y[i] * mirror_gain(0.0, d[2], n_ut);
      total += leg + leg * mirror_gain(d[2], d[3], n_ut);
    }
    if (k < weights.size()) {
      // Positive synapses source current from the supply; negative synapses
      // only sink part of it.
      total += weights[k].cwiseMax(0.0).colwise().sum().dot(y);
    } else {
      total += y.sum();  // unit readout synapse per output neuron
    }
  }
  return total;
}

std::vector<Eigen::VectorXd> VirtualDevice::node_capacitance_ff() const {
  std::vector<Eigen::VectorXd> caps;
  for (std::size_t k = 0; k < topology_.num_layers(); ++k) {
    const std::size_t fan_out = k + 1 < topology_.num_layers() ? topology_.size(k + 1) : 1;
    caps.push_back(Eigen::VectorXd::Constant(static_cast<Eigen::Index>(topology_.size(k)),
                                             options_.synapse_cap_ff * static_cast<double>(fan_out)));
  }
  return caps;
}

}  // namespace hetnet::device
