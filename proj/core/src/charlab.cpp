// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/charlab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

namespace hetnet::charlab {

namespace {

std::string neuron_name(NeuronId id) {
  return "L" + std::to_string(id.layer) + "[" + std::to_string(id.index) + "]";
}

constexpr net::WeightCode kMaxPositive{false, 7};

}  // namespace

// ---------------------------------------------------------------------------
// VirtualDut

VirtualDut::VirtualDut(const device::VirtualDevice& device, double read_noise,
                       std::uint64_t noise_seed)
    : device_(&device),
      profile_(device.effective_profile()),
      weights_(device.synapse_weights(net::zero_weights(device.topology()))),
      read_noise_(read_noise),
      noise_(derive_seed(noise_seed, 7)) {
  if (read_noise < 0.0) throw ParameterError("read noise must be non-negative");
}

void VirtualDut::program(const net::WeightMatrix& codes) {
  weights_ = device_->synapse_weights(codes);
}

Readings VirtualDut::apply_input(std::span<const double> input_na) {
  net::Activations act = net::forward(device_->topology(), profile_, weights_, input_na);
  Readings r;
  r.input_currents.reserve(act.inputs.size());
  for (Eigen::VectorXd& v : act.inputs) r.input_currents.push_back(v.cwiseMax(0.0));
  r.output_currents = act.outputs.back();
  if (read_noise_ > 0.0) {
    auto perturb = [&](Eigen::VectorXd& v) {
      for (Eigen::Index i = 0; i < v.size(); ++i) {
        v[i] = std::max(0.0, v[i] * (1.0 + read_noise_ * standard_normal(noise_)));
      }
    };
    for (std::size_t k = 1; k < r.input_currents.size(); ++k) perturb(r.input_currents[k]);
    perturb(r.output_currents);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Planning

net::WeightMatrix MeasurementPlan::codes(std::size_t c) const {
  net::WeightMatrix w = net::zero_weights(topology);
  const Configuration& config = configs.at(c);
  for (std::size_t k = 0; k < config.sources.size(); ++k) {
    for (std::size_t i = 0; i < config.sources[k].size(); ++i) {
      w[k](i, config.sources[k][i]) = kMaxPositive;
    }
  }
  return w;
}

std::vector<std::vector<std::size_t>> MeasurementPlan::probe_counts() const {
  std::vector<std::vector<std::size_t>> counts;
  for (std::size_t n : topology.layer_sizes()) counts.emplace_back(n, 0);
  for (const Configuration& config : configs) {
    for (std::size_t k = 0; k < config.sources.size(); ++k) {
      for (std::size_t src : config.sources[k]) ++counts[k][src];
    }
    // Output neurons are read through their readout synapse every time.
    for (auto& c : counts.back()) ++c;
  }
  return counts;
}

MeasurementPlan plan_measurements(const net::Topology& topology, std::size_t n_configs,
                                  const std::vector<double>& levels_na, std::uint64_t seed,
                                  std::size_t min_points) {
  if (n_configs == 0) throw ParameterError("measurement plan needs at least one configuration");
  if (levels_na.empty()) throw ParameterError("measurement plan needs at least one input level");
  for (double level : levels_na) {
    if (!(level >= 0.0) || !std::isfinite(level)) {
      throw ParameterError("input levels must be finite and non-negative");
    }
  }

  MeasurementPlan plan;
  plan.topology = topology;
  plan.seed = seed;
  Engine engine(seed);

  // One fixed random order per source layer; configuration c takes the next
  // n_post entries of it cyclically, so every source is used floor or ceil of
  // c * n_post / n_pre times.
  std::vector<std::vector<std::size_t>> order;
  for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
    std::vector<std::size_t> perm(topology.size(k));
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    shuffle(std::span(perm), engine);
    order.push_back(std::move(perm));
  }

  for (std::size_t c = 0; c < n_configs; ++c) {
    Configuration config;
    config.input_na = levels_na[c % levels_na.size()];
    for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
      const std::size_t n_pre = topology.size(k);
      const std::size_t n_post = topology.size(k + 1);
      std::vector<std::size_t> sources(n_post);
      for (std::size_t i = 0; i < n_post; ++i) sources[i] = order[k][(c * n_post + i) % n_pre];
      // Vary which monitor sees which source.
      shuffle(std::span(sources), engine);
      config.sources.push_back(std::move(sources));
    }
    plan.configs.push_back(std::move(config));
  }

  std::vector<NeuronId> unprobed;
  const auto counts = plan.probe_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    for (std::size_t i = 0; i < counts[k].size(); ++i) {
      if (counts[k][i] < min_points) unprobed.push_back({k, i});
    }
  }
  if (!unprobed.empty()) {
    std::string list;
    for (std::size_t u = 0; u < unprobed.size() && u < 8; ++u) {
      list += (u ? ", " : "") + neuron_name(unprobed[u]);
    }
    if (unprobed.size() > 8) list += ", ...";
    throw PlanError(std::to_string(unprobed.size()) + " neuron(s) probed fewer than " +
                        std::to_string(min_points) + " times with " + std::to_string(n_configs) +
                        " configurations: " + list,
                    std::move(unprobed));
  }
  return plan;
}

// ---------------------------------------------------------------------------
// Protocol

std::vector<MeasurementRecord> run_protocol(DeviceUnderTest& dut, const MeasurementPlan& plan) {
  if (!(dut.topology() == plan.topology)) {
    throw ShapeError("device topology " + dut.topology().to_string() +
                     " does not match plan topology " + plan.topology.to_string());
  }
  const std::size_t layers = plan.topology.num_layers();
  std::vector<MeasurementRecord> records;
  records.reserve(plan.configs.size());

  for (std::size_t c = 0; c < plan.configs.size(); ++c) {
    const Configuration& config = plan.configs[c];
    dut.program(plan.codes(c));
    const std::vector<double> input(plan.topology.input_size(), config.input_na);
    Readings r;
    try {
      r = dut.apply_input(input);
    } catch (const Error& e) {
      throw MeasurementError(std::string("device fault: ") + e.what(), c);
    }
    const auto valid = [](const Eigen::VectorXd& v) {
      return v.allFinite() && (v.array() >= 0.0).all();
    };
    if (r.input_currents.size() != layers || !valid(r.output_currents) ||
        !std::all_of(r.input_currents.begin(), r.input_currents.end(), valid)) {
      throw MeasurementError("non-finite or negative reading", c);
    }

    MeasurementRecord rec;
    rec.config_id = c;
    rec.input_na = config.input_na;
    rec.usable = config.input_na > 0.0;
    rec.sources = config.sources;
    for (std::size_t k = 0; k + 1 < layers; ++k) {
      for (std::size_t i = 0; i < config.sources[k].size(); ++i) {
        const std::size_t src = config.sources[k][i];
        rec.points.push_back({{k, src},
                              r.input_currents[k][static_cast<Eigen::Index>(src)],
                              r.input_currents[k + 1][static_cast<Eigen::Index>(i)]});
      }
    }
    for (std::size_t i = 0; i < plan.topology.output_size(); ++i) {
      const auto idx = static_cast<Eigen::Index>(i);
      rec.points.push_back({{layers - 1, i}, r.input_currents[layers - 1][idx], r.output_currents[idx]});
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// ---------------------------------------------------------------------------
// Fitting

FitResult fit_slopes(const net::Topology& topology, std::span<const MeasurementRecord> records) {
  const std::size_t layers = topology.num_layers();
  std::vector<Eigen::VectorXd> sxy, sxx, syy;
  std::vector<std::vector<std::size_t>> points;
  for (std::size_t n : topology.layer_sizes()) {
    const auto size = static_cast<Eigen::Index>(n);
    sxy.push_back(Eigen::VectorXd::Zero(size));
    sxx.push_back(Eigen::VectorXd::Zero(size));
    syy.push_back(Eigen::VectorXd::Zero(size));
    points.emplace_back(n, 0);
  }
  for (const MeasurementRecord& rec : records) {
    if (!rec.usable) continue;
    for (const ProbePoint& p : rec.points) {
      if (p.neuron.layer >= layers || p.neuron.index >= topology.size(p.neuron.layer)) {
        throw ShapeError("measurement refers to " + neuron_name(p.neuron) +
                         " outside topology " + topology.to_string());
      }
      if (!(p.in_na > 0.0)) continue;
      const auto i = static_cast<Eigen::Index>(p.neuron.index);
      sxy[p.neuron.layer][i] += p.in_na * p.out_na;
      sxx[p.neuron.layer][i] += p.in_na * p.in_na;
      syy[p.neuron.layer][i] += p.out_na * p.out_na;
      ++points[p.neuron.layer][p.neuron.index];
    }
  }

  FitResult fit;
  fit.profile = net::TransferProfile::ideal(topology);
  fit.points = points;
  for (std::size_t k = 0; k < layers; ++k) {
    const auto n = static_cast<Eigen::Index>(topology.size(k));
    Eigen::VectorXd raw(n), resid(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const NeuronId id{k, static_cast<std::size_t>(i)};
      const std::size_t count = points[k][id.index];
      if (count < 2) {
        throw FitError(neuron_name(id) + " has " + std::to_string(count) +
                           " usable measurement(s); at least 2 are required",
                       id);
      }
      const double a = sxy[k][i] / sxx[k][i];
      raw[i] = a;
      // sum (out - a in)^2 = syy - 2 a sxy + a^2 sxx
      const double sse = std::max(0.0, syy[k][i] - a * sxy[k][i]);
      resid[i] = std::sqrt(sse / static_cast<double>(count));
    }
    Eigen::VectorXd normalized = raw;
    const double mean = raw.mean();
    if (mean > 0.0) normalized /= mean;
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!(normalized[i] >= kDeadSlopeFloor)) {
        const NeuronId id{k, static_cast<std::size_t>(i)};
        fit.warnings.push_back(neuron_name(id) + " shows no response; slope floored at 1e-3");
        spdlog::warn("{}", fit.warnings.back());
        normalized[i] = kDeadSlopeFloor;
      }
    }
    fit.profile.slopes[k] = std::move(normalized);
    fit.raw_slopes.push_back(std::move(raw));
    fit.residual_rms.push_back(std::move(resid));
  }
  return fit;
}

// ---------------------------------------------------------------------------
// Negative-branch gains

namespace {

// Baseline wiring that routes a signal to every neuron: neuron i of layer k+1
// listens to neuron i mod n_k.
net::WeightMatrix drive_all(const net::Topology& topology) {
  net::WeightMatrix w = net::zero_weights(topology);
  for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
    for (std::size_t i = 0; i < topology.size(k + 1); ++i) w[k](i, i % topology.size(k)) = kMaxPositive;
  }
  return w;
}

}  // namespace

NegGainResult estimate_negative_gains(DeviceUnderTest& dut, std::uint64_t seed,
                                      const NegGainOptions& options) {
  if (!(options.input_na > 0.0)) throw ParameterError("negative-gain probe level must be positive");
  if (options.monitors == 0) throw ParameterError("at least one monitor is required");

  const net::Topology& topo = dut.topology();
  const std::size_t layers = topo.num_layers();
  const std::vector<double> input(topo.input_size(), options.input_na);
  const net::WeightMatrix base = drive_all(topo);
  Engine engine(seed);

  NegGainResult result;
  for (std::size_t n : topo.layer_sizes()) {
    result.gains.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
  }

  std::size_t probe_id = 0;
  for (std::size_t k = 0; k + 1 < layers; ++k) {
    const std::size_t n_src = topo.size(k);
    const std::size_t n_mon = topo.size(k + 1);
    const std::size_t offset = uniform_index(engine, n_src * n_mon);

    // Monitor reading with only the listed (source, code) synapses into `monitor`.
    auto monitor_reading = [&](std::size_t monitor,
                               std::initializer_list<std::pair<std::size_t, net::WeightCode>> syn) {
      net::WeightMatrix w = base;
      w[k] = net::CodeMatrix(n_mon, n_src);
      for (const auto& [src, code] : syn) w[k](monitor, src) = code;
      dut.program(w);
      const Readings r = dut.apply_input(input);
      const double v = r.input_currents.at(k + 1)[static_cast<Eigen::Index>(monitor)];
      if (!std::isfinite(v) || v < 0.0) {
        throw MeasurementError("non-finite or negative monitor reading", probe_id);
      }
      ++probe_id;
      return v;
    };

    for (std::size_t j = 0; j < n_src; ++j) {
      const NeuronId id{k, j};
      if (n_src < 2) {
        result.warnings.push_back(neuron_name(id) + " has no reference neuron; gain left at 1");
        spdlog::warn("{}", result.warnings.back());
        continue;
      }
      double sum = 0.0;
      std::size_t used = 0;
      bool dead = false;
      for (std::size_t t = 0; t < options.monitors && !dead; ++t) {
        const std::size_t monitor = (j + offset + t) % n_mon;
        const double alone = monitor_reading(monitor, {{j, kMaxPositive}});
        if (!(alone > 0.0)) {
          dead = true;
          break;
        }
        // First live reference after j, rotated per monitor choice.
        double reference = 0.0;
        std::size_t ref = j;
        for (std::size_t u = 1; u < n_src && !(reference > 0.0); ++u) {
          ref = (j + offset + t + u) % n_src;
          if (ref == j) continue;
          reference = monitor_reading(monitor, {{ref, kMaxPositive}});
        }
        if (!(reference > 0.0)) continue;

        bool measured = false;
        for (int magnitude = net::kMaxWeightLevel; magnitude >= 1 && !measured; --magnitude) {
          const double both = monitor_reading(
              monitor, {{ref, kMaxPositive}, {j, net::encode_weight(-magnitude)}});
          if (both > options.min_residual * reference) {
            sum += (reference - both) * net::kMaxWeightLevel / (magnitude * alone);
            ++used;
            measured = true;
          }
        }
        if (!measured) {
          throw MeasurementError(neuron_name(id) +
                                     ": monitor saturated at every negative magnitude",
                                 probe_id);
        }
      }
      if (dead) {
        result.dead.push_back(id);
        result.warnings.push_back(neuron_name(id) + " is dead; negative gain defaulted to 1");
        spdlog::warn("{}", result.warnings.back());
      } else if (used > 0) {
        result.gains[k][static_cast<Eigen::Index>(j)] = sum / static_cast<double>(used);
      } else {
        result.warnings.push_back(neuron_name(id) + " found no live reference; gain left at 1");
        spdlog::warn("{}", result.warnings.back());
      }
    }
  }
  return result;
}

Characterization characterize(DeviceUnderTest& dut, std::size_t n_configs,
                              const std::vector<double>& levels_na, std::uint64_t seed,
                              const NegGainOptions& neg_options) {
  Characterization c;
  c.plan = plan_measurements(dut.topology(), n_configs, levels_na, seed, 2);
  c.records = run_protocol(dut, c.plan);
  c.fit = fit_slopes(dut.topology(), c.records);
  c.neg = estimate_negative_gains(dut, derive_seed(seed, 3), neg_options);
  c.profile = c.fit.profile;
  c.profile.neg_gains = c.neg.gains;
  return c;
}

}  // namespace hetnet::charlab
