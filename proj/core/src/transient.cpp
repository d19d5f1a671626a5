// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <cmath>
#include <string>

#include "hetnet/error.hpp"
#include "hetnet/vdevice.hpp"

namespace hetnet::device {

std::size_t TransientTrace::output_argmax(std::size_t t) const {
  return net::argmax(currents_na.back().col(static_cast<Eigen::Index>(t)));
}

double relaxation_time_us(double n_ut_mv, double cap_ff, double current_na, double floor_na) {
  // mV * fF / nA = 1e-3 us
  return n_ut_mv * cap_ff / std::max(current_na, floor_na) * 1e-3;
}

TransientTrace transient(const VirtualDevice& device, const net::WeightMatrix& codes,
                         std::span<const InputEvent> schedule, const TransientOptions& options) {
  if (!(options.dt_us > 0.0)) throw ParameterError("transient step dt must be positive");
  if (schedule.empty()) throw ParameterError("transient schedule is empty");
  for (std::size_t e = 1; e < schedule.size(); ++e) {
    if (!(schedule[e].time_us > schedule[e - 1].time_us)) {
      throw ParameterError("transient schedule times must be strictly increasing");
    }
  }
  if (!(options.t_end_us >= schedule.front().time_us)) {
    throw ParameterError("transient end time precedes the first input event");
  }

  const net::Topology& topo = device.topology();
  const net::TransferProfile profile = device.effective_profile();
  const net::RealWeights weights = device.synapse_weights(codes);
  const net::RealWeights scaled = net::signed_gain_weights(profile, weights);
  const std::vector<Eigen::VectorXd> caps = device.node_capacitance_ff();
  const double n_ut = device.params().n_ut_mv();
  const double floor = device.options().i_floor_na;
  const std::size_t layers = topo.num_layers();

  for (const InputEvent& ev : schedule) {
    // Validates shape and sign of every scheduled input.
    (void)net::forward(topo, profile, weights, ev.input_na);
  }

  std::vector<Eigen::VectorXd> state(layers);
  if (options.initial_input_na) {
    state = net::forward(topo, profile, weights, *options.initial_input_na).outputs;
  } else {
    for (std::size_t k = 0; k < layers; ++k) {
      state[k] = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(topo.size(k)));
    }
  }

  const double t0 = schedule.front().time_us;
  const auto steps =
      static_cast<std::size_t>(std::floor((options.t_end_us - t0) / options.dt_us + 1e-9));

  TransientTrace trace;
  trace.time_us.reserve(steps + 1);
  trace.supply_ua.reserve(steps + 1);
  for (const InputEvent& ev : schedule) trace.switch_times_us.push_back(ev.time_us);
  for (std::size_t k = 0; k < layers; ++k) {
    trace.currents_na.emplace_back(static_cast<Eigen::Index>(topo.size(k)),
                                   static_cast<Eigen::Index>(steps + 1));
  }

  std::size_t event = 0;
  std::vector<Eigen::VectorXd> summed(layers);
  for (std::size_t step = 0; step <= steps; ++step) {
    const double t = t0 + static_cast<double>(step) * options.dt_us;
    while (event + 1 < schedule.size() && schedule[event + 1].time_us <= t + 1e-12) ++event;
    const std::vector<double>& input = schedule[event].input_na;

    trace.time_us.push_back(t);
    for (std::size_t k = 0; k < layers; ++k) {
      trace.currents_na[k].col(static_cast<Eigen::Index>(step)) = state[k];
    }
    trace.supply_ua.push_back(device.supply_current_na(weights, state, input) * 1e-3);
    if (step == steps) break;

    // Every neuron relaxes toward the DC target implied by the present state
    // of its sources.
    summed[0] = Eigen::Map<const Eigen::VectorXd>(input.data(), static_cast<Eigen::Index>(input.size()));
    for (std::size_t k = 1; k < layers; ++k) summed[k] = scaled[k - 1] * state[k - 1];
    for (std::size_t k = 0; k < layers; ++k) {
      const Eigen::VectorXd& a = profile.slopes[k];
      for (Eigen::Index i = 0; i < state[k].size(); ++i) {
        const double target = std::max(0.0, a[i] * summed[k][i]);
        // Bandwidth follows the larger of the drive current and the current
        // the node is still carrying.
        const double current = std::max(std::max(summed[k][i], 0.0), state[k][i] / a[i]);
        const double tau = relaxation_time_us(n_ut, caps[k][i], current, floor);
        state[k][i] += (target - state[k][i]) * -std::expm1(-options.dt_us / tau);
      }
    }
  }
  return trace;
}

TimeToOutput time_to_output(const TransientTrace& trace, std::size_t asymptotic_argmax) {
  if (trace.samples() == 0) throw ParameterError("time_to_output needs a non-empty trace");
  const double last_switch = trace.switch_times_us.empty() ? trace.time_us.front()
                                                            : trace.switch_times_us.back();
  const std::size_t n = trace.samples();
  if (trace.output_argmax(n - 1) != asymptotic_argmax) return {false, 0.0};

  std::size_t first = 0;
  while (first < n && trace.time_us[first] < last_switch - 1e-12) ++first;
  for (std::size_t t = n; t-- > first;) {
    if (trace.output_argmax(t) != asymptotic_argmax) {
      return {true, trace.time_us[t + 1] - last_switch};
    }
  }
  return {true, 0.0};
}

namespace {

double interpolate(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  const double w = (x - xs[hi - 1]) / (xs[hi] - xs[hi - 1]);
  return ys[hi - 1] + w * (ys[hi] - ys[hi - 1]);
}

}  // namespace

Energy energy(const VirtualDevice& device, const TransientTrace& trace, double t0_us,
              double t1_us) {
  if (!(t1_us > t0_us)) throw ParameterError("energy window is empty");
  if (trace.samples() == 0 || t0_us < trace.time_us.front() - 1e-9 ||
      t1_us > trace.time_us.back() + 1e-9) {
    throw ParameterError("energy window lies outside the trace");
  }
  const auto& ts = trace.time_us;
  const auto& is = trace.supply_ua;

  // Piecewise-linear integral of the supply current over [t0, t1].
  double charge_ua_us = 0.0;
  double prev_t = t0_us;
  double prev_i = interpolate(ts, is, t0_us);
  for (std::size_t k = 0; k < ts.size(); ++k) {
    if (ts[k] <= t0_us) continue;
    if (ts[k] >= t1_us) break;
    charge_ua_us += 0.5 * (prev_i + is[k]) * (ts[k] - prev_t);
    prev_t = ts[k];
    prev_i = is[k];
  }
  charge_ua_us += 0.5 * (prev_i + interpolate(ts, is, t1_us)) * (t1_us - prev_t);

  Energy e;
  e.joules = device.options().vdd_v * charge_ua_us * 1e-12;  // uA * us = 1e-12 C
  e.joules_per_op = e.joules / static_cast<double>(device.topology().synapse_count());
  return e;
}

}  // namespace hetnet::device
