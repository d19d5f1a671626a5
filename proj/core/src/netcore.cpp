// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/netcore.hpp"

#include <cmath>
#include <string>

#include "hetnet/error.hpp"

namespace hetnet::net {

TransferProfile TransferProfile::ideal(const Topology& topology) {
  TransferProfile profile;
  for (std::size_t n : topology.layer_sizes()) {
    profile.slopes.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
    profile.neg_gains.push_back(Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n)));
  }
  return profile;
}

void TransferProfile::validate(const Topology& topology) const {
  if (slopes.size() != topology.num_layers() || neg_gains.size() != topology.num_layers()) {
    throw ShapeError("profile layer count does not match topology " + topology.to_string());
  }
  for (std::size_t k = 0; k < topology.num_layers(); ++k) {
    const auto n = static_cast<Eigen::Index>(topology.size(k));
    if (slopes[k].size() != n || neg_gains[k].size() != n) {
      throw ShapeError("profile layer " + std::to_string(k) + " has wrong size");
    }
    const auto positive_finite = [](const Eigen::VectorXd& v) {
      return (v.array() > 0.0).all() && v.allFinite();
    };
    if (!positive_finite(slopes[k]) || !positive_finite(neg_gains[k])) {
      throw DomainError("profile layer " + std::to_string(k) +
                        " has non-positive or non-finite entries");
    }
  }
}

void TransferProfile::normalize_slopes() {
  for (auto& layer : slopes) {
    const double mean = layer.mean();
    if (mean > 0.0) layer /= mean;
  }
}

RealWeights to_real(const WeightMatrix& codes) {
  RealWeights real;
  real.reserve(codes.size());
  for (const CodeMatrix& m : codes) {
    Eigen::MatrixXd w(static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
    for (std::size_t i = 0; i < m.rows(); ++i) {
      for (std::size_t j = 0; j < m.cols(); ++j) {
        w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = effective_weight(m(i, j));
      }
    }
    real.push_back(std::move(w));
  }
  return real;
}

void check_shape(const Topology& topology, const RealWeights& weights) {
  if (weights.size() + 1 != topology.num_layers()) {
    throw ShapeError("weight matrix count does not match topology " + topology.to_string());
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].rows() != static_cast<Eigen::Index>(topology.size(k + 1)) ||
        weights[k].cols() != static_cast<Eigen::Index>(topology.size(k))) {
      throw ShapeError("weight matrix " + std::to_string(k) + " has wrong shape for topology " +
                       topology.to_string());
    }
  }
}

RealWeights signed_gain_weights(const TransferProfile& profile, const RealWeights& weights) {
  RealWeights scaled = weights;
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    const Eigen::VectorXd& gains = profile.neg_gains[k];
    Eigen::MatrixXd& w = scaled[k];
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
      for (Eigen::Index i = 0; i < w.rows(); ++i) {
        if (w(i, j) < 0.0) w(i, j) *= gains[j];
      }
    }
  }
  return scaled;
}

namespace {

void check_input(const Topology& topology, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  if (inputs.rows() != static_cast<Eigen::Index>(topology.input_size())) {
    throw ShapeError("input has " + std::to_string(inputs.rows()) + " entries, topology expects " +
                     std::to_string(topology.input_size()));
  }
  if (!inputs.allFinite() || (inputs.array() < 0.0).any()) {
    throw DomainError("input currents must be finite and non-negative");
  }
}

void check_all(const Topology& topology, const TransferProfile& profile,
               const RealWeights& weights, const Eigen::Ref<const Eigen::MatrixXd>& inputs) {
  check_shape(topology, weights);
  profile.validate(topology);
  check_input(topology, inputs);
}

// Returns rectified outputs per layer.
std::vector<Eigen::MatrixXd> propagate(const TransferProfile& profile, const RealWeights& scaled,
                                       const Eigen::MatrixXd& inputs) {
  std::vector<Eigen::MatrixXd> outputs;
  outputs.reserve(scaled.size() + 1);
  outputs.push_back((profile.slopes[0].asDiagonal() * inputs).cwiseMax(0.0));
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    Eigen::MatrixXd summed = scaled[k] * outputs.back();
    outputs.push_back((profile.slopes[k + 1].asDiagonal() * summed).cwiseMax(0.0));
  }
  return outputs;
}

}  // namespace

Activations forward(const Topology& topology, const TransferProfile& profile,
                    const RealWeights& weights, std::span<const double> input) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  check_all(topology, profile, weights, x);
  const RealWeights scaled = signed_gain_weights(profile, weights);

  Activations act;
  act.inputs.push_back(x);
  act.outputs.push_back(profile.slopes[0].cwiseProduct(x).cwiseMax(0.0));
  for (std::size_t k = 0; k < scaled.size(); ++k) {
    act.inputs.push_back(scaled[k] * act.outputs.back());
    act.outputs.push_back(profile.slopes[k + 1].cwiseProduct(act.inputs.back()).cwiseMax(0.0));
  }
  return act;
}

Activations forward(const Topology& topology, const TransferProfile& profile,
                    const WeightMatrix& codes, std::span<const double> input) {
  check_shape(topology, codes);
  return forward(topology, profile, to_real(codes), input);
}

std::vector<Eigen::MatrixXd> forward_batch(const Topology& topology, const TransferProfile& profile,
                                           const RealWeights& weights,
                                           const Eigen::MatrixXd& inputs) {
  check_all(topology, profile, weights, inputs);
  return propagate(profile, signed_gain_weights(profile, weights), inputs);
}

Gradients backward_batch(const Topology& topology, const TransferProfile& profile,
                         const RealWeights& weights, const Eigen::MatrixXd& inputs,
                         const Eigen::MatrixXd& targets) {
  check_all(topology, profile, weights, inputs);
  if (targets.rows() != static_cast<Eigen::Index>(topology.output_size()) ||
      targets.cols() != inputs.cols()) {
    throw ShapeError("target shape does not match output layer and batch size");
  }
  const RealWeights scaled = signed_gain_weights(profile, weights);
  const std::vector<Eigen::MatrixXd> outputs = propagate(profile, scaled, inputs);

  const double norm = static_cast<double>(targets.rows() * targets.cols());
  const Eigen::MatrixXd diff = outputs.back() - targets;

  Gradients grads;
  grads.loss = diff.squaredNorm() / norm;
  grads.weights.resize(weights.size());

  Eigen::MatrixXd d_out = (2.0 / norm) * diff;
  for (std::size_t k = weights.size(); k-- > 0;) {
    const Eigen::MatrixXd& out = outputs[k + 1];
    // d loss / d summed input; zero where the rectifier is off.
    Eigen::MatrixXd d_sum =
        (profile.slopes[k + 1].asDiagonal() * d_out).cwiseProduct((out.array() > 0.0).cast<double>().matrix());

    Eigen::MatrixXd g = d_sum * outputs[k].transpose();
    const Eigen::VectorXd& gains = profile.neg_gains[k];
    for (Eigen::Index j = 0; j < g.cols(); ++j) {
      for (Eigen::Index i = 0; i < g.rows(); ++i) {
        if (weights[k](i, j) < 0.0) g(i, j) *= gains[j];
      }
    }
    grads.weights[k] = std::move(g);
    if (k > 0) d_out = scaled[k].transpose() * d_sum;
  }
  grads.outputs = outputs.back();
  return grads;
}

Gradients backward(const Topology& topology, const TransferProfile& profile,
                   const RealWeights& weights, std::span<const double> input,
                   std::span<const double> target) {
  const Eigen::Map<const Eigen::VectorXd> x(input.data(), static_cast<Eigen::Index>(input.size()));
  const Eigen::Map<const Eigen::VectorXd> t(target.data(),
                                            static_cast<Eigen::Index>(target.size()));
  return backward_batch(topology, profile, weights, Eigen::MatrixXd(x), Eigen::MatrixXd(t));
}

std::size_t argmax(const Eigen::Ref<const Eigen::VectorXd>& values) {
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return static_cast<std::size_t>(best);
}

}  // namespace hetnet::net
