// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include <spdlog/spdlog.h>

#include "hetnet/error.hpp"

namespace hetnet::train {

void Hyperparams::validate() const {
  if (!(learning_rate > 0.0)) throw ParameterError("learning rate must be positive");
  if (!(beta1 > 0.0 && beta1 < 1.0) || !(beta2 > 0.0 && beta2 < 1.0)) {
    throw ParameterError("ADAM betas must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ParameterError("ADAM epsilon must be positive");
  if (batch_size == 0) throw ParameterError("batch size must be >= 1");
  if (!(l1_negative >= 0.0)) throw ParameterError("L1 penalty must be non-negative");
  if (!(init_range > 0.0 && init_range <= 1.0)) throw ParameterError("init range must lie in (0, 1]");
  if (!(target > 0.0) || !std::isfinite(target)) throw ParameterError("target must be positive");
  if (restarts == 0) throw ParameterError("restarts must be >= 1");
}

std::string to_string(InitScheme scheme) {
  return scheme == InitScheme::kGlorotUniform ? "glorot" : "uniform";
}

InitScheme parse_init_scheme(const std::string& text) {
  if (text == "glorot") return InitScheme::kGlorotUniform;
  if (text == "uniform") return InitScheme::kUniform;
  throw ParameterError("unknown init scheme '" + text + "' (expected glorot or uniform)");
}

Hyperparams Hyperparams::mnist() { return Hyperparams{}; }

Hyperparams Hyperparams::iris() {
  Hyperparams hp;
  hp.learning_rate = 0.01;
  hp.epochs = 600;
  hp.batch_size = 8;
  hp.restarts = 5;
  return hp;
}

net::WeightCode quantize(double shadow) {
  if (!std::isfinite(shadow)) throw DomainError("cannot quantize a non-finite weight");
  if (shadow > 1.0 || shadow < -1.0) {
    spdlog::warn("shadow weight {} outside [-1, 1]; clamped", shadow);
    shadow = std::clamp(shadow, -1.0, 1.0);
  }
  // std::round rounds halfway cases away from zero.
  return net::encode_weight(static_cast<int>(std::round(shadow * net::kMaxWeightLevel)));
}

net::WeightMatrix quantize(const net::RealWeights& shadow) {
  net::WeightMatrix codes;
  for (const Eigen::MatrixXd& w : shadow) {
    net::CodeMatrix m(static_cast<std::size_t>(w.rows()), static_cast<std::size_t>(w.cols()));
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        m(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = quantize(w(i, j));
      }
    }
    codes.push_back(std::move(m));
  }
  return codes;
}

TrainState init_state(const net::Topology& topology, const net::TransferProfile& profile,
                      const Hyperparams& hp) {
  hp.validate();
  profile.validate(topology);
  TrainState state;
  state.profile = profile;
  state.rng.seed(hp.seed);
  for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
    const auto rows = static_cast<Eigen::Index>(topology.size(k + 1));
    const auto cols = static_cast<Eigen::Index>(topology.size(k));
    Eigen::MatrixXd w(rows, cols);
    const double range = hp.init == InitScheme::kGlorotUniform
                             ? std::sqrt(6.0 / static_cast<double>(rows + cols))
                             : hp.init_range;
    // Column-major fill order keeps the draw sequence independent of Eigen internals.
    for (Eigen::Index j = 0; j < cols; ++j) {
      for (Eigen::Index i = 0; i < rows; ++i) w(i, j) = uniform_real(state.rng, -range, range);
    }
    state.shadow.push_back(std::move(w));
    state.first_moment.push_back(Eigen::MatrixXd::Zero(rows, cols));
    state.second_moment.push_back(Eigen::MatrixXd::Zero(rows, cols));
  }
  return state;
}

namespace {

// Quantized weights with negative entries scaled by the source gains.
Eigen::MatrixXd effective(const Eigen::MatrixXd& shadow, const Eigen::VectorXd& gains, bool quantize) {
  Eigen::MatrixXd w = forward_weights({shadow}, quantize)[0];
  for (Eigen::Index j = 0; j < w.cols(); ++j) {
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      if (w(i, j) < 0.0) w(i, j) *= gains[j];
    }
  }
  return w;
}

}  // namespace

std::size_t redraw_dead_units(TrainState& state, const net::Topology& topology,
                              const Eigen::MatrixXd& inputs, const Hyperparams& hp,
                              std::size_t max_attempts) {
  std::size_t silent = 0;
  std::size_t redrawn = 0;
  // Rectified outputs of the layer feeding the weights being inspected.
  Eigen::MatrixXd x = (state.profile.slopes[0].asDiagonal() * inputs).cwiseMax(0.0);
  for (std::size_t k = 0; k + 1 < topology.num_layers(); ++k) {
    Eigen::MatrixXd& w = state.shadow[k];
    const Eigen::VectorXd& gains = state.profile.neg_gains[k];
    const Eigen::VectorXd& slopes = state.profile.slopes[k + 1];
    const double range = hp.init == InitScheme::kGlorotUniform
                             ? std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()))
                             : hp.init_range;
    Eigen::MatrixXd y = (slopes.asDiagonal() * (effective(w, gains, hp.quantize) * x)).cwiseMax(0.0);
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (std::size_t attempt = 0; attempt < max_attempts && !(y.row(i).array() > 0.0).any(); ++attempt) {
        for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = uniform_real(state.rng, -range, range);
        state.first_moment[k].row(i).setZero();
        state.second_moment[k].row(i).setZero();
        y.row(i) = (slopes[i] * (effective(w.row(i), gains, hp.quantize) * x)).cwiseMax(0.0);
        ++redrawn;
      }
      if (!(y.row(i).array() > 0.0).any()) ++silent;
    }
    x = std::move(y);
  }
  if (redrawn > 0) spdlog::debug("redrew {} silent unit initialization(s)", redrawn);
  return silent;
}

void adam_step(TrainState& state, const net::RealWeights& gradients, const Hyperparams& hp,
               std::size_t batch) {
  if (gradients.size() != state.shadow.size()) {
    throw ShapeError("gradient layer count does not match the weights");
  }
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    if (gradients[k].rows() != state.shadow[k].rows() || gradients[k].cols() != state.shadow[k].cols()) {
      throw ShapeError("gradient shape does not match the weights");
    }
    if (!gradients[k].allFinite()) throw TrainingError("non-finite gradient", 0, batch);
  }

  ++state.step;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(hp.beta1, t);
  const double correction2 = 1.0 - std::pow(hp.beta2, t);
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    auto m = state.first_moment[k].array();
    auto v = state.second_moment[k].array();
    const auto g = gradients[k].array();
    m = hp.beta1 * m + (1.0 - hp.beta1) * g;
    v = hp.beta2 * v + (1.0 - hp.beta2) * g.square();
    state.shadow[k].array() -=
        hp.learning_rate * (m / correction1) / ((v / correction2).sqrt() + hp.epsilon);
    state.shadow[k] = state.shadow[k].cwiseMax(-1.0).cwiseMin(1.0);
  }
}

void regularize(net::RealWeights& gradients, const net::RealWeights& shadow, double l1_negative) {
  if (gradients.size() != shadow.size()) throw ShapeError("gradient layer count does not match the weights");
  for (std::size_t k = 0; k < gradients.size(); ++k) {
    // d(l1 |w|)/dw = -l1 for w < 0, so descent shrinks negative weights toward zero.
    gradients[k].array() -= l1_negative * (shadow[k].array() < 0.0).cast<double>();
  }
}

net::RealWeights forward_weights(const net::RealWeights& shadow, bool quantize_weights) {
  if (!quantize_weights) return shadow;
  net::RealWeights out = shadow;
  for (Eigen::MatrixXd& w : out) {
    w = w.unaryExpr([](double v) {
      return static_cast<double>(net::decode_weight(quantize(v))) / net::kMaxWeightLevel;
    });
  }
  return out;
}

Eigen::MatrixXd one_hot(const std::vector<int>& labels, std::size_t first, std::size_t count,
                        int num_classes) {
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(num_classes, static_cast<Eigen::Index>(count));
  for (std::size_t n = 0; n < count; ++n) t(labels[first + n], static_cast<Eigen::Index>(n)) = 1.0;
  return t;
}

double accuracy(const net::Topology& topology, const net::TransferProfile& profile,
                const net::RealWeights& weights, const data::Dataset& dataset) {
  if (dataset.size() == 0) return 0.0;
  const std::vector<Eigen::MatrixXd> out = net::forward_batch(topology, profile, weights, dataset.inputs);
  std::size_t correct = 0;
  for (std::size_t s = 0; s < dataset.size(); ++s) {
    if (static_cast<int>(net::argmax(out.back().col(static_cast<Eigen::Index>(s)))) == dataset.labels[s]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(dataset.size());
}

double dataset_loss(const net::Topology& topology, const net::TransferProfile& profile,
                    const net::RealWeights& weights, const data::Dataset& dataset, double target) {
  if (dataset.size() == 0) return 0.0;
  const Eigen::MatrixXd out = net::forward_batch(topology, profile, weights, dataset.inputs).back();
  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(out.rows(), out.cols());
  for (std::size_t s = 0; s < dataset.size(); ++s) t(dataset.labels[s], static_cast<Eigen::Index>(s)) = target;
  return (out - t).squaredNorm() / static_cast<double>(out.size());
}

namespace {

TrainedModel train_once(const net::Topology& topology, const net::TransferProfile& profile,
                        const data::Dataset& train_set, const data::Dataset* test_set,
                        const Hyperparams& hp) {
  train_set.validate();
  if (train_set.dim() != topology.input_size()) {
    throw ShapeError("dataset dimension " + std::to_string(train_set.dim()) +
                     " does not match input layer " + std::to_string(topology.input_size()));
  }
  if (train_set.num_classes > static_cast<int>(topology.output_size())) {
    throw ShapeError("dataset has more classes than output neurons");
  }
  if (test_set && test_set->dim() != topology.input_size()) {
    throw ShapeError("test set dimension does not match input layer");
  }
  if (train_set.size() == 0) throw ParameterError("training set is empty");

  TrainState state = init_state(topology, profile, hp);
  if (hp.redraw_dead) {
    const std::size_t silent = redraw_dead_units(state, topology, train_set.inputs, hp);
    if (silent > 0) spdlog::warn("{} unit(s) remain silent on the training set after redraws", silent);
  }
  const int n_out = static_cast<int>(topology.output_size());
  const std::size_t n = train_set.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});

  TrainedModel model;
  model.topology = topology;
  model.hyperparams = hp;

  Eigen::MatrixXd batch_x;
  Eigen::MatrixXd batch_t;
  Eigen::VectorXd output_peak(n_out);
  for (std::size_t epoch = 0; epoch < hp.epochs; ++epoch) {
    shuffle(std::span(order), state.rng);
    output_peak.setZero();
    double loss_sum = 0.0;
    std::size_t correct = 0;
    std::size_t batches = 0;
    for (std::size_t first = 0; first < n; first += hp.batch_size) {
      const std::size_t count = std::min(hp.batch_size, n - first);
      batch_x.resize(train_set.inputs.rows(), static_cast<Eigen::Index>(count));
      batch_t = Eigen::MatrixXd::Zero(n_out, static_cast<Eigen::Index>(count));
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t s = order[first + b];
        batch_x.col(static_cast<Eigen::Index>(b)) = train_set.inputs.col(static_cast<Eigen::Index>(s));
        batch_t(train_set.labels[s], static_cast<Eigen::Index>(b)) = hp.target;
      }

      const net::RealWeights w = forward_weights(state.shadow, hp.quantize);
      net::Gradients g = net::backward_batch(topology, state.profile, w, batch_x, batch_t);
      if (!std::isfinite(g.loss)) throw TrainingError("non-finite loss", epoch, batches);
      loss_sum += g.loss * static_cast<double>(count);
      output_peak = output_peak.cwiseMax(g.outputs.rowwise().maxCoeff());

      // Accuracy of the pre-update weights on this batch.
      for (std::size_t b = 0; b < count; ++b) {
        const std::size_t s = order[first + b];
        if (static_cast<int>(net::argmax(g.outputs.col(static_cast<Eigen::Index>(b)))) == train_set.labels[s]) {
          ++correct;
        }
      }

      regularize(g.weights, state.shadow, hp.l1_negative);
      try {
        adam_step(state, g.weights, hp, batches);
      } catch (const TrainingError& e) {
        throw TrainingError(e.what(), epoch, batches);
      }
      ++batches;
    }

    EpochMetrics metrics;
    metrics.epoch = epoch + 1;
    metrics.train_loss = loss_sum / static_cast<double>(n);
    metrics.train_accuracy = static_cast<double>(correct) / static_cast<double>(n);
    if (test_set) {
      metrics.test_accuracy =
          accuracy(topology, state.profile, forward_weights(state.shadow, hp.quantize), *test_set);
    }
    spdlog::debug("epoch {}: loss {:.5f} train {:.4f} test {:.4f}", metrics.epoch, metrics.train_loss,
                  metrics.train_accuracy, metrics.test_accuracy);
    model.log.push_back(metrics);

    // An output unit that stayed silent for a whole epoch gets no gradient
    // again; its class would never be predicted.
    if (hp.redraw_dead && epoch + 1 < hp.epochs && (output_peak.array() <= 0.0).any()) {
      spdlog::debug("epoch {}: silent output unit, redrawing dead units", metrics.epoch);
      redraw_dead_units(state, topology, train_set.inputs, hp);
    }
  }

  model.shadow = state.shadow;
  model.codes = quantize(state.shadow);
  return model;
}

}  // namespace

TrainedModel train(const net::Topology& topology, const net::TransferProfile& profile,
                   const data::Dataset& train_set, const data::Dataset* test_set,
                   const Hyperparams& hp) {
  hp.validate();
  TrainedModel best;
  double best_loss = 0.0;
  for (std::size_t r = 0; r < hp.restarts; ++r) {
    Hyperparams run = hp;
    if (r > 0) run.seed = derive_seed(hp.seed, r);
    TrainedModel m = train_once(topology, profile, train_set, test_set, run);
    const double loss =
        dataset_loss(topology, profile, forward_weights(m.shadow, hp.quantize), train_set, hp.target);
    if (hp.restarts > 1) spdlog::debug("restart {}: training loss {:.6f}", r, loss);
    if (r == 0 || loss < best_loss) {
      best = std::move(m);
      best_loss = loss;
    }
  }
  best.hyperparams = hp;
  return best;
}

}  // namespace hetnet::train
