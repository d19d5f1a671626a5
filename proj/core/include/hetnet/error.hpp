// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetnet {

/// Base class of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Negative input current or other value outside a function's domain.
class DomainError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class RangeError : public Error {
 public:
  using Error::Error;
};

/// Invalid numeric parameter (dt <= 0, empty window, k > dimension, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Malformed file. `offset` is the byte offset (binary formats) or line number
/// (text formats) where parsing failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what), offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

/// A neuron identified by layer and index within that layer.
struct NeuronId {
  std::size_t layer = 0;
  std::size_t index = 0;
  friend bool operator==(const NeuronId&, const NeuronId&) = default;
};

/// Measurement plan cannot reach the required coverage.
class PlanError : public Error {
 public:
  PlanError(const std::string& what, std::vector<NeuronId> unprobed)
      : Error(what), unprobed_(std::move(unprobed)) {}
  const std::vector<NeuronId>& unprobed() const noexcept { return unprobed_; }

 private:
  std::vector<NeuronId> unprobed_;
};

class FitError : public Error {
 public:
  FitError(const std::string& what, NeuronId neuron) : Error(what), neuron_(neuron) {}
  NeuronId neuron() const noexcept { return neuron_; }

 private:
  NeuronId neuron_;
};

class MeasurementError : public Error {
 public:
  MeasurementError(const std::string& what, std::size_t config_id)
      : Error(what), config_id_(config_id) {}
  std::size_t config_id() const noexcept { return config_id_; }

 private:
  std::size_t config_id_;
};

class TrainingError : public Error {
 public:
  TrainingError(const std::string& what, std::size_t epoch, std::size_t batch)
      : Error(what), epoch_(epoch), batch_(batch) {}
  std::size_t epoch() const noexcept { return epoch_; }
  std::size_t batch() const noexcept { return batch_; }

 private:
  std::size_t epoch_;
  std::size_t batch_;
};

/// Artifacts whose content hashes do not chain (model trained for another device, ...).
class ProvenanceError : public Error {
 public:
  using Error::Error;
};

}  // namespace hetnet
