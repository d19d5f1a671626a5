// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetnet/charlab.hpp"
#include "hetnet/datasets.hpp"
#include "hetnet/netcore.hpp"
#include "hetnet/vdevice.hpp"

namespace hetnet::bench {

struct AccuracyReport {
  std::size_t evaluated = 0;
  std::size_t correct = 0;
  /// Sample at which the target failed, when the run stopped early.
  std::optional<std::size_t> failure_index;
  std::string failure;

  double accuracy() const noexcept {
    return evaluated == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(evaluated);
  }
  bool complete() const noexcept { return !failure_index; }
};

/// Behavioral model accuracy on the first `n_samples` samples. Inputs are
/// multiplied by `input_gain_na` before the forward pass.
AccuracyReport evaluate_accuracy(const net::Topology& topology, const net::TransferProfile& profile,
                                 const net::WeightMatrix& codes, const data::Dataset& dataset,
                                 std::size_t n_samples, double input_gain_na = 1.0);

/// Programs `dut` once and applies each sample. A device error stops the run and
/// is reported with the failing sample index instead of being thrown.
AccuracyReport evaluate_accuracy(charlab::DeviceUnderTest& dut, const net::WeightMatrix& codes,
                                 const data::Dataset& dataset, std::size_t n_samples,
                                 double input_gain_na = 1.0);

struct SampleRecord {
  std::size_t sample_id = 0;
  bool correct = false;
  bool converged = false;
  /// Time to output after the switch; the horizon when unconverged.
  double tto_us = 0.0;
  /// Energy over [switch, time to output].
  double energy_pj = 0.0;
  double energy_per_op_pj = 0.0;
  /// Energy over [switch, horizon].
  double energy_fixed_pj = 0.0;
  double energy_per_op_fixed_pj = 0.0;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Aggregates {
  std::size_t samples = 0;
  double accuracy = 0.0;
  double converged_fraction = 0.0;
  // Time and stop-early energy statistics cover converged samples only.
  double mean_tto_us = 0.0;
  double std_tto_us = 0.0;
  double mean_energy_per_op_pj = 0.0;
  double std_energy_per_op_pj = 0.0;
  double ops_per_joule = 0.0;
  double mean_energy_per_op_fixed_pj = 0.0;
  double std_energy_per_op_fixed_pj = 0.0;
  /// Synaptic operations per second when a new pattern arrives every horizon.
  double ops_per_second = 0.0;

  friend bool operator==(const Aggregates&, const Aggregates&) = default;
};

struct BenchConfig {
  /// Mean input current per input neuron (nA).
  double mean_input_na = 15.0;
  double horizon_us = 15.0;
  double dt_us = 0.02;
  std::size_t synapse_count = 0;

  friend bool operator==(const BenchConfig&, const BenchConfig&) = default;
};

struct BenchReport {
  BenchConfig config;
  std::vector<SampleRecord> records;
  Aggregates aggregates;
  /// Free-form provenance echoed into JSON output (hashes, seeds, paths).
  nlohmann::json provenance = nlohmann::json::object();
};

/// Recomputes the aggregate block from `records`.
Aggregates aggregate(const std::vector<SampleRecord>& records, const BenchConfig& config);

/// Rescales `sample` so its mean equals `mean_na`; all-zero samples stay zero.
std::vector<double> scale_to_mean(const Eigen::VectorXd& sample, double mean_na);

struct DynamicsOptions {
  double horizon_us = 15.0;
  double dt_us = 0.02;
  /// Worker threads; 0 uses the hardware concurrency.
  std::size_t threads = 0;
};

/// Pattern-transition benchmark: for each of the first `n_samples` test
/// samples the device starts at the steady state of the preceding sample (the
/// first sample follows the last one of the slice), switches at t = 0 and runs
/// to the horizon. One report per entry of `mean_inputs_na`.
std::vector<BenchReport> benchmark_dynamics(const device::VirtualDevice& device,
                                            const net::WeightMatrix& codes,
                                            const data::Dataset& dataset, std::size_t n_samples,
                                            const std::vector<double>& mean_inputs_na,
                                            const DynamicsOptions& options = {});

enum class ReportFormat { kCsv, kJson };

ReportFormat parse_report_format(const std::string& text);

/// CSV columns: sample_id,correct,tto_us,energy_pj,energy_per_op_pj,converged,
/// energy_fixed_pj,energy_per_op_fixed_pj. Aggregates go to JSON only.
std::string report_csv(const BenchReport& report);
nlohmann::json report_json(const BenchReport& report);
BenchReport report_from_json(const nlohmann::json& doc);
/// Records from a CSV written by report_csv; aggregates are recomputed.
BenchReport report_from_csv(const std::string& text, const BenchConfig& config);

void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace hetnet::bench
