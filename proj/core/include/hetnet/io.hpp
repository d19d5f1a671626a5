// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "hetnet/charlab.hpp"
#include "hetnet/netcore.hpp"
#include "hetnet/trainer.hpp"
#include "hetnet/vdevice.hpp"

namespace hetnet::io {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

std::string sha256_hex(std::string_view bytes);
/// SHA-256 of the compact, key-sorted serialization of `doc`.
std::string content_hash(const json& doc);

json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const json& doc);

/// Throws FormatError unless doc["schema"] == schema and the version is supported.
void expect_schema(const json& doc, std::string_view schema);

json codes_to_json(const net::WeightMatrix& codes);
net::WeightMatrix codes_from_json(const json& doc, const net::Topology& topology);

json weights_to_json(const net::RealWeights& weights);
net::RealWeights weights_from_json(const json& doc, const net::Topology& topology);

// --- device files -----------------------------------------------------------

struct DeviceFile {
  device::VirtualDevice device;
  /// Codes written by `program`, with the hash of the model they came from.
  std::optional<net::WeightMatrix> programmed;
  std::string programmed_model_hash;
};

/// Device description with the threshold-shift table materialized.
json device_to_json(const device::VirtualDevice& device);
device::VirtualDevice device_from_json(const json& doc);
json device_file_to_json(const DeviceFile& file);
DeviceFile device_file_from_json(const json& doc);
/// Hash of the fabricated device, independent of any programmed codes.
std::string device_hash(const device::VirtualDevice& device);

// --- profile files ----------------------------------------------------------

struct ProfileFile {
  net::Topology topology;
  net::TransferProfile profile;
  std::string device_hash;
  std::uint64_t plan_seed = 0;
  std::size_t n_configs = 0;
  std::vector<double> levels_na;
  /// Fit statistics and warnings, stored verbatim.
  json fit = json::object();
};

json profile_to_json(const ProfileFile& file);
ProfileFile profile_from_json(const json& doc);
ProfileFile make_profile_file(const charlab::Characterization& c, const std::string& device_hash,
                              std::size_t n_configs, const std::vector<double>& levels_na);

// --- model files ------------------------------------------------------------

json hyperparams_to_json(const train::Hyperparams& hp);
train::Hyperparams hyperparams_from_json(const json& doc);
json model_to_json(const train::TrainedModel& model, const json& dataset_info = json::object());
train::TrainedModel model_from_json(const json& doc);
/// CSV training log: epoch,train_loss,train_acc,test_acc.
std::string training_log_csv(const train::TrainedModel& model);

// --- measurement logs -------------------------------------------------------

json record_to_json(const charlab::MeasurementRecord& record);
charlab::MeasurementRecord record_from_json(const json& doc);
/// JSON-lines, one record per configuration.
void write_measurement_log(const std::filesystem::path& path,
                           std::span<const charlab::MeasurementRecord> records);
std::vector<charlab::MeasurementRecord> read_measurement_log(const std::filesystem::path& path);

/// Writes one (neurons x samples) block per layer as CSV: time_us, then one
/// column per neuron named L<layer>_<index>.
void write_trace_csv(const std::filesystem::path& path, const device::TransientTrace& trace);

}  // namespace hetnet::io
