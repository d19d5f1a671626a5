// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

namespace hetnet::data {

/// Fixed-size labelled vectors. Samples are the columns of `inputs`; every
/// entry is non-negative.
struct Dataset {
  Eigen::MatrixXd inputs;  // dim x samples
  std::vector<int> labels;
  int num_classes = 0;
  std::string split;       // "train", "test", ...
  std::string provenance;
  /// Columns of the original data kept by reduce_to_active_pixels, if any.
  std::vector<std::size_t> pixel_indices;
  /// Samples flagged by preprocessing (e.g. all-zero images).
  std::vector<std::size_t> flagged;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(inputs.rows()); }
  Eigen::VectorXd sample(std::size_t i) const { return inputs.col(static_cast<Eigen::Index>(i)); }

  /// Throws ShapeError / DomainError if the invariants do not hold.
  void validate() const;
  /// Samples [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const;
  Dataset select(const std::vector<std::size_t>& indices) const;
};

/// Reads an IDX image file (magic 2051) and label file (magic 2049). Pixels are
/// scaled to [0, 1]. Throws FormatError carrying the failing byte offset.
Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const std::string& split);

/// Train and test splits of the standard MNIST file set in `dir`.
std::pair<Dataset, Dataset> load_mnist_dir(const std::filesystem::path& dir);

/// Indices of the k columns with the highest mean over `train`, sorted
/// ascending; ties favour the lower index. Throws ParameterError when k > dim.
std::vector<std::size_t> select_active_pixels(const Dataset& train, std::size_t k);

/// Keeps only `indices` (typically computed on the training split).
Dataset apply_pixel_selection(const Dataset& dataset, const std::vector<std::size_t>& indices);

/// select_active_pixels on `train` applied to it; returns the reduced set.
Dataset reduce_to_active_pixels(const Dataset& train, std::size_t k = 196);

/// Scales every sample to mean `target_mean`. All-zero samples are left at
/// zero and recorded in `flagged`.
Dataset scale_mean(const Dataset& dataset, double target_mean);

/// Reads the Iris CSV (four features and a class name per row). Throws
/// FormatError with the line number of a malformed row.
Dataset load_iris(const std::filesystem::path& path);

/// Per-feature affine map of [min, max] onto [0, hi].
struct MinMaxScaling {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
  double hi = 1.0;
};

MinMaxScaling fit_minmax(const Dataset& dataset, double hi);
/// Maps [-min, max] onto [0, hi] per feature, so the smallest value keeps a
/// baseline proportional to itself rather than collapsing to zero.
MinMaxScaling fit_baseline(const Dataset& dataset, double hi);
Dataset apply_minmax(const Dataset& dataset, const MinMaxScaling& scaling);

/// Seeded random (unstratified) partition into n_train and the remainder.
std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t n_train, std::uint64_t seed);

/// Train/test pair in dimensionless units plus the current (nA) that one unit
/// of input maps to on the device.
struct Prepared {
  Dataset train;
  Dataset test;
  double input_gain_na = 1.0;
};

inline constexpr double kMnistMean = 0.04;
inline constexpr double kMnistGainNa = 375.0;  // mean 0.04 -> 15 nA per input neuron
inline constexpr double kIrisGainNa = 325.0;

/// MNIST from `dir`: top-`pixels` selection on train, per-image mean kMnistMean.
Prepared prepare_mnist(const std::filesystem::path& dir, std::size_t pixels = 196);

/// Iris from `path`: fit_baseline to [0, 1] over all 150 rows, then a seeded
/// n_train / rest split. The network has no bias terms, so its decisions depend
/// only on the direction of the input vector; plain min-max would move the
/// origin into the data and discard most of that information.
Prepared prepare_iris(const std::filesystem::path& path, std::size_t n_train, std::uint64_t seed);

/// Versioned binary cache of a processed dataset, provenance and pixel list included.
void save_cache(const Dataset& dataset, const std::filesystem::path& path);
Dataset load_cache(const std::filesystem::path& path);

}  // namespace hetnet::data
