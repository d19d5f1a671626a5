// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/datasets.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <sstream>

#include <spdlog/spdlog.h>

#include "hetnet/error.hpp"
#include "hetnet/rng.hpp"

namespace hetnet::data {

void Dataset::validate() const {
  if (static_cast<std::size_t>(inputs.cols()) != labels.size()) {
    throw ShapeError("dataset has " + std::to_string(inputs.cols()) + " samples but " +
                     std::to_string(labels.size()) + " labels");
  }
  for (int label : labels) {
    if (label < 0 || label >= num_classes) {
      throw DomainError("label " + std::to_string(label) + " outside [0, " +
                        std::to_string(num_classes) + ")");
    }
  }
  if (!inputs.allFinite() || (inputs.array() < 0.0).any()) {
    throw DomainError("dataset inputs must be finite and non-negative");
  }
}

Dataset Dataset::slice(std::size_t first, std::size_t count) const {
  if (first + count > size()) throw ParameterError("dataset slice out of range");
  Dataset out = *this;
  out.inputs = inputs.middleCols(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(count));
  out.labels.assign(labels.begin() + static_cast<std::ptrdiff_t>(first),
                    labels.begin() + static_cast<std::ptrdiff_t>(first + count));
  out.flagged.clear();
  for (std::size_t f : flagged) {
    if (f >= first && f < first + count) out.flagged.push_back(f - first);
  }
  return out;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const {
  Dataset out = *this;
  out.inputs.resize(inputs.rows(), static_cast<Eigen::Index>(indices.size()));
  out.labels.resize(indices.size());
  out.flagged.clear();
  for (std::size_t n = 0; n < indices.size(); ++n) {
    if (indices[n] >= size()) throw ParameterError("dataset index out of range");
    out.inputs.col(static_cast<Eigen::Index>(n)) = inputs.col(static_cast<Eigen::Index>(indices[n]));
    out.labels[n] = labels[indices[n]];
    if (std::find(flagged.begin(), flagged.end(), indices[n]) != flagged.end()) {
      out.flagged.push_back(n);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// MNIST IDX

namespace {

std::vector<unsigned char> read_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::uint32_t read_be32(const std::vector<unsigned char>& bytes, std::size_t offset,
                        const std::filesystem::path& path) {
  if (offset + 4 > bytes.size()) {
    throw FormatError(path.string() + ": truncated header at byte " + std::to_string(offset),
                      offset);
  }
  return (std::uint32_t{bytes[offset]} << 24) | (std::uint32_t{bytes[offset + 1]} << 16) |
         (std::uint32_t{bytes[offset + 2]} << 8) | std::uint32_t{bytes[offset + 3]};
}

void expect_magic(std::uint32_t magic, std::uint32_t expected, const std::filesystem::path& path) {
  if (magic != expected) {
    throw FormatError(path.string() + ": bad IDX magic " + std::to_string(magic) + " (expected " +
                          std::to_string(expected) + ") at byte 0",
                      0);
  }
}

}  // namespace

Dataset load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels,
                       const std::string& split) {
  const auto img = read_bytes(images);
  expect_magic(read_be32(img, 0, images), 2051, images);
  const std::size_t n = read_be32(img, 4, images);
  const std::size_t rows = read_be32(img, 8, images);
  const std::size_t cols = read_be32(img, 12, images);
  const std::size_t dim = rows * cols;
  if (img.size() < 16 + n * dim) {
    throw FormatError(images.string() + ": truncated pixel data at byte " +
                          std::to_string(img.size()),
                      img.size());
  }

  const auto lab = read_bytes(labels);
  expect_magic(read_be32(lab, 0, labels), 2049, labels);
  const std::size_t n_labels = read_be32(lab, 4, labels);
  if (n_labels != n) {
    throw FormatError(labels.string() + ": " + std::to_string(n_labels) +
                          " labels for " + std::to_string(n) + " images at byte 4",
                      4);
  }
  if (lab.size() < 8 + n) {
    throw FormatError(labels.string() + ": truncated label data at byte " +
                          std::to_string(lab.size()),
                      lab.size());
  }

  Dataset ds;
  ds.split = split;
  ds.provenance = "mnist-idx:" + images.filename().string();
  ds.num_classes = 10;
  ds.inputs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  ds.labels.resize(n);
  for (std::size_t s = 0; s < n; ++s) {
    const unsigned char* px = img.data() + 16 + s * dim;
    for (std::size_t p = 0; p < dim; ++p) {
      ds.inputs(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(s)) = px[p] / 255.0;
    }
    const int label = lab[8 + s];
    if (label > 9) {
      throw FormatError(labels.string() + ": label " + std::to_string(label) + " at byte " +
                            std::to_string(8 + s),
                        8 + s);
    }
    ds.labels[s] = label;
  }
  return ds;
}

std::pair<Dataset, Dataset> load_mnist_dir(const std::filesystem::path& dir) {
  return {load_mnist_idx(dir / "train-images-idx3-ubyte", dir / "train-labels-idx1-ubyte", "train"),
          load_mnist_idx(dir / "t10k-images-idx3-ubyte", dir / "t10k-labels-idx1-ubyte", "test")};
}

// ---------------------------------------------------------------------------
// Preprocessing

std::vector<std::size_t> select_active_pixels(const Dataset& train, std::size_t k) {
  if (k > train.dim()) {
    throw ParameterError("cannot keep " + std::to_string(k) + " of " +
                         std::to_string(train.dim()) + " pixels");
  }
  const Eigen::VectorXd mean = train.inputs.rowwise().mean();
  std::vector<std::size_t> order(train.dim());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return mean[static_cast<Eigen::Index>(a)] > mean[static_cast<Eigen::Index>(b)];
  });
  order.resize(k);
  std::sort(order.begin(), order.end());
  return order;
}

Dataset apply_pixel_selection(const Dataset& dataset, const std::vector<std::size_t>& indices) {
  Dataset out = dataset;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), dataset.inputs.cols());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    if (indices[r] >= dataset.dim()) throw ParameterError("pixel index out of range");
    out.inputs.row(static_cast<Eigen::Index>(r)) =
        dataset.inputs.row(static_cast<Eigen::Index>(indices[r]));
  }
  out.pixel_indices = indices;
  return out;
}

Dataset reduce_to_active_pixels(const Dataset& train, std::size_t k) {
  return apply_pixel_selection(train, select_active_pixels(train, k));
}

Dataset scale_mean(const Dataset& dataset, double target_mean) {
  if (!(target_mean > 0.0)) throw ParameterError("target mean must be positive");
  Dataset out = dataset;
  out.flagged.clear();
  for (Eigen::Index s = 0; s < out.inputs.cols(); ++s) {
    const double mean = out.inputs.col(s).mean();
    if (mean > 0.0) {
      out.inputs.col(s) *= target_mean / mean;
    } else {
      out.flagged.push_back(static_cast<std::size_t>(s));
    }
  }
  if (!out.flagged.empty()) {
    spdlog::warn("{} all-zero sample(s) left unscaled", out.flagged.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Iris

Dataset load_iris(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);

  std::vector<std::array<double, 4>> rows;
  std::vector<int> labels;
  std::map<std::string, int> classes;
  std::vector<std::string> class_order;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 5) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": expected 5 fields, got " +
                            std::to_string(fields.size()),
                        line_no);
    }
    std::array<double, 4> x{};
    for (int f = 0; f < 4; ++f) {
      const std::string& t = fields[static_cast<std::size_t>(f)];
      const auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), x[static_cast<std::size_t>(f)]);
      if (ec != std::errc{} || end != t.data() + t.size()) {
        throw FormatError(path.string() + ":" + std::to_string(line_no) + ": bad number '" + t + "'",
                          line_no);
      }
    }
    const std::string& name = fields[4];
    if (name.empty()) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": empty class name", line_no);
    }
    auto [it, inserted] = classes.emplace(name, static_cast<int>(class_order.size()));
    if (inserted) class_order.push_back(name);
    rows.push_back(x);
    labels.push_back(it->second);
  }
  if (rows.empty()) throw FormatError(path.string() + ": no data rows", line_no);

  Dataset ds;
  ds.split = "all";
  ds.provenance = "iris-csv:" + path.filename().string();
  ds.num_classes = static_cast<int>(class_order.size());
  ds.inputs.resize(4, static_cast<Eigen::Index>(rows.size()));
  for (std::size_t s = 0; s < rows.size(); ++s) {
    for (int f = 0; f < 4; ++f) ds.inputs(f, static_cast<Eigen::Index>(s)) = rows[s][static_cast<std::size_t>(f)];
  }
  ds.labels = std::move(labels);
  ds.validate();
  return ds;
}

MinMaxScaling fit_minmax(const Dataset& dataset, double hi) {
  if (!(hi > 0.0)) throw ParameterError("min-max upper bound must be positive");
  if (dataset.size() == 0) throw ParameterError("cannot fit min-max scaling on an empty dataset");
  return {dataset.inputs.rowwise().minCoeff(), dataset.inputs.rowwise().maxCoeff(), hi};
}

MinMaxScaling fit_baseline(const Dataset& dataset, double hi) {
  MinMaxScaling m = fit_minmax(dataset, hi);
  m.min = -m.min;
  return m;
}

Dataset apply_minmax(const Dataset& dataset, const MinMaxScaling& scaling) {
  Dataset out = dataset;
  for (Eigen::Index f = 0; f < out.inputs.rows(); ++f) {
    const double span = scaling.max[f] - scaling.min[f];
    for (Eigen::Index s = 0; s < out.inputs.cols(); ++s) {
      const double v = span > 0.0 ? (out.inputs(f, s) - scaling.min[f]) / span : 0.0;
      out.inputs(f, s) = std::clamp(v, 0.0, 1.0) * scaling.hi;
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split(const Dataset& dataset, std::size_t n_train, std::uint64_t seed) {
  if (n_train > dataset.size()) throw ParameterError("split larger than dataset");
  std::vector<std::size_t> order(dataset.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Engine engine(seed);
  shuffle(std::span(order), engine);
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> test_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  Dataset train = dataset.select(train_idx);
  Dataset test = dataset.select(test_idx);
  train.split = "train";
  test.split = "test";
  return {std::move(train), std::move(test)};
}

// ---------------------------------------------------------------------------
// Binary cache

namespace {

static_assert(std::endian::native == std::endian::little, "cache format assumes little endian");

constexpr char kCacheMagic[4] = {'H', 'N', 'D', 'S'};
constexpr std::uint32_t kCacheVersion = 1;

template <typename T>
void put(std::ofstream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void put_string(std::ofstream& out, const std::string& s) {
  put<std::uint64_t>(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

class Reader {
 public:
  explicit Reader(const std::filesystem::path& path) : bytes_(read_bytes(path)), path_(path) {}

  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, bytes_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::string get_string() {
    const auto n = get<std::uint64_t>();
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  void get_raw(void* dst, std::size_t n) {
    need(n);
    std::memcpy(dst, bytes_.data() + pos_, n);
    pos_ += n;
  }
  std::size_t pos() const { return pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > bytes_.size()) {
      throw FormatError(path_.string() + ": truncated at byte " + std::to_string(pos_), pos_);
    }
  }
  std::vector<unsigned char> bytes_;
  std::filesystem::path path_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_cache(const Dataset& dataset, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out.write(kCacheMagic, 4);
  put(out, kCacheVersion);
  put<std::uint64_t>(out, dataset.size());
  put<std::uint64_t>(out, dataset.dim());
  put<std::int32_t>(out, dataset.num_classes);
  put_string(out, dataset.split);
  put_string(out, dataset.provenance);
  put<std::uint64_t>(out, dataset.pixel_indices.size());
  for (std::size_t p : dataset.pixel_indices) put<std::uint64_t>(out, p);
  put<std::uint64_t>(out, dataset.flagged.size());
  for (std::size_t f : dataset.flagged) put<std::uint64_t>(out, f);
  for (int label : dataset.labels) put<std::int32_t>(out, label);
  out.write(reinterpret_cast<const char*>(dataset.inputs.data()),
            static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(dataset.inputs.size())));
  if (!out) throw Error("failed writing " + path.string());
}

Dataset load_cache(const std::filesystem::path& path) {
  Reader r(path);
  char magic[4];
  r.get_raw(magic, 4);
  if (std::memcmp(magic, kCacheMagic, 4) != 0) {
    throw FormatError(path.string() + ": not a dataset cache (bad magic at byte 0)", 0);
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kCacheVersion) {
    throw FormatError(path.string() + ": unsupported cache version " + std::to_string(version), 4);
  }
  Dataset ds;
  const auto n = r.get<std::uint64_t>();
  const auto dim = r.get<std::uint64_t>();
  ds.num_classes = r.get<std::int32_t>();
  ds.split = r.get_string();
  ds.provenance = r.get_string();
  ds.pixel_indices.resize(r.get<std::uint64_t>());
  for (auto& p : ds.pixel_indices) p = r.get<std::uint64_t>();
  ds.flagged.resize(r.get<std::uint64_t>());
  for (auto& f : ds.flagged) f = r.get<std::uint64_t>();
  ds.labels.resize(n);
  for (auto& label : ds.labels) label = r.get<std::int32_t>();
  ds.inputs.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  r.get_raw(ds.inputs.data(), sizeof(double) * dim * n);
  ds.validate();
  return ds;
}

Prepared prepare_mnist(const std::filesystem::path& dir, std::size_t pixels) {
  auto [train, test] = load_mnist_dir(dir);
  const std::vector<std::size_t> keep = select_active_pixels(train, pixels);
  return {scale_mean(apply_pixel_selection(train, keep), kMnistMean),
          scale_mean(apply_pixel_selection(test, keep), kMnistMean), kMnistGainNa};
}

Prepared prepare_iris(const std::filesystem::path& path, std::size_t n_train, std::uint64_t seed) {
  const Dataset all = load_iris(path);
  auto [train, test] = split(apply_minmax(all, fit_baseline(all, 1.0)), n_train, seed);
  return {std::move(train), std::move(test), kIrisGainNa};
}

}  // namespace hetnet::data
