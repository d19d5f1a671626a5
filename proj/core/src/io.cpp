// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/io.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#include "hetnet/error.hpp"

namespace hetnet::io {

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string content_hash(const json& doc) { return sha256_hex(doc.dump()); }

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what(), e.byte);
  }
}

void write_json(const std::filesystem::path& path, const json& doc) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << doc.dump(1) << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

void expect_schema(const json& doc, std::string_view schema) {
  if (!doc.is_object() || doc.value("schema", std::string{}) != schema) {
    throw FormatError("expected a " + std::string(schema) + " document", 0);
  }
  if (doc.value("version", 0) != kSchemaVersion) {
    throw FormatError(std::string(schema) + ": unsupported schema version " +
                          std::to_string(doc.value("version", 0)),
                      0);
  }
}

namespace {

// Converts nlohmann type/out-of-range errors into FormatError.
template <typename F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw FormatError(std::string(what) + ": " + e.what(), 0);
  }
}

json vectors_to_json(const std::vector<Eigen::VectorXd>& layers) {
  json out = json::array();
  for (const auto& v : layers) out.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  return out;
}

std::vector<Eigen::VectorXd> vectors_from_json(const json& doc) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& layer : doc) {
    const auto values = layer.get<std::vector<double>>();
    out.push_back(Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
  }
  return out;
}

}  // namespace

json codes_to_json(const net::WeightMatrix& codes) {
  json layers = json::array();
  for (const net::CodeMatrix& m : codes) {
    json sign = json::array();
    json bits = json::array();
    for (std::size_t i = 0; i < m.rows(); ++i) {
      std::vector<int> s(m.cols()), b(m.cols());
      for (std::size_t j = 0; j < m.cols(); ++j) {
        s[j] = m(i, j).negative ? 1 : 0;
        b[j] = m(i, j).bits;
      }
      sign.push_back(s);
      bits.push_back(b);
    }
    layers.push_back({{"sign", sign}, {"bits", bits}});
  }
  return layers;
}

net::WeightMatrix codes_from_json(const json& doc, const net::Topology& topology) {
  return guarded("weight codes", [&] {
    net::WeightMatrix codes = net::zero_weights(topology);
    if (doc.size() != codes.size()) throw FormatError("weight codes: wrong layer count", 0);
    for (std::size_t k = 0; k < codes.size(); ++k) {
      const auto sign = doc[k].at("sign").get<std::vector<std::vector<int>>>();
      const auto bits = doc[k].at("bits").get<std::vector<std::vector<int>>>();
      if (sign.size() != codes[k].rows() || bits.size() != codes[k].rows()) {
        throw FormatError("weight codes: wrong row count in layer " + std::to_string(k), 0);
      }
      for (std::size_t i = 0; i < codes[k].rows(); ++i) {
        if (sign[i].size() != codes[k].cols() || bits[i].size() != codes[k].cols()) {
          throw FormatError("weight codes: wrong column count in layer " + std::to_string(k), 0);
        }
        for (std::size_t j = 0; j < codes[k].cols(); ++j) {
          if (bits[i][j] < 0 || bits[i][j] > 7 || (sign[i][j] != 0 && sign[i][j] != 1)) {
            throw FormatError("weight codes: invalid code in layer " + std::to_string(k), 0);
          }
          codes[k](i, j) = {sign[i][j] == 1, static_cast<std::uint8_t>(bits[i][j])};
        }
      }
    }
    return codes;
  });
}

json weights_to_json(const net::RealWeights& weights) {
  json layers = json::array();
  for (const Eigen::MatrixXd& w : weights) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      std::vector<double> row(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index j = 0; j < w.cols(); ++j) row[static_cast<std::size_t>(j)] = w(i, j);
      rows.push_back(row);
    }
    layers.push_back(rows);
  }
  return layers;
}

net::RealWeights weights_from_json(const json& doc, const net::Topology& topology) {
  return guarded("weights", [&] {
    net::RealWeights out;
    if (doc.size() + 1 != topology.num_layers()) throw FormatError("weights: wrong layer count", 0);
    for (std::size_t k = 0; k < doc.size(); ++k) {
      const auto rows = doc[k].get<std::vector<std::vector<double>>>();
      Eigen::MatrixXd w(static_cast<Eigen::Index>(topology.size(k + 1)),
                        static_cast<Eigen::Index>(topology.size(k)));
      if (rows.size() != topology.size(k + 1)) throw FormatError("weights: wrong row count", 0);
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].size() != topology.size(k)) throw FormatError("weights: wrong column count", 0);
        for (std::size_t j = 0; j < rows[i].size(); ++j) {
          w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
      }
      out.push_back(std::move(w));
    }
    return out;
  });
}

// ---------------------------------------------------------------------------
// Devices

json device_to_json(const device::VirtualDevice& d) {
  json geometry = json::array();
  for (const auto& t : d.geometry()) {
    geometry.push_back({{"name", t.name}, {"w_um", t.w_um}, {"l_um", t.l_um}});
  }
  json shifts = json::array();
  for (const auto& layer : d.all_soma_shifts()) {
    json l = json::array();
    for (const auto& s : layer) l.push_back(std::vector<double>(s.begin(), s.end()));
    shifts.push_back(l);
  }
  return {
      {"schema", "hetnet.device"},
      {"version", kSchemaVersion},
      {"topology", d.topology().to_string()},
      {"seed", d.seed()},
      {"mismatch",
       {{"avt_mv_um", d.params().avt_mv_um},
        {"n_slope", d.params().n_slope},
        {"ut_mv", d.params().ut_mv},
        {"sigma_rule", device::to_string(d.params().sigma_rule)}}},
      {"geometry", geometry},
      {"options",
       {{"synapse_cap_ff", d.options().synapse_cap_ff},
        {"i_floor_na", d.options().i_floor_na},
        {"vdd_v", d.options().vdd_v},
        {"synapse_jitter", d.options().synapse_jitter}}},
      {"delta_vt_mv", shifts},
  };
}

device::VirtualDevice device_from_json(const json& doc) {
  expect_schema(doc, "hetnet.device");
  return guarded("device", [&] {
    const net::Topology topology = net::Topology::parse(doc.at("topology").get<std::string>());
    device::MismatchParams params;
    const json& m = doc.at("mismatch");
    params.avt_mv_um = m.at("avt_mv_um").get<double>();
    params.n_slope = m.at("n_slope").get<double>();
    params.ut_mv = m.at("ut_mv").get<double>();
    params.sigma_rule = device::parse_sigma_rule(m.at("sigma_rule").get<std::string>());

    std::vector<device::TransistorGeometry> geometry = device::default_geometry();
    if (doc.contains("geometry")) {
      for (const auto& t : doc.at("geometry")) {
        const std::string name = t.at("name").get<std::string>();
        auto it = std::find_if(geometry.begin(), geometry.end(),
                               [&](const auto& g) { return g.name == name; });
        if (it == geometry.end()) throw FormatError("device: unknown transistor " + name, 0);
        it->w_um = t.at("w_um").get<double>();
        it->l_um = t.at("l_um").get<double>();
      }
    }

    device::DeviceOptions options;
    if (doc.contains("options")) {
      const json& o = doc.at("options");
      options.synapse_cap_ff = o.value("synapse_cap_ff", options.synapse_cap_ff);
      options.i_floor_na = o.value("i_floor_na", options.i_floor_na);
      options.vdd_v = o.value("vdd_v", options.vdd_v);
      options.synapse_jitter = o.value("synapse_jitter", options.synapse_jitter);
    }

    std::vector<std::vector<device::SomaShifts>> soma;
    if (doc.contains("delta_vt_mv")) {
      for (const auto& layer : doc.at("delta_vt_mv")) {
        std::vector<device::SomaShifts> l;
        for (const auto& s : layer) {
          const auto v = s.get<std::vector<double>>();
          if (v.size() != 5) throw FormatError("device: each neuron needs 5 threshold shifts", 0);
          l.push_back({v[0], v[1], v[2], v[3], v[4]});
        }
        soma.push_back(std::move(l));
      }
    }
    return device::restore_device(topology, doc.at("seed").get<std::uint64_t>(), params,
                                  std::move(geometry), options, soma);
  });
}

json device_file_to_json(const DeviceFile& file) {
  json doc = device_to_json(file.device);
  if (file.programmed) {
    doc["programmed"] = {{"model_hash", file.programmed_model_hash},
                         {"codes", codes_to_json(*file.programmed)}};
  }
  return doc;
}

DeviceFile device_file_from_json(const json& doc) {
  DeviceFile file{device_from_json(doc), std::nullopt, {}};
  if (doc.contains("programmed")) {
    guarded("device", [&] {
      const json& p = doc.at("programmed");
      file.programmed = codes_from_json(p.at("codes"), file.device.topology());
      file.programmed_model_hash = p.value("model_hash", std::string{});
      return 0;
    });
  }
  return file;
}

std::string device_hash(const device::VirtualDevice& device) {
  return content_hash(device_to_json(device));
}

// ---------------------------------------------------------------------------
// Profiles

json profile_to_json(const ProfileFile& file) {
  return {
      {"schema", "hetnet.profile"},
      {"version", kSchemaVersion},
      {"topology", file.topology.to_string()},
      {"slopes", vectors_to_json(file.profile.slopes)},
      {"neg_gains", vectors_to_json(file.profile.neg_gains)},
      {"provenance",
       {{"device_hash", file.device_hash},
        {"plan_seed", file.plan_seed},
        {"n_configs", file.n_configs},
        {"levels_na", file.levels_na}}},
      {"fit", file.fit},
  };
}

ProfileFile profile_from_json(const json& doc) {
  expect_schema(doc, "hetnet.profile");
  return guarded("profile", [&] {
    ProfileFile file;
    file.topology = net::Topology::parse(doc.at("topology").get<std::string>());
    file.profile.slopes = vectors_from_json(doc.at("slopes"));
    file.profile.neg_gains = vectors_from_json(doc.at("neg_gains"));
    try {
      file.profile.validate(file.topology);
    } catch (const Error& e) {
      throw FormatError(std::string("profile: ") + e.what(), 0);
    }
    const json& p = doc.at("provenance");
    file.device_hash = p.value("device_hash", std::string{});
    file.plan_seed = p.value("plan_seed", std::uint64_t{0});
    file.n_configs = p.value("n_configs", std::size_t{0});
    file.levels_na = p.value("levels_na", std::vector<double>{});
    file.fit = doc.value("fit", json::object());
    return file;
  });
}

ProfileFile make_profile_file(const charlab::Characterization& c, const std::string& device_hash,
                              std::size_t n_configs, const std::vector<double>& levels_na) {
  ProfileFile file;
  file.topology = c.plan.topology;
  file.profile = c.profile;
  file.device_hash = device_hash;
  file.plan_seed = c.plan.seed;
  file.n_configs = n_configs;
  file.levels_na = levels_na;
  json warnings = c.fit.warnings;
  for (const auto& w : c.neg.warnings) warnings.push_back(w);
  file.fit = {{"raw_slopes", vectors_to_json(c.fit.raw_slopes)},
              {"residual_rms_na", vectors_to_json(c.fit.residual_rms)},
              {"points", c.fit.points},
              {"warnings", warnings}};
  return file;
}

// ---------------------------------------------------------------------------
// Models

json hyperparams_to_json(const train::Hyperparams& hp) {
  return {{"learning_rate", hp.learning_rate}, {"beta1", hp.beta1},
          {"beta2", hp.beta2},                 {"epsilon", hp.epsilon},
          {"epochs", hp.epochs},               {"batch_size", hp.batch_size},
          {"l1_negative", hp.l1_negative},     {"seed", hp.seed},
          {"quantize", hp.quantize},           {"init", train::to_string(hp.init)},
          {"init_range", hp.init_range},
          {"target", hp.target},
          {"redraw_dead", hp.redraw_dead},
          {"restarts", hp.restarts}};
}

train::Hyperparams hyperparams_from_json(const json& doc) {
  train::Hyperparams hp;
  hp.learning_rate = doc.at("learning_rate").get<double>();
  hp.beta1 = doc.at("beta1").get<double>();
  hp.beta2 = doc.at("beta2").get<double>();
  hp.epsilon = doc.at("epsilon").get<double>();
  hp.epochs = doc.at("epochs").get<std::size_t>();
  hp.batch_size = doc.at("batch_size").get<std::size_t>();
  hp.l1_negative = doc.at("l1_negative").get<double>();
  hp.seed = doc.at("seed").get<std::uint64_t>();
  hp.quantize = doc.at("quantize").get<bool>();
  hp.init = train::parse_init_scheme(doc.value("init", train::to_string(hp.init)));
  hp.init_range = doc.value("init_range", hp.init_range);
  hp.target = doc.value("target", hp.target);
  hp.redraw_dead = doc.value("redraw_dead", hp.redraw_dead);
  hp.restarts = doc.value("restarts", hp.restarts);
  return hp;
}

json model_to_json(const train::TrainedModel& model, const json& dataset_info) {
  json log = json::array();
  for (const auto& m : model.log) {
    log.push_back({{"epoch", m.epoch},
                   {"train_loss", m.train_loss},
                   {"train_acc", m.train_accuracy},
                   {"test_acc", m.test_accuracy}});
  }
  return {
      {"schema", "hetnet.model"},
      {"version", kSchemaVersion},
      {"topology", model.topology.to_string()},
      {"codes", codes_to_json(model.codes)},
      {"shadow", weights_to_json(model.shadow)},
      {"profile_hash", model.profile_hash},
      {"device_hash", model.device_hash},
      {"hyperparams", hyperparams_to_json(model.hyperparams)},
      {"metrics", log},
      {"dataset", dataset_info},
  };
}

train::TrainedModel model_from_json(const json& doc) {
  expect_schema(doc, "hetnet.model");
  return guarded("model", [&] {
    train::TrainedModel model;
    model.topology = net::Topology::parse(doc.at("topology").get<std::string>());
    model.codes = codes_from_json(doc.at("codes"), model.topology);
    if (doc.contains("shadow")) model.shadow = weights_from_json(doc.at("shadow"), model.topology);
    model.profile_hash = doc.value("profile_hash", std::string{});
    model.device_hash = doc.value("device_hash", std::string{});
    model.hyperparams = hyperparams_from_json(doc.at("hyperparams"));
    for (const auto& m : doc.value("metrics", json::array())) {
      model.log.push_back({m.at("epoch").get<std::size_t>(), m.at("train_loss").get<double>(),
                           m.at("train_acc").get<double>(), m.at("test_acc").get<double>()});
    }
    return model;
  });
}

std::string training_log_csv(const train::TrainedModel& model) {
  std::ostringstream out;
  out << "epoch,train_loss,train_acc,test_acc\n";
  out << std::setprecision(10);
  for (const auto& m : model.log) {
    out << m.epoch << ',' << m.train_loss << ',' << m.train_accuracy << ',' << m.test_accuracy << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Measurement logs

json record_to_json(const charlab::MeasurementRecord& record) {
  json readings = json::array();
  for (const auto& p : record.points) {
    readings.push_back({p.neuron.layer, p.neuron.index, p.in_na, p.out_na});
  }
  return {{"config_id", record.config_id},
          {"input_na", record.input_na},
          {"usable", record.usable},
          {"permutations", record.sources},
          {"readings", readings}};
}

charlab::MeasurementRecord record_from_json(const json& doc) {
  return guarded("measurement record", [&] {
    charlab::MeasurementRecord rec;
    rec.config_id = doc.at("config_id").get<std::size_t>();
    rec.input_na = doc.at("input_na").get<double>();
    rec.usable = doc.value("usable", true);
    rec.sources = doc.at("permutations").get<std::vector<std::vector<std::size_t>>>();
    for (const auto& r : doc.at("readings")) {
      rec.points.push_back({{r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()},
                            r.at(2).get<double>(),
                            r.at(3).get<double>()});
    }
    return rec;
  });
}

void write_measurement_log(const std::filesystem::path& path,
                           std::span<const charlab::MeasurementRecord> records) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& rec : records) out << record_to_json(rec).dump() << '\n';
}

std::vector<charlab::MeasurementRecord> read_measurement_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  std::vector<charlab::MeasurementRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      records.push_back(record_from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return records;
}

void write_trace_csv(const std::filesystem::path& path, const device::TransientTrace& trace) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "time_us,supply_ua";
  for (std::size_t k = 0; k < trace.currents_na.size(); ++k) {
    for (Eigen::Index i = 0; i < trace.currents_na[k].rows(); ++i) out << ",L" << k << '_' << i;
  }
  out << '\n' << std::setprecision(10);
  for (std::size_t t = 0; t < trace.samples(); ++t) {
    out << trace.time_us[t] << ',' << trace.supply_ua[t];
    for (const auto& layer : trace.currents_na) {
      for (Eigen::Index i = 0; i < layer.rows(); ++i) out << ',' << layer(i, static_cast<Eigen::Index>(t));
    }
    out << '\n';
  }
}

}  // namespace hetnet::io
