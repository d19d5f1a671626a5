// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include "hetnet/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include "hetnet/error.hpp"

namespace hetnet::bench {

namespace {

void check_count(const data::Dataset& dataset, std::size_t n_samples) {
  if (n_samples > dataset.size()) {
    throw ParameterError("requested " + std::to_string(n_samples) + " samples but the dataset has " +
                         std::to_string(dataset.size()));
  }
}

std::vector<double> scaled(const Eigen::VectorXd& x, double gain) {
  std::vector<double> out(static_cast<std::size_t>(x.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) out[static_cast<std::size_t>(i)] = x[i] * gain;
  return out;
}

void mean_std(const std::vector<double>& v, double& mean, double& sd) {
  mean = sd = 0.0;
  if (v.empty()) return;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  if (v.size() < 2) return;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
}

}  // namespace

AccuracyReport evaluate_accuracy(const net::Topology& topology, const net::TransferProfile& profile,
                                 const net::WeightMatrix& codes, const data::Dataset& dataset,
                                 std::size_t n_samples, double input_gain_na) {
  check_count(dataset, n_samples);
  const net::RealWeights weights = net::to_real(codes);
  AccuracyReport report;
  for (std::size_t s = 0; s < n_samples; ++s) {
    const std::vector<double> x = scaled(dataset.sample(s), input_gain_na);
    const net::Activations act = net::forward(topology, profile, weights, x);
    report.correct += static_cast<int>(net::argmax(act.output())) == dataset.labels[s];
    ++report.evaluated;
  }
  return report;
}

AccuracyReport evaluate_accuracy(charlab::DeviceUnderTest& dut, const net::WeightMatrix& codes,
                                 const data::Dataset& dataset, std::size_t n_samples,
                                 double input_gain_na) {
  check_count(dataset, n_samples);
  AccuracyReport report;
  try {
    dut.program(codes);
  } catch (const Error& e) {
    report.failure_index = 0;
    report.failure = std::string("programming failed: ") + e.what();
    return report;
  }
  for (std::size_t s = 0; s < n_samples; ++s) {
    try {
      const std::vector<double> x = scaled(dataset.sample(s), input_gain_na);
      const charlab::Readings r = dut.apply_input(x);
      report.correct += static_cast<int>(net::argmax(r.output_currents)) == dataset.labels[s];
      ++report.evaluated;
    } catch (const Error& e) {
      report.failure_index = s;
      report.failure = e.what();
      break;
    }
  }
  return report;
}

Aggregates aggregate(const std::vector<SampleRecord>& records, const BenchConfig& config) {
  Aggregates a;
  a.samples = records.size();
  if (records.empty()) return a;
  std::vector<double> tto, epo, epo_fixed;
  std::size_t correct = 0;
  for (const SampleRecord& r : records) {
    correct += r.correct;
    epo_fixed.push_back(r.energy_per_op_fixed_pj);
    if (r.converged) {
      tto.push_back(r.tto_us);
      epo.push_back(r.energy_per_op_pj);
    }
  }
  const auto n = static_cast<double>(records.size());
  a.accuracy = static_cast<double>(correct) / n;
  a.converged_fraction = static_cast<double>(tto.size()) / n;
  mean_std(tto, a.mean_tto_us, a.std_tto_us);
  mean_std(epo, a.mean_energy_per_op_pj, a.std_energy_per_op_pj);
  mean_std(epo_fixed, a.mean_energy_per_op_fixed_pj, a.std_energy_per_op_fixed_pj);
  a.ops_per_joule = a.mean_energy_per_op_pj > 0.0 ? 1e12 / a.mean_energy_per_op_pj : 0.0;
  a.ops_per_second = config.horizon_us > 0.0
                         ? static_cast<double>(config.synapse_count) / (config.horizon_us * 1e-6)
                         : 0.0;
  return a;
}

std::vector<double> scale_to_mean(const Eigen::VectorXd& sample, double mean_na) {
  const double m = sample.size() == 0 ? 0.0 : sample.mean();
  return scaled(sample, m > 0.0 ? mean_na / m : 0.0);
}

std::vector<BenchReport> benchmark_dynamics(const device::VirtualDevice& device,
                                            const net::WeightMatrix& codes,
                                            const data::Dataset& dataset, std::size_t n_samples,
                                            const std::vector<double>& mean_inputs_na,
                                            const DynamicsOptions& options) {
  check_count(dataset, n_samples);
  if (!(options.horizon_us > 0.0)) throw ParameterError("benchmark horizon must be positive");
  if (!(options.dt_us > 0.0)) throw ParameterError("benchmark dt must be positive");
  net::check_shape(device.topology(), net::to_real(codes));

  std::vector<BenchReport> reports;
  for (double mean_na : mean_inputs_na) {
    if (!(mean_na > 0.0)) throw ParameterError("mean input current must be positive");
    BenchReport report;
    report.config = {mean_na, options.horizon_us, options.dt_us, device.topology().synapse_count()};
    report.records.resize(n_samples);

    auto run = [&](std::size_t s) {
      const std::size_t prev = s == 0 ? n_samples - 1 : s - 1;
      device::TransientOptions topt;
      topt.dt_us = options.dt_us;
      topt.t_end_us = options.horizon_us;
      topt.initial_input_na = scale_to_mean(dataset.sample(prev), mean_na);
      const std::vector<device::InputEvent> schedule{{0.0, scale_to_mean(dataset.sample(s), mean_na)}};
      const device::TransientTrace trace = device::transient(device, codes, schedule, topt);

      const std::size_t settled =
          net::argmax(device.dc_response(codes, schedule.front().input_na).output());
      const device::TimeToOutput tto = device::time_to_output(trace, settled);
      const double t_end = trace.time_us.back();

      SampleRecord r;
      r.sample_id = s;
      r.correct = static_cast<int>(trace.output_argmax(trace.samples() - 1)) == dataset.labels[s];
      r.converged = tto.converged;
      r.tto_us = tto.converged ? tto.time_us : t_end;
      if (r.tto_us > 0.0) {
        const device::Energy e = device::energy(device, trace, 0.0, r.tto_us);
        r.energy_pj = e.joules * 1e12;
        r.energy_per_op_pj = e.joules_per_op * 1e12;
      }
      const device::Energy fixed = device::energy(device, trace, 0.0, t_end);
      r.energy_fixed_pj = fixed.joules * 1e12;
      r.energy_per_op_fixed_pj = fixed.joules_per_op * 1e12;
      report.records[s] = r;
    };

    // Samples are independent; each worker writes only its own slots.
    std::size_t threads = options.threads ? options.threads : std::thread::hardware_concurrency();
    threads = std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(n_samples, 1));
    if (threads == 1) {
      for (std::size_t s = 0; s < n_samples; ++s) run(s);
    } else {
      std::atomic<std::size_t> next{0};
      std::exception_ptr failure;
      std::atomic<bool> failed{false};
      std::vector<std::jthread> pool;
      for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
          for (std::size_t s; !failed && (s = next++) < n_samples;) {
            try {
              run(s);
            } catch (...) {
              if (!failed.exchange(true)) failure = std::current_exception();
            }
          }
        });
      }
      pool.clear();
      if (failure) std::rethrow_exception(failure);
    }
    report.aggregates = aggregate(report.records, report.config);
    reports.push_back(std::move(report));
  }
  return reports;
}

ReportFormat parse_report_format(const std::string& text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  throw ParameterError("unknown report format '" + text + "' (expected csv or json)");
}

namespace {

constexpr const char* kCsvHeader =
    "sample_id,correct,tto_us,energy_pj,energy_per_op_pj,converged,energy_fixed_pj,"
    "energy_per_op_fixed_pj";

}  // namespace

std::string report_csv(const BenchReport& report) {
  std::ostringstream out;
  out << kCsvHeader << '\n' << std::setprecision(17);
  for (const SampleRecord& r : report.records) {
    out << r.sample_id << ',' << int{r.correct} << ',' << r.tto_us << ',' << r.energy_pj << ','
        << r.energy_per_op_pj << ',' << int{r.converged} << ',' << r.energy_fixed_pj << ','
        << r.energy_per_op_fixed_pj << '\n';
  }
  return out.str();
}

nlohmann::json report_json(const BenchReport& report) {
  using nlohmann::json;
  json records = json::array();
  for (const SampleRecord& r : report.records) {
    records.push_back({{"sample_id", r.sample_id},
                       {"correct", r.correct},
                       {"converged", r.converged},
                       {"tto_us", r.tto_us},
                       {"energy_pj", r.energy_pj},
                       {"energy_per_op_pj", r.energy_per_op_pj},
                       {"energy_fixed_pj", r.energy_fixed_pj},
                       {"energy_per_op_fixed_pj", r.energy_per_op_fixed_pj}});
  }
  const Aggregates& a = report.aggregates;
  return {
      {"schema", "hetnet.report"},
      {"version", 1},
      {"config",
       {{"mean_input_na", report.config.mean_input_na},
        {"horizon_us", report.config.horizon_us},
        {"dt_us", report.config.dt_us},
        {"synapse_count", report.config.synapse_count}}},
      {"provenance", report.provenance},
      {"aggregates",
       {{"samples", a.samples},
        {"accuracy", a.accuracy},
        {"converged_fraction", a.converged_fraction},
        {"mean_tto_us", a.mean_tto_us},
        {"std_tto_us", a.std_tto_us},
        {"mean_energy_per_op_pj", a.mean_energy_per_op_pj},
        {"std_energy_per_op_pj", a.std_energy_per_op_pj},
        {"ops_per_joule", a.ops_per_joule},
        {"mean_energy_per_op_fixed_pj", a.mean_energy_per_op_fixed_pj},
        {"std_energy_per_op_fixed_pj", a.std_energy_per_op_fixed_pj},
        {"ops_per_second", a.ops_per_second}}},
      {"records", records},
  };
}

BenchReport report_from_json(const nlohmann::json& doc) {
  if (!doc.is_object() || doc.value("schema", std::string{}) != "hetnet.report" ||
      doc.value("version", 0) != 1) {
    throw FormatError("expected a hetnet.report version 1 document", 0);
  }
  try {
    BenchReport report;
    const auto& c = doc.at("config");
    report.config = {c.at("mean_input_na").get<double>(), c.at("horizon_us").get<double>(),
                     c.at("dt_us").get<double>(), c.at("synapse_count").get<std::size_t>()};
    report.provenance = doc.value("provenance", nlohmann::json::object());
    for (const auto& r : doc.at("records")) {
      report.records.push_back({r.at("sample_id").get<std::size_t>(), r.at("correct").get<bool>(),
                                r.at("converged").get<bool>(), r.at("tto_us").get<double>(),
                                r.at("energy_pj").get<double>(),
                                r.at("energy_per_op_pj").get<double>(),
                                r.at("energy_fixed_pj").get<double>(),
                                r.at("energy_per_op_fixed_pj").get<double>()});
    }
    report.aggregates = aggregate(report.records, report.config);
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("report: ") + e.what(), 0);
  }
}

BenchReport report_from_csv(const std::string& text, const BenchConfig& config) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    throw FormatError("report CSV: unexpected header", 0);
  }
  BenchReport report;
  report.config = config;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> f;
    while (std::getline(row, field, ',')) f.push_back(field);
    if (f.size() != 8) throw FormatError("report CSV: expected 8 fields", line_no);
    try {
      report.records.push_back({std::stoul(f[0]), f[1] == "1", f[5] == "1", std::stod(f[2]),
                                std::stod(f[3]), std::stod(f[4]), std::stod(f[6]), std::stod(f[7])});
    } catch (const std::exception&) {
      throw FormatError("report CSV: malformed number", line_no);
    }
  }
  report.aggregates = aggregate(report.records, report.config);
  return report;
}

void emit_report(const BenchReport& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  if (format == ReportFormat::kCsv) {
    out << report_csv(report);
  } else {
    out << report_json(report).dump(1) << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace hetnet::bench
