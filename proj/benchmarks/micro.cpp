// Copyright 2026 The hetnet Authors.
// SPDX-License-Identifier: Apache-2.0

#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "hetnet/charlab.hpp"
#include "hetnet/netcore.hpp"
#include "hetnet/trainer.hpp"
#include "hetnet/vdevice.hpp"

namespace {

using namespace hetnet;

const net::Topology kMnist({196, 100, 50, 10});

net::WeightMatrix random_codes(const net::Topology& t, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> level(-7, 7);
  net::WeightMatrix codes = net::zero_weights(t);
  for (auto& m : codes)
    for (std::size_t i = 0; i < m.rows(); ++i)
      for (std::size_t j = 0; j < m.cols(); ++j) m(i, j) = net::encode_weight(level(rng));
  return codes;
}

Eigen::MatrixXd random_inputs(std::size_t dim, std::size_t n) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 0.1);
  Eigen::MatrixXd x(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = u(rng);
  return x;
}

void BM_ForwardBatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto dev = device::VirtualDevice::fabricate(kMnist, 1);
  const auto w = net::to_real(random_codes(kMnist, 2));
  const Eigen::MatrixXd x = random_inputs(196, n);
  const auto profile = dev.effective_profile();
  for (auto _ : state) benchmark::DoNotOptimize(net::forward_batch(kMnist, profile, w, x));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_ForwardBatch)->Arg(1)->Arg(200)->Arg(1000);

void BM_BackwardBatch(benchmark::State& state) {
  const std::size_t n = 200;
  const auto dev = device::VirtualDevice::fabricate(kMnist, 1);
  const auto w = net::to_real(random_codes(kMnist, 2));
  const Eigen::MatrixXd x = random_inputs(196, n);
  std::vector<int> labels(n);
  for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % 10);
  const Eigen::MatrixXd y = train::one_hot(labels, 0, n, 10);
  const auto profile = dev.effective_profile();
  for (auto _ : state) benchmark::DoNotOptimize(net::backward_batch(kMnist, profile, w, x, y));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * n));
}
BENCHMARK(BM_BackwardBatch);

void BM_DcResponse(benchmark::State& state) {
  const auto dev = device::VirtualDevice::fabricate(kMnist, 1);
  const auto codes = random_codes(kMnist, 2);
  const Eigen::VectorXd x = random_inputs(196, 1).col(0) * 150.0;
  const std::vector<double> in(x.data(), x.data() + x.size());
  for (auto _ : state) benchmark::DoNotOptimize(dev.dc_response(codes, in));
}
BENCHMARK(BM_DcResponse);

void BM_Transient(benchmark::State& state) {
  const auto dev = device::VirtualDevice::fabricate(kMnist, 1);
  const auto codes = random_codes(kMnist, 2);
  const Eigen::MatrixXd x = random_inputs(196, 2) * 150.0;
  const std::vector<double> a(x.col(0).data(), x.col(0).data() + 196);
  const std::vector<double> b(x.col(1).data(), x.col(1).data() + 196);
  const std::vector<device::InputEvent> schedule{{0.0, b}};
  device::TransientOptions o;
  o.dt_us = 0.02;
  o.t_end_us = static_cast<double>(state.range(0));
  o.initial_input_na = a;
  for (auto _ : state) benchmark::DoNotOptimize(device::transient(dev, codes, schedule, o));
}
BENCHMARK(BM_Transient)->Arg(5)->Arg(15)->Unit(benchmark::kMillisecond);

void BM_Characterize(benchmark::State& state) {
  const auto dev = device::VirtualDevice::fabricate(kMnist, 1);
  for (auto _ : state) {
    charlab::VirtualDut dut(dev);
    benchmark::DoNotOptimize(charlab::characterize(dut, 40, {5, 10, 15, 20}, 1));
  }
}
BENCHMARK(BM_Characterize)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
