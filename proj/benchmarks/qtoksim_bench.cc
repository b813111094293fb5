// Copyright 2026 The qtoksim Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "qtoksim/harness/scenario.h"
#include "qtoksim/hmp4.h"
#include "qtoksim/noise.h"
#include "qtoksim/ops.h"
#include "qtoksim/qrpuf.h"
#include "qtoksim/uupuf.h"

using namespace qtoksim;

namespace {

void BM_HaarUnitary(benchmark::State &state) {
    RngStream rng(1, 0);
    const auto dim = static_cast<size_t>(state.range(0));
    for (auto _ : state) {
        benchmark::DoNotOptimize(haar_unitary(dim, rng));
    }
}
BENCHMARK(BM_HaarUnitary)->RangeMultiplier(2)->Range(2, 256);

void BM_MixedFidelity(benchmark::State &state) {
    RngStream rng(2, 0);
    const auto dim = static_cast<size_t>(state.range(0));
    auto a = depolarize(DensityMatrix::from_pure(haar_state(dim, rng)), 0.3);
    auto b = depolarize(DensityMatrix::from_pure(haar_state(dim, rng)), 0.3);
    for (auto _ : state) {
        benchmark::DoNotOptimize(fidelity(a, b));
    }
}
BENCHMARK(BM_MixedFidelity)->RangeMultiplier(2)->Range(2, 64);

void BM_DephaseAll(benchmark::State &state) {
    RngStream rng(3, 0);
    const auto dim = size_t{1} << state.range(0);
    auto rho = DensityMatrix::from_pure(haar_state(dim, rng));
    for (auto _ : state) {
        benchmark::DoNotOptimize(dephase_all(rho, 10.0, 108.6));
    }
}
BENCHMARK(BM_DephaseAll)->DenseRange(1, 6);

void BM_QrPufEnrollVerify(benchmark::State &state) {
    RngStream rng(4, 0);
    const auto lambda = static_cast<size_t>(state.range(0));
    auto puf = qrpuf::qgen_qr(lambda, rng);
    auto challenges = qrpuf::select_challenges(1, lambda, rng);
    auto responder = qrpuf::honest_responder(puf);
    for (auto _ : state) {
        auto crt = qrpuf::enroll(puf, challenges, qrpuf::EnrollMode::analytic, 1, 8, rng);
        benchmark::DoNotOptimize(qrpuf::verify(crt, 0, responder, 0, 1, rng));
    }
}
BENCHMARK(BM_QrPufEnrollVerify)->DenseRange(2, 10, 2);

void BM_TestAlgorithm(benchmark::State &state) {
    RngStream rng(5, 0);
    auto puf = uupuf::qgen_uu(static_cast<size_t>(state.range(0)), rng);
    auto crt = uupuf::issue_crt(puf, 1, 50, rng);
    auto holder = uupuf::honest_holder(puf);
    for (auto _ : state) {
        benchmark::DoNotOptimize(uupuf::uu_authenticate(holder, crt, 0, 50, 0.9, rng));
    }
}
BENCHMARK(BM_TestAlgorithm)->DenseRange(2, 8, 2);

void BM_Hmp4Validate(benchmark::State &state) {
    RngStream rng(6, 0);
    const auto t = static_cast<size_t>(state.range(0));
    for (auto _ : state) {
        auto issued = hmp4::issue(t, rng);
        hmp4::HonestHolder holder(issued.holder);
        benchmark::DoNotOptimize(hmp4::validate(issued.server, holder, t, 0, rng));
    }
}
BENCHMARK(BM_Hmp4Validate)->Arg(12)->Arg(48)->Arg(192);

void BM_ScenarioTrial(benchmark::State &state) {
    harness::ScenarioConfig cfg;
    cfg.protocol = static_cast<harness::Protocol>(state.range(0));
    cfg.lambda = 3;
    cfg.channel.latency_us = 5.0;
    cfg.channel.noise = NoiseParams{};
    cfg.validate();
    size_t trial = 0;
    for (auto _ : state) {
        benchmark::DoNotOptimize(harness::run_trial(cfg, trial++));
    }
}
BENCHMARK(BM_ScenarioTrial)->DenseRange(0, 2);

}  // namespace

BENCHMARK_MAIN();
