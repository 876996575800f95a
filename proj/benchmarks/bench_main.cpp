// Copyright 2026 The sybilscope Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <map>

#include "sybilscope/churn.hpp"
#include "sybilscope/fingerprint.hpp"
#include "sybilscope/neighbors.hpp"
#include "sybilscope/synth.hpp"
#include "sybilscope/uptime.hpp"

namespace {

using namespace sybilscope;

const SynthResult& network(std::size_t relays, std::size_t hours) {
  static std::map<std::pair<std::size_t, std::size_t>, SynthResult> cache;
  auto it = cache.find({relays, hours});
  if (it == cache.end()) {
    BaselineSpec b;
    b.relay_count = relays;
    b.duration_hours = hours;
    b.hourly_join_rate = 0.02;
    b.hourly_leave_rate = 0.02;
    std::vector<SybilSpec> sybils;
    if (hours >= 24) {
      SybilSpec cycler;
      cycler.group_size = 88;
      cycler.fingerprint_churn = 24;
      sybils.push_back(cycler);
    }
    it = cache.emplace(std::pair(relays, hours), generate(b, sybils)).first;
  }
  return it->second;
}

void BM_ChurnPair(benchmark::State& state) {
  const SynthResult& r = network(static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) benchmark::DoNotOptimize(churn_pair(r.consensuses[0], r.consensuses[1]));
}
BENCHMARK(BM_ChurnPair)->Arg(1000)->Arg(7000);

void BM_NeighborSearch(benchmark::State& state) {
  const SynthResult& r = network(static_cast<std::size_t>(state.range(0)), 1);
  const Consensus& c = r.consensuses.back();
  const Fingerprint seed = c.statuses().front().fingerprint;
  for (auto _ : state) benchmark::DoNotOptimize(nearest(seed, c, r.descriptors, 10));
}
BENCHMARK(BM_NeighborSearch)->Arg(1000)->Arg(6942)->Unit(benchmark::kMillisecond);

void BM_UptimeClustering(benchmark::State& state) {
  const SynthResult& r = network(static_cast<std::size_t>(state.range(0)), static_cast<std::size_t>(state.range(1)));
  for (auto _ : state) {
    const UptimeMatrix m = build_matrix(r.consensuses);
    const ColumnOrder order = cluster_order(m);
    benchmark::DoNotOptimize(render(m, order, 3000));
  }
}
BENCHMARK(BM_UptimeClustering)->Args({500, 168})->Args({3000, 720})->Unit(benchmark::kSecond)->Iterations(1);

void BM_FingerprintTracking(benchmark::State& state) {
  const SynthResult& r = network(static_cast<std::size_t>(state.range(0)), 720);
  for (auto _ : state) benchmark::DoNotOptimize(top_changers(track(r.consensuses), 50));
}
BENCHMARK(BM_FingerprintTracking)->Arg(3000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
