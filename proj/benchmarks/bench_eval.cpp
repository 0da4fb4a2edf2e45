/*
 Copyright 2026 The forge Authors.
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include <benchmark/benchmark.h>

#include "forge/eval.hpp"
#include "forge/random.hpp"

namespace {

forge::ReliabilityMatrix matrix(std::size_t units, std::size_t coders) {
    forge::Rng rng(3);
    forge::ReliabilityMatrix m;
    for (std::size_t u = 0; u < units; ++u)
        for (std::size_t c = 0; c < coders; ++c)
            m.set(std::to_string(u), std::to_string(c), std::to_string(rng.below(9)));
    return m;
}

void BM_Alpha(benchmark::State& state) {
    const auto m = matrix(static_cast<std::size_t>(state.range(0)), 3);
    for (auto _ : state) benchmark::DoNotOptimize(forge::krippendorff_alpha(m));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Alpha)->Arg(100)->Arg(1000)->Arg(10000);

void BM_MajorityVote(benchmark::State& state) {
    forge::Rng rng(4);
    std::vector<forge::LabelRecord> recs;
    for (std::int64_t p = 0; p < state.range(0); ++p)
        for (const char* a : {"a", "b", "c"})
            recs.push_back({std::to_string(p), a, forge::kAllClasses[rng.below(8)], 0});
    for (auto _ : state) benchmark::DoNotOptimize(forge::majority_vote(recs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MajorityVote)->Arg(800)->Arg(10000);

}  // namespace
