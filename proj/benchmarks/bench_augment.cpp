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

#include "forge/augment.hpp"
#include "forge/random.hpp"

namespace {

const forge::AntonymLexicon& lexicon() {
    static const auto lex = forge::load_lexicon(std::string(FORGE_DATA_DIR) + "/antonyms.tsv");
    return lex;
}

std::string sample_text(std::size_t words) {
    static const char* vocab[] = {"the", "tall", "man", "standing", "in front of", "a", "green", "car",
                                  "near", "photo", "with", "old", "house", "dog"};
    forge::Rng rng(1);
    std::string s;
    for (std::size_t i = 0; i < words; ++i) {
        s += vocab[rng.below(std::size(vocab))];
        s += i % 12 == 11 ? ". " : " ";
    }
    return s;
}

void BM_Substitute(benchmark::State& state) {
    const auto text = sample_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forge::substitute_antonyms(text, lexicon()));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_Substitute)->Arg(16)->Arg(256)->Arg(4096);

void BM_CountHits(benchmark::State& state) {
    const auto text = sample_text(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(forge::count_keyword_hits(text, lexicon()));
    state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * text.size()));
}
BENCHMARK(BM_CountHits)->Arg(256)->Arg(4096);

}  // namespace
