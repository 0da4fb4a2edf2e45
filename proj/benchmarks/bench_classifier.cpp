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

#include "forge/classifier.hpp"
#include "forge/random.hpp"

namespace {

const forge::FeatureExtractor& extractor() {
    static const forge::FeatureExtractor fx(
        forge::FeatureSchema{}, forge::load_lexicon(std::string(FORGE_DATA_DIR) + "/antonyms.tsv"));
    return fx;
}

forge::ImageTextPair sample_pair() {
    return forge::make_pair("p", "img.jpg",
                            "A tall man standing in front of a green car. The man looks tired. "
                            "Later that week the car was clean and everyone talked about the trip.",
                            {"tall", "man", "green", "car"},
                            forge::triple_of_class(forge::ImageTextClass::Anchorage), {});
}

void BM_ExtractFeatures(benchmark::State& state) {
    const auto p = sample_pair();
    for (auto _ : state) benchmark::DoNotOptimize(extractor().extract(p));
}
BENCHMARK(BM_ExtractFeatures);

forge::BaselineModel random_model(forge::Head h, std::size_t hidden) {
    forge::BaselineModel m(h, extractor().schema().dimension(), hidden);
    forge::Rng rng(2);
    for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2})
        for (auto& x : *v) x = rng.unit() * 0.1 - 0.05;
    return m;
}

void BM_PredictClassic(benchmark::State& state) {
    const auto m = random_model(forge::Head::Classic, 128);
    const auto f = extractor().extract(sample_pair());
    for (auto _ : state) benchmark::DoNotOptimize(forge::classic_predict(m, f));
}
BENCHMARK(BM_PredictClassic);

void BM_PredictCascade(benchmark::State& state) {
    const auto cmi = random_model(forge::Head::Cmi, 128);
    const auto sc = random_model(forge::Head::Sc, 128);
    const auto stat = random_model(forge::Head::Stat, 128);
    const auto f = extractor().extract(sample_pair());
    for (auto _ : state) benchmark::DoNotOptimize(forge::cascade_predict(cmi, sc, stat, f));
}
BENCHMARK(BM_PredictCascade);

void BM_TrainEpoch(benchmark::State& state) {
    forge::Rng rng(5);
    std::vector<forge::Sample> data(static_cast<std::size_t>(state.range(0)));
    for (auto& s : data) {
        s.x.resize(256);
        for (auto& v : s.x) v = rng.unit();
        s.label = rng.below(8);
    }
    forge::TrainConfig cfg;
    cfg.epochs = 1;
    cfg.hidden_dim = 64;
    for (auto _ : state) benchmark::DoNotOptimize(forge::train(data, forge::Head::Classic, cfg));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_TrainEpoch)->Arg(400);

}  // namespace
