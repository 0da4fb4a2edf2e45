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

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "forge/augment.hpp"
#include "forge/error.hpp"
#include "forge/pair.hpp"
#include "forge/taxonomy.hpp"

namespace forge {

// Output head of a predictor: one per metric for the cascade, or all eight
// classes at once for the classic scheme.
enum class Head : std::uint8_t { Cmi, Sc, Stat, Classic };

std::size_t head_arity(Head h);     // 2, 3, 3, 8
std::string_view head_name(Head h);  // "CMI", "SC", "STAT", "Classic"
std::optional<Head> parse_head(std::string_view name);  // case-insensitive

// Training label of a pair for a head (level index or class index).
// Throws std::invalid_argument for an Undefined pair.
std::size_t head_label(Head h, const ImageTextPair& p);

using FeatureVector = std::vector<double>;

inline constexpr std::size_t kScalarFeatures = 6;

struct FeatureSchema {
    std::size_t hashed_text_dims = 1024;
    std::size_t hashed_tag_dims = 256;

    std::size_t dimension() const { return hashed_text_dims + hashed_tag_dims + kScalarFeatures; }
};

// Offsets of the scalar block (after the two hashed blocks).
enum class ScalarFeature : std::size_t {
    OverlapRatio,
    LexiconKeywordHits,
    LexiconReplacementHits,
    SentenceCount,
    MeanSentenceLength,
    TagCount,
};

// Deterministic lexical stand-in for the image and text encoders:
//   [hashed text bag (L2-normalized) | hashed tag bag (L2-normalized) | scalars]
// Count-valued scalars enter as log1p(count).
class FeatureExtractor {
public:
    FeatureExtractor(FeatureSchema schema, AntonymLexicon lexicon);

    FeatureVector extract(const ImageTextPair& pair) const;

    const FeatureSchema& schema() const { return schema_; }
    // Identifies dimensions, feature layout and lexicon; stored in models.
    std::uint64_t schema_hash() const { return schema_hash_; }

    std::size_t scalar_offset(ScalarFeature f) const {
        return schema_.hashed_text_dims + schema_.hashed_tag_dims + static_cast<std::size_t>(f);
    }

private:
    FeatureSchema schema_;
    AntonymLexicon lexicon_;
    AntonymLexicon reverse_;
    std::uint64_t schema_hash_;
};

FeatureVector extract_features(const ImageTextPair& pair, const FeatureSchema& schema,
                               const AntonymLexicon& lex);

// |text tokens ∩ tags| / max(1, |tags|); a multiword tag counts when all of
// its words occur in the text.
double overlap_ratio(std::string_view text, const std::vector<std::string>& tags);

// Bucket of a token in a hashed block.
std::size_t hash_bucket(std::string_view token, std::size_t dims);

// Train/test assignment from the pair id and seed alone, so membership does
// not depend on corpus order.
bool in_test_split(std::string_view id, double test_fraction, std::uint64_t seed);

struct Sample {
    FeatureVector x;
    std::size_t label = 0;
};

struct TrainingInfo {
    std::uint64_t seed = 0;
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double learning_rate = 0.0;
    double final_loss = 0.0;
    bool balanced = false;

    friend bool operator==(const TrainingInfo&, const TrainingInfo&) = default;
};

// affine -> ReLU -> affine -> softmax. Weights row-major:
// w1 is [hidden x input], w2 is [outputs x hidden].
struct BaselineModel {
    Head head = Head::Classic;
    std::size_t input_dim = 0;
    std::size_t hidden_dim = 0;
    std::size_t outputs = 0;
    std::vector<double> w1, b1, w2, b2;
    std::uint64_t schema_hash = 0;
    TrainingInfo training;

    // Zero-initialized parameters.
    BaselineModel(Head h, std::size_t input, std::size_t hidden);
    BaselineModel() = default;

    std::size_t parameter_count() const { return w1.size() + b1.size() + w2.size() + b2.size(); }

    friend bool operator==(const BaselineModel&, const BaselineModel&) = default;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class TrainingError : public Error {
public:
    using Error::Error;
};

std::vector<double> logits(const BaselineModel& m, std::span<const double> x);

// Stable softmax of the logits. Throws DimensionError on a size mismatch.
std::vector<double> predict_proba(const BaselineModel& m, std::span<const double> x);

std::vector<double> softmax(std::span<const double> z);

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> v);

// Parameter-shaped buffer (same layout as the model).
struct Gradients {
    std::vector<double> w1, b1, w2, b2;
};

// Mean (optionally class-weighted) cross entropy over the samples; fills
// grad when non-null. class_weights may be empty (all ones).
double loss_and_gradient(const BaselineModel& m, std::span<const Sample> samples,
                         Gradients* grad, std::span<const double> class_weights = {});

struct TrainConfig {
    std::size_t epochs = 50;
    double learning_rate = 1e-3;
    std::size_t batch_size = 12;
    std::size_t hidden_dim = 128;
    std::uint64_t seed = 0;
    // Inverse-frequency sample weights in the loss.
    bool balance_classes = false;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

struct TrainResult {
    BaselineModel model;
    std::vector<double> loss_trace;  // mean loss per epoch
};

// Minibatch Adam on softmax cross entropy. Throws Error on an empty dataset
// or out-of-range label, TrainingError on a non-finite loss.
TrainResult train(std::span<const Sample> data, Head head, const TrainConfig& config,
                  std::uint64_t schema_hash = 0);

// Argmax over the eight classes; never Undefined. Throws std::invalid_argument
// for a non-classic head.
RelationClass classic_predict(const BaselineModel& model, std::span<const double> f);

// Per-head argmax assembled into a triple. `order` only sets the evaluation
// sequence; it must be a permutation of {Cmi, Sc, Stat}.
MetricTriple cascade_triple(const BaselineModel& cmi, const BaselineModel& sc,
                            const BaselineModel& stat, std::span<const double> f,
                            std::array<Head, 3> order = {Head::Cmi, Head::Sc, Head::Stat});

// cascade_triple followed by classify_triple; may return Undefined.
RelationClass cascade_predict(const BaselineModel& cmi, const BaselineModel& sc,
                              const BaselineModel& stat, std::span<const double> f,
                              std::array<Head, 3> order = {Head::Cmi, Head::Sc, Head::Stat});

std::string model_to_json(const BaselineModel& m);
// Throws ParseError on malformed input or when expected_schema_hash is set
// and differs from the stored hash.
BaselineModel model_from_json(std::string_view json,
                              std::optional<std::uint64_t> expected_schema_hash = std::nullopt,
                              const std::string& source = "<string>");

void save_model(const BaselineModel& m, const std::filesystem::path& path);
BaselineModel load_model(const std::filesystem::path& path,
                         std::optional<std::uint64_t> expected_schema_hash = std::nullopt);

}  // namespace forge
