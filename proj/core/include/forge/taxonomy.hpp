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
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

// Cross-modal mutual information, binarized: no overlap / overlap.
enum class CmiLevel : std::uint8_t { Zero, One };

// Semantic correlation: -1, 0, +1.
enum class ScLevel : std::uint8_t { Neg, Zero, Pos };

// Status relation. T: image subordinate to text. I: text subordinate to image.
enum class StatLevel : std::uint8_t { T, Equal, I };

struct MetricTriple {
    CmiLevel cmi = CmiLevel::Zero;
    ScLevel sc = ScLevel::Zero;
    StatLevel stat = StatLevel::Equal;

    friend bool operator==(const MetricTriple&, const MetricTriple&) = default;
};

inline constexpr std::size_t kCmiLevels = 2;
inline constexpr std::size_t kScLevels = 3;
inline constexpr std::size_t kStatLevels = 3;
inline constexpr std::size_t kTripleCount = kCmiLevels * kScLevels * kStatLevels;

// The eight valid image-text classes, in canonical table order. The numeric
// value is the class index used by classifiers and confusion matrices.
enum class ImageTextClass : std::uint8_t {
    Uncorrelated,
    Interdependent,
    Complementary,
    Illustration,
    Anchorage,
    Contrasting,
    BadIllustration,
    BadAnchorage,
};

inline constexpr std::size_t kClassCount = 8;

inline constexpr std::array<ImageTextClass, kClassCount> kAllClasses = {
    ImageTextClass::Uncorrelated,   ImageTextClass::Interdependent,
    ImageTextClass::Complementary,  ImageTextClass::Illustration,
    ImageTextClass::Anchorage,      ImageTextClass::Contrasting,
    ImageTextClass::BadIllustration, ImageTextClass::BadAnchorage,
};

// Why a triple is (in)valid. The four cases cover the ten discarded
// combinations of the 18-point metric space.
enum class Validity : std::uint8_t { Valid, CaseA, CaseB, CaseC, CaseD };

// One of the eight classes, or Undefined carrying the case that rejected it.
class RelationClass {
public:
    // Index of the Undefined column in 9-wide confusion matrices.
    static constexpr std::size_t kUndefinedIndex = kClassCount;

    constexpr RelationClass(ImageTextClass c) : cls_(c), reason_(Validity::Valid) {}

    // Throws std::invalid_argument if reason is Valid.
    static RelationClass undefined(Validity reason);

    bool is_undefined() const { return reason_ != Validity::Valid; }

    // Throws std::logic_error on Undefined.
    ImageTextClass cls() const;

    // Valid for defined classes, the rejecting case otherwise.
    Validity reason() const { return reason_; }

    // 0..7 for the classes, kUndefinedIndex for Undefined.
    std::size_t index() const;

    friend bool operator==(const RelationClass& a, const RelationClass& b) {
        if (a.is_undefined() || b.is_undefined()) return a.reason_ == b.reason_;
        return a.cls_ == b.cls_;
    }

private:
    constexpr RelationClass(Validity reason)
        : cls_(ImageTextClass::Uncorrelated), reason_(reason) {}

    ImageTextClass cls_;
    Validity reason_;
};

Validity validity_reason(const MetricTriple& t);

// Total on the 18-point space.
RelationClass classify_triple(const MetricTriple& t);

// Throws std::invalid_argument for Undefined.
MetricTriple triple_of_class(const RelationClass& c);
MetricTriple triple_of_class(ImageTextClass c);

// All 18 triples ordered by (cmi, sc, stat) level index.
std::array<MetricTriple, kTripleCount> enumerate_triples();

// Level <-> index in canonical order (0<1, -1<0<1, T<0<I).
std::size_t level_index(CmiLevel v);
std::size_t level_index(ScLevel v);
std::size_t level_index(StatLevel v);
CmiLevel cmi_from_index(std::size_t i);
ScLevel sc_from_index(std::size_t i);
StatLevel stat_from_index(std::size_t i);

// Canonical names: "Uncorrelated", ..., "Bad Illustration", "Bad Anchorage", "Undefined".
std::string_view class_name(ImageTextClass c);
std::string class_name(const RelationClass& c);
std::string_view validity_name(Validity v);  // "Valid", "Case A", ...

// Accepts the canonical names only. "Undefined" parses to nullopt; use
// parse_relation_class when Undefined is an allowed value.
std::optional<ImageTextClass> parse_class(std::string_view name);
std::optional<RelationClass> parse_relation_class(std::string_view name,
                                                  std::optional<Validity> reason = std::nullopt);

// Serialization values: cmi 0/1, sc -1/0/1, stat "T"/"0"/"I".
int cmi_value(CmiLevel v);
int sc_value(ScLevel v);
std::string_view stat_value(StatLevel v);
std::optional<CmiLevel> parse_cmi(int v);
std::optional<ScLevel> parse_sc(int v);
std::optional<StatLevel> parse_stat(std::string_view v);

std::string to_string(const MetricTriple& t);  // "(1, -1, 0)"

}  // namespace forge
