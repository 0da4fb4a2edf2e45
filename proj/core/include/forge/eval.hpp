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
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/taxonomy.hpp"

namespace forge {

struct CorpusManifest;

// What a human annotator may answer: one of the eight classes or Unsure.
// Undefined is never an annotator option.
class AnnotatorLabel {
public:
    constexpr AnnotatorLabel(ImageTextClass c) : cls_(c), unsure_(false) {}

    static constexpr AnnotatorLabel unsure() { return AnnotatorLabel(); }

    bool is_unsure() const { return unsure_; }
    // Throws std::logic_error for Unsure.
    ImageTextClass cls() const;

    std::string name() const;

    // Canonical class names or "Unsure". Anything else (including
    // "Undefined") yields nullopt.
    static std::optional<AnnotatorLabel> parse(std::string_view name);

    // The nine names accepted by parse, in canonical order with Unsure last.
    static std::vector<std::string> valid_names();

    friend bool operator==(const AnnotatorLabel& a, const AnnotatorLabel& b) {
        return a.unsure_ == b.unsure_ && (a.unsure_ || a.cls_ == b.cls_);
    }

private:
    constexpr AnnotatorLabel() : cls_(ImageTextClass::Uncorrelated), unsure_(true) {}

    ImageTextClass cls_;
    bool unsure_;
};

inline constexpr std::string_view kUnsureName = "Unsure";

// Milliseconds since the Unix epoch, UTC.
using TimestampMs = std::int64_t;

// "2026-10-17T04:19:00.123Z"
std::string format_timestamp(TimestampMs ms);
// Accepts exactly the format produced by format_timestamp.
std::optional<TimestampMs> parse_timestamp(std::string_view s);

struct LabelRecord {
    std::string pair_id;
    std::string annotator_id;
    AnnotatorLabel label = AnnotatorLabel::unsure();
    TimestampMs timestamp = 0;

    friend bool operator==(const LabelRecord&, const LabelRecord&) = default;
};

// Nominal ratings: unit -> coder -> category.
struct ReliabilityMatrix {
    std::map<std::string, std::map<std::string, std::string>> units;

    void set(const std::string& unit, const std::string& coder, std::string category) {
        units[unit][coder] = std::move(category);
    }
};

class AgreementError : public Error {
public:
    using Error::Error;
};

// Nominal Krippendorff's alpha from the coincidence matrix. Units with a
// single rating are not pairable and contribute nothing. Throws
// AgreementError when no unit has two ratings or only one category occurs.
double krippendorff_alpha(const ReliabilityMatrix& m);

// One rating per (pair, annotator); a later record in the list replaces an
// earlier one. Unsure is either its own category or dropped.
ReliabilityMatrix reliability_from_records(const std::vector<LabelRecord>& records,
                                           bool unsure_as_category = true);

enum class Exclusion : std::uint8_t { UnsureMajority, NoMajority };

std::string_view exclusion_name(Exclusion e);  // "unsure-majority", "no-majority"

struct VoteOutcome {
    std::optional<ImageTextClass> cls;   // set when resolved
    std::optional<Exclusion> excluded;   // set otherwise
    std::size_t votes = 0;

    bool resolved() const { return cls.has_value(); }
};

// Every record is one vote. A class with more than half of a pair's votes
// wins; an Unsure majority or no strict majority excludes the pair.
std::map<std::string, VoteOutcome> majority_vote(const std::vector<LabelRecord>& records);

// Truth rows 0..7 (row 8 is never used), prediction columns 0..7 plus
// Undefined in column 8.
inline constexpr std::size_t kConfusionSize = kClassCount + 1;
using ConfusionMatrix = std::array<std::array<std::size_t, kConfusionSize>, kConfusionSize>;

struct EvalReport {
    ConfusionMatrix confusion{};
    // nullopt where the denominator is zero.
    std::array<std::optional<double>, kClassCount> precision{};
    std::array<std::optional<double>, kClassCount> recall{};
    std::array<std::size_t, kClassCount> support{};
    std::size_t total = 0;
    std::size_t undefined_predictions = 0;
    std::optional<double> accuracy;
};

// Derives precision/recall/accuracy from a filled confusion matrix.
EvalReport report_from_confusion(const ConfusionMatrix& confusion);

// Throws Error listing the ids of predicted pairs that have no truth label.
// Truth entries without a prediction are ignored.
EvalReport classification_report(const std::map<std::string, RelationClass>& predictions,
                                  const std::map<std::string, ImageTextClass>& truth);

// Automatic labels scored as predictions against human labels over the
// shared ids. Throws Error when the id sets do not intersect.
EvalReport augmentation_quality_report(const std::map<std::string, ImageTextClass>& automatic,
                                       const std::map<std::string, ImageTextClass>& human);

struct MetricCounts {
    std::array<std::size_t, kCmiLevels> cmi{};
    std::array<std::size_t, kScLevels> sc{};
    std::array<std::size_t, kStatLevels> stat{};

    friend bool operator==(const MetricCounts&, const MetricCounts&) = default;
};

struct ConsistencyReport {
    std::array<std::size_t, kClassCount> class_counts{};
    MetricCounts counts;
    std::size_t total = 0;
    // Ids (or descriptions) of pairs whose label is Undefined.
    std::vector<std::string> mismatches;
    // Sum of classes == sum over each metric dimension == total.
    bool totals_consistent = true;
};

// Aggregates class counts into per-metric counts through the class triples.
ConsistencyReport consistency_from_class_counts(const std::array<std::size_t, kClassCount>& counts);
ConsistencyReport corpus_consistency_report(const CorpusManifest& manifest);

// Row labels in the metric table: "STAT T", "STAT 0", "STAT I", "SC -1",
// "SC 0", "SC 1", "CMI 0", "CMI 1".
std::vector<std::pair<std::string, std::size_t>> metric_rows(const MetricCounts& c);

// Difference between computed metric counts and a reference table.
struct MetricDiscrepancy {
    std::string dimension;           // "CMI", "SC" or "STAT"
    std::vector<std::string> rows;   // mismatching row labels
    // Non-empty when the reference values are a permutation of the computed
    // ones: pairs of row labels whose values are exchanged in the reference.
    std::vector<std::pair<std::string, std::string>> swapped;
};

std::vector<MetricDiscrepancy> compare_metric_counts(
    const MetricCounts& computed, const std::map<std::string, std::size_t>& reference);

// Reference tables are JSON objects keyed by the metric row labels.
std::map<std::string, std::size_t> parse_metric_reference(std::string_view json);

std::string metric_counts_json(const MetricCounts& c);
std::string format_metric_table(const MetricCounts& c);

// Confusion matrix with per-class precision and recall rows.
std::string format_report_table(const EvalReport& r);
// Recall / Precision / #Samples rows per class.
std::string format_quality_table(const EvalReport& r);
std::string report_json(const EvalReport& r);

}  // namespace forge
