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

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <vector>

#include "forge/error.hpp"
#include "forge/eval.hpp"
#include "forge/pair.hpp"

namespace forge {

// What an annotator gets to see: no auto labels, no provenance.
struct BlindPair {
    std::string id;
    std::string image_ref;
    std::string text;

    friend bool operator==(const BlindPair&, const BlindPair&) = default;
};

BlindPair blind_view(const ImageTextPair& p);

class UnknownAnnotatorError : public Error {
public:
    explicit UnknownAnnotatorError(const std::string& id) : Error("unknown annotator '" + id + "'") {}
};

class UnknownPairError : public Error {
public:
    explicit UnknownPairError(const std::string& id) : Error("unknown pair '" + id + "'") {}
};

class InvalidLabelError : public Error {
public:
    explicit InvalidLabelError(const std::string& label);
};

// One log line: {"pair_id", "annotator", "label", "timestamp"}.
std::string label_record_json(const LabelRecord& r);
LabelRecord label_record_from_json(std::string_view line, const std::string& file = "<string>",
                                   std::size_t line_no = 0);

// Append-only JSONL log with one writer. Each append is a single write of a
// full line followed by fsync.
class LabelLog {
public:
    explicit LabelLog(std::filesystem::path path);
    ~LabelLog();
    LabelLog(const LabelLog&) = delete;
    LabelLog& operator=(const LabelLog&) = delete;

    // Reads existing records. A last line that is incomplete (no newline and
    // not parseable) is treated as a torn write: it is cut off the file and
    // reported through torn_bytes(). Any other malformed line throws
    // ParseError.
    std::vector<LabelRecord> replay();

    void append(const LabelRecord& r);

    std::size_t torn_bytes() const { return torn_bytes_; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
    int fd_ = -1;
    std::size_t torn_bytes_ = 0;
};

// Records, then resolved and excluded pairs (by pair id) as JSONL:
//   {"type":"label","pair_id":..,"annotator":..,"label":..,"timestamp":..}
//   {"type":"resolved","pair_id":..,"label":..,"votes":n}
//   {"type":"excluded","pair_id":..,"reason":..,"votes":n}
// Votes count effective labels only (latest per pair and annotator).
std::string export_labels_jsonl(const std::vector<LabelRecord>& records);

// Recovers the label records of an export; resolved/excluded lines are
// checked for type but otherwise recomputed on the next export.
std::vector<LabelRecord> import_labels_jsonl(std::string_view jsonl,
                                             const std::string& source = "<string>");

// Latest record per (pair, annotator), ordered by pair id then annotator.
std::vector<LabelRecord> effective_records(const std::vector<LabelRecord>& records);

struct AgreementSnapshot {
    // nullopt with status "insufficient data" when alpha is undefined.
    std::optional<double> alpha;
    std::string status;
    std::size_t pairable_units = 0;  // pairs with >= 2 effective labels
    std::map<std::string, VoteOutcome> votes;
};

// Offline equivalent of the live snapshot, computed from raw records.
AgreementSnapshot agreement_from_records(const std::vector<LabelRecord>& records,
                                         bool unsure_as_category = true);

struct Progress {
    std::size_t total_pairs = 0;
    std::size_t log_length = 0;
    std::map<std::string, std::size_t> labeled;  // annotator -> pairs with an effective label
};

using Clock = std::function<TimestampMs()>;

TimestampMs system_clock_ms();

struct SessionOptions {
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> log_path;  // no persistence when unset
    Clock clock = system_clock_ms;
    bool unsure_as_category = true;
};

// Every pair goes to every annotator. Each annotator sees the pairs in an
// order shuffled with a seed derived from their id. Thread-safe: mutations
// take an exclusive lock, queries a shared one.
class AnnotationSession {
public:
    AnnotationSession(std::vector<ImageTextPair> pairs, std::vector<std::string> annotators,
                      SessionOptions options = {});

    // First pair in this annotator's order without an effective label;
    // nullopt when done. Repeating the call without submitting returns the
    // same pair.
    std::optional<BlindPair> next_pair(const std::string& annotator) const;

    // Appends a record stamped with the session clock; latest wins.
    LabelRecord submit_label(const std::string& annotator, const std::string& pair_id,
                             std::string_view label);

    Progress progress() const;
    AgreementSnapshot agreement_snapshot() const;
    std::vector<LabelRecord> records() const;
    std::string export_labels() const;

    const std::vector<std::string>& annotators() const { return annotator_ids_; }
    std::size_t pair_count() const { return pairs_.size(); }
    // Order in which an annotator is served (pair ids).
    std::vector<std::string> serving_order(const std::string& annotator) const;
    // Bytes dropped from a torn log tail during startup replay.
    std::size_t recovered_torn_bytes() const { return torn_bytes_; }

private:
    struct AnnotatorState {
        std::vector<std::size_t> order;
        std::vector<bool> labeled;  // by pair index
        std::size_t count = 0;
    };

    const AnnotatorState& state_of(const std::string& annotator) const;
    void apply(const LabelRecord& r);

    std::vector<BlindPair> pairs_;
    std::map<std::string, std::size_t> pair_index_;
    std::vector<std::string> annotator_ids_;
    std::map<std::string, AnnotatorState> states_;
    std::vector<LabelRecord> log_;
    SessionOptions options_;
    std::unique_ptr<LabelLog> writer_;
    std::size_t torn_bytes_ = 0;
    mutable std::shared_mutex mutex_;
};

}  // namespace forge
