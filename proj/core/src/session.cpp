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

#include "forge/session.hpp"

#include <fcntl.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <set>

#include "forge/random.hpp"
#include "json_util.hpp"

namespace forge {

namespace {

using detail::ordered_json;

std::string join_names(const std::vector<std::string>& names) {
    std::string out;
    for (const auto& n : names) {
        if (!out.empty()) out += ", ";
        out += n;
    }
    return out;
}

[[noreturn]] void throw_errno(const std::string& what, const std::filesystem::path& p) {
    throw Error(what + " " + p.string() + ": " + std::strerror(errno));
}

LabelRecord record_from(const ordered_json& j, const detail::Where& at) {
    LabelRecord r;
    r.pair_id = detail::require_string(j, "pair_id", at);
    r.annotator_id = detail::require_string(j, "annotator", at);
    const auto label = detail::require_string(j, "label", at);
    const auto parsed = AnnotatorLabel::parse(label);
    if (!parsed) at.fail("invalid label '" + label + "'");
    r.label = *parsed;
    const auto ts = parse_timestamp(detail::require_string(j, "timestamp", at));
    if (!ts) at.fail("timestamp must look like 2026-01-31T12:00:00.000Z");
    r.timestamp = *ts;
    return r;
}

ordered_json record_json(const LabelRecord& r) {
    ordered_json j;
    j["pair_id"] = r.pair_id;
    j["annotator"] = r.annotator_id;
    j["label"] = r.label.name();
    j["timestamp"] = format_timestamp(r.timestamp);
    return j;
}

}  // namespace

BlindPair blind_view(const ImageTextPair& p) { return {p.id, p.image_ref, p.text}; }

InvalidLabelError::InvalidLabelError(const std::string& label)
    : Error("invalid label '" + label + "'; valid labels: " +
            join_names(AnnotatorLabel::valid_names())) {}

std::string label_record_json(const LabelRecord& r) { return record_json(r).dump(); }

LabelRecord label_record_from_json(std::string_view line, const std::string& file,
                                   std::size_t line_no) {
    const detail::Where at{file, line_no};
    ordered_json j;
    try {
        j = ordered_json::parse(line);
    } catch (const ordered_json::parse_error&) {
        at.fail("malformed JSON");
    }
    if (!j.is_object()) at.fail("label record must be an object");
    return record_from(j, at);
}

LabelLog::LabelLog(std::filesystem::path path) : path_(std::move(path)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    fd_ = ::open(path_.c_str(), O_RDWR | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
    if (fd_ < 0) throw_errno("cannot open label log", path_);
}

LabelLog::~LabelLog() {
    if (fd_ >= 0) ::close(fd_);
}

std::vector<LabelRecord> LabelLog::replay() {
    std::string bytes;
    {
        if (::lseek(fd_, 0, SEEK_SET) < 0) throw_errno("cannot seek", path_);
        char buf[1 << 16];
        for (;;) {
            const auto n = ::read(fd_, buf, sizeof buf);
            if (n < 0) throw_errno("cannot read", path_);
            if (n == 0) break;
            bytes.append(buf, static_cast<std::size_t>(n));
        }
    }

    std::vector<LabelRecord> out;
    const std::string file = path_.string();
    std::size_t pos = 0, line_no = 0;
    while (pos < bytes.size()) {
        const auto nl = bytes.find('\n', pos);
        ++line_no;
        const bool complete = nl != std::string::npos;
        const std::string_view line(bytes.data() + pos, (complete ? nl : bytes.size()) - pos);
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
            pos = complete ? nl + 1 : bytes.size();
            continue;
        }
        if (!complete) {
            try {
                out.push_back(label_record_from_json(line, file, line_no));
                // A whole record missing only its newline: restore it.
                if (::write(fd_, "\n", 1) != 1) throw_errno("cannot repair", path_);
            } catch (const ParseError&) {
                torn_bytes_ = line.size();
                if (::ftruncate(fd_, static_cast<off_t>(pos)) != 0) throw_errno("cannot truncate", path_);
            }
            break;
        }
        out.push_back(label_record_from_json(line, file, line_no));
        pos = nl + 1;
    }
    return out;
}

void LabelLog::append(const LabelRecord& r) {
    const std::string line = label_record_json(r) + "\n";
    const char* p = line.data();
    std::size_t left = line.size();
    while (left > 0) {
        const auto n = ::write(fd_, p, left);
        if (n < 0) {
            if (errno == EINTR) continue;
            throw_errno("cannot append to", path_);
        }
        p += n;
        left -= static_cast<std::size_t>(n);
    }
    if (::fsync(fd_) != 0) throw_errno("cannot sync", path_);
}

std::vector<LabelRecord> effective_records(const std::vector<LabelRecord>& records) {
    std::map<std::pair<std::string, std::string>, const LabelRecord*> latest;
    for (const auto& r : records) latest[{r.pair_id, r.annotator_id}] = &r;
    std::vector<LabelRecord> out;
    out.reserve(latest.size());
    for (const auto& [key, r] : latest) out.push_back(*r);
    return out;
}

std::string export_labels_jsonl(const std::vector<LabelRecord>& records) {
    std::string out;
    for (const auto& r : records) {
        ordered_json j;
        j["type"] = "label";
        const auto rec = record_json(r);
        for (const auto& [k, v] : rec.items()) j[k] = v;
        out += j.dump();
        out += '\n';
    }
    const auto votes = majority_vote(effective_records(records));
    for (const auto& [pair, v] : votes) {
        if (!v.resolved()) continue;
        ordered_json j;
        j["type"] = "resolved";
        j["pair_id"] = pair;
        j["label"] = std::string(class_name(*v.cls));
        j["votes"] = v.votes;
        out += j.dump();
        out += '\n';
    }
    for (const auto& [pair, v] : votes) {
        if (v.resolved()) continue;
        ordered_json j;
        j["type"] = "excluded";
        j["pair_id"] = pair;
        j["reason"] = std::string(exclusion_name(*v.excluded));
        j["votes"] = v.votes;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<LabelRecord> import_labels_jsonl(std::string_view jsonl, const std::string& source) {
    std::vector<LabelRecord> out;
    std::size_t pos = 0, line_no = 0;
    while (pos < jsonl.size()) {
        auto nl = jsonl.find('\n', pos);
        if (nl == std::string_view::npos) nl = jsonl.size();
        const auto line = jsonl.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;
        const detail::Where at{source, line_no};
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error&) {
            at.fail("malformed JSON");
        }
        if (!j.is_object()) at.fail("export line must be an object");
        const auto type = detail::require_string(j, "type", at);
        if (type == "label") {
            out.push_back(record_from(j, at));
        } else if (type != "resolved" && type != "excluded") {
            at.fail("unknown line type '" + type + "'");
        }
    }
    return out;
}

AgreementSnapshot agreement_from_records(const std::vector<LabelRecord>& records,
                                         bool unsure_as_category) {
    AgreementSnapshot s;
    const auto matrix = reliability_from_records(records, unsure_as_category);
    for (const auto& [unit, coders] : matrix.units) s.pairable_units += coders.size() >= 2;
    try {
        s.alpha = krippendorff_alpha(matrix);
        s.status = "ok";
    } catch (const AgreementError&) {
        s.status = "insufficient data";
    }
    s.votes = majority_vote(effective_records(records));
    return s;
}

TimestampMs system_clock_ms() {
    using namespace std::chrono;
    return duration_cast<milliseconds>(system_clock::now().time_since_epoch()).count();
}

AnnotationSession::AnnotationSession(std::vector<ImageTextPair> pairs,
                                     std::vector<std::string> annotators, SessionOptions options)
    : options_(std::move(options)) {
    pairs_.reserve(pairs.size());
    for (const auto& p : pairs) {
        if (!pair_index_.emplace(p.id, pairs_.size()).second) {
            throw Error("duplicate pair id '" + p.id + "' in session corpus");
        }
        pairs_.push_back(blind_view(p));
    }
    if (annotators.empty()) throw Error("a session needs at least one annotator");
    for (auto& a : annotators) {
        if (a.empty()) throw Error("annotator ids must be non-empty");
        if (states_.count(a)) throw Error("duplicate annotator '" + a + "'");
        AnnotatorState st;
        st.order.resize(pairs_.size());
        for (std::size_t i = 0; i < st.order.size(); ++i) st.order[i] = i;
        Rng rng(derive_seed(options_.seed, "annotator-order:" + a));
        rng.shuffle(st.order);
        st.labeled.assign(pairs_.size(), false);
        states_.emplace(a, std::move(st));
        annotator_ids_.push_back(std::move(a));
    }
    if (!options_.clock) options_.clock = system_clock_ms;

    if (options_.log_path) {
        writer_ = std::make_unique<LabelLog>(*options_.log_path);
        for (const auto& r : writer_->replay()) {
            if (!pair_index_.count(r.pair_id) || !states_.count(r.annotator_id)) {
                throw ParseError(options_.log_path->string(), 0,
                                 "log refers to pair '" + r.pair_id + "' / annotator '" +
                                     r.annotator_id + "' outside this session");
            }
            apply(r);
        }
        torn_bytes_ = writer_->torn_bytes();
    }
}

const AnnotationSession::AnnotatorState& AnnotationSession::state_of(
    const std::string& annotator) const {
    const auto it = states_.find(annotator);
    if (it == states_.end()) throw UnknownAnnotatorError(annotator);
    return it->second;
}

void AnnotationSession::apply(const LabelRecord& r) {
    auto& st = states_.at(r.annotator_id);
    const auto idx = pair_index_.at(r.pair_id);
    if (!st.labeled[idx]) {
        st.labeled[idx] = true;
        ++st.count;
    }
    log_.push_back(r);
}

std::optional<BlindPair> AnnotationSession::next_pair(const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    const auto& st = state_of(annotator);
    for (std::size_t idx : st.order) {
        if (!st.labeled[idx]) return pairs_[idx];
    }
    return std::nullopt;
}

LabelRecord AnnotationSession::submit_label(const std::string& annotator,
                                            const std::string& pair_id, std::string_view label) {
    const auto parsed = AnnotatorLabel::parse(label);
    if (!parsed) throw InvalidLabelError(std::string(label));
    std::unique_lock lock(mutex_);
    state_of(annotator);
    if (!pair_index_.count(pair_id)) throw UnknownPairError(pair_id);
    LabelRecord r{pair_id, annotator, *parsed, options_.clock()};
    if (writer_) writer_->append(r);
    apply(r);
    return r;
}

Progress AnnotationSession::progress() const {
    std::shared_lock lock(mutex_);
    Progress p;
    p.total_pairs = pairs_.size();
    p.log_length = log_.size();
    for (const auto& [id, st] : states_) p.labeled[id] = st.count;
    return p;
}

AgreementSnapshot AnnotationSession::agreement_snapshot() const {
    return agreement_from_records(records(), options_.unsure_as_category);
}

std::vector<LabelRecord> AnnotationSession::records() const {
    std::shared_lock lock(mutex_);
    return log_;
}

std::string AnnotationSession::export_labels() const { return export_labels_jsonl(records()); }

std::vector<std::string> AnnotationSession::serving_order(const std::string& annotator) const {
    std::shared_lock lock(mutex_);
    std::vector<std::string> out;
    for (std::size_t idx : state_of(annotator).order) out.push_back(pairs_[idx].id);
    return out;
}

}  // namespace forge
