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

#include "forge/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "forge/corpus.hpp"
#include "json_util.hpp"

namespace forge {

namespace {

using detail::ordered_json;

// Days since 1970-01-01 -> civil date (proleptic Gregorian).
void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const auto doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp < 10 ? mp + 3 : mp - 9;
    if (m <= 2) ++y;
}

std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const auto yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153 * (m > 2 ? m - 3 : m + 9) + 2) / 5 + d - 1;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    return a / b - ((a % b != 0) && ((a < 0) != (b < 0)));
}

std::string pct(const std::optional<double>& v) {
    if (!v) return "-";
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << (*v * 100.0) << "%";
    return os.str();
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

std::string pad_right(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

constexpr std::array<std::string_view, kClassCount> kShortNames = {
    "Uncorr.", "Interd.", "Compl.", "Illus.", "Anchor.", "Contr.", "Bad Illus.", "Bad Anch.",
};

}  // namespace

ImageTextClass AnnotatorLabel::cls() const {
    if (unsure_) throw std::logic_error("label is Unsure");
    return cls_;
}

std::string AnnotatorLabel::name() const {
    return unsure_ ? std::string(kUnsureName) : std::string(class_name(cls_));
}

std::optional<AnnotatorLabel> AnnotatorLabel::parse(std::string_view name) {
    if (name == kUnsureName) return unsure();
    if (auto c = parse_class(name)) return AnnotatorLabel(*c);
    return std::nullopt;
}

std::vector<std::string> AnnotatorLabel::valid_names() {
    std::vector<std::string> out;
    for (auto c : kAllClasses) out.emplace_back(class_name(c));
    out.emplace_back(kUnsureName);
    return out;
}

std::string format_timestamp(TimestampMs ms) {
    const std::int64_t days = floor_div(ms, 86400000);
    std::int64_t rem = ms - days * 86400000;
    std::int64_t y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    const auto h = rem / 3600000;
    rem %= 3600000;
    const auto mi = rem / 60000;
    rem %= 60000;
    const auto s = rem / 1000;
    const auto milli = rem % 1000;
    char buf[96];
    std::snprintf(buf, sizeof buf, "%04lld-%02u-%02uT%02lld:%02lld:%02lld.%03lldZ",
                  static_cast<long long>(y), mo, d, static_cast<long long>(h),
                  static_cast<long long>(mi), static_cast<long long>(s),
                  static_cast<long long>(milli));
    return buf;
}

std::optional<TimestampMs> parse_timestamp(std::string_view s) {
    // YYYY-MM-DDTHH:MM:SS.mmmZ
    if (s.size() != 24 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
        s[16] != ':' || s[19] != '.' || s[23] != 'Z') {
        return std::nullopt;
    }
    auto num = [&](std::size_t pos, std::size_t len) -> std::optional<std::int64_t> {
        std::int64_t v = 0;
        for (std::size_t i = pos; i < pos + len; ++i) {
            if (s[i] < '0' || s[i] > '9') return std::nullopt;
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto y = num(0, 4), mo = num(5, 2), d = num(8, 2), h = num(11, 2), mi = num(14, 2),
         sec = num(17, 2), ms = num(20, 3);
    if (!y || !mo || !d || !h || !mi || !sec || !ms) return std::nullopt;
    if (*mo < 1 || *mo > 12 || *d < 1 || *d > 31 || *h > 23 || *mi > 59 || *sec > 60) {
        return std::nullopt;
    }
    const auto days = days_from_civil(*y, static_cast<unsigned>(*mo), static_cast<unsigned>(*d));
    return ((days * 24 + *h) * 60 + *mi) * 60000 + *sec * 1000 + *ms;
}

double krippendorff_alpha(const ReliabilityMatrix& m) {
    std::map<std::string, std::size_t> category_index;
    for (const auto& [unit, ratings] : m.units) {
        if (ratings.size() < 2) continue;
        for (const auto& [coder, value] : ratings) category_index.emplace(value, 0);
    }
    if (category_index.empty()) {
        throw AgreementError("agreement undefined: no unit has two or more ratings");
    }
    std::size_t k = 0;
    for (auto& [value, idx] : category_index) idx = k++;

    std::vector<double> o(k * k, 0.0);
    for (const auto& [unit, ratings] : m.units) {
        const std::size_t mu = ratings.size();
        if (mu < 2) continue;
        std::vector<std::size_t> counts(k, 0);
        for (const auto& [coder, value] : ratings) ++counts[category_index.at(value)];
        const double w = 1.0 / static_cast<double>(mu - 1);
        for (std::size_t c = 0; c < k; ++c) {
            if (!counts[c]) continue;
            for (std::size_t d = 0; d < k; ++d) {
                if (!counts[d]) continue;
                // ordered pairs of distinct ratings within the unit
                const double pairs = c == d ? static_cast<double>(counts[c] * (counts[c] - 1))
                                            : static_cast<double>(counts[c] * counts[d]);
                o[c * k + d] += pairs * w;
            }
        }
    }

    std::vector<double> nc(k, 0.0);
    double n = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < k; ++d) nc[c] += o[c * k + d];
        n += nc[c];
    }
    double observed = 0.0, expected = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        for (std::size_t d = 0; d < k; ++d) {
            if (c == d) continue;
            observed += o[c * k + d];
            expected += nc[c] * nc[d];
        }
    }
    const double d_o = observed / n;
    const double d_e = expected / (n * (n - 1.0));
    if (d_e == 0.0) {
        throw AgreementError("agreement undefined: only one category was used");
    }
    return 1.0 - d_o / d_e;
}

ReliabilityMatrix reliability_from_records(const std::vector<LabelRecord>& records,
                                           bool unsure_as_category) {
    std::map<std::pair<std::string, std::string>, const LabelRecord*> effective;
    for (const auto& r : records) effective[{r.pair_id, r.annotator_id}] = &r;
    ReliabilityMatrix m;
    for (const auto& [key, r] : effective) {
        if (r->label.is_unsure() && !unsure_as_category) continue;
        m.set(key.first, key.second, r->label.name());
    }
    return m;
}

std::string_view exclusion_name(Exclusion e) {
    return e == Exclusion::UnsureMajority ? "unsure-majority" : "no-majority";
}

std::map<std::string, VoteOutcome> majority_vote(const std::vector<LabelRecord>& records) {
    // tallies[pair][0..7] classes, [8] Unsure
    std::map<std::string, std::array<std::size_t, kClassCount + 1>> tallies;
    for (const auto& r : records) {
        auto& t = tallies[r.pair_id];
        ++t[r.label.is_unsure() ? kClassCount : static_cast<std::size_t>(r.label.cls())];
    }
    std::map<std::string, VoteOutcome> out;
    for (const auto& [pair, t] : tallies) {
        VoteOutcome v;
        v.votes = std::accumulate(t.begin(), t.end(), std::size_t{0});
        v.excluded = Exclusion::NoMajority;
        for (std::size_t i = 0; i <= kClassCount; ++i) {
            if (2 * t[i] > v.votes) {
                if (i == kClassCount) {
                    v.excluded = Exclusion::UnsureMajority;
                } else {
                    v.cls = kAllClasses[i];
                    v.excluded.reset();
                }
                break;
            }
        }
        out.emplace(pair, v);
    }
    return out;
}

EvalReport report_from_confusion(const ConfusionMatrix& confusion) {
    EvalReport r;
    r.confusion = confusion;
    std::size_t trace = 0;
    for (std::size_t i = 0; i < kClassCount; ++i) {
        std::size_t row = 0, col = 0;
        for (std::size_t j = 0; j < kConfusionSize; ++j) row += confusion[i][j];
        for (std::size_t j = 0; j < kConfusionSize; ++j) col += confusion[j][i];
        const auto diag = static_cast<double>(confusion[i][i]);
        r.support[i] = row;
        if (row) r.recall[i] = diag / static_cast<double>(row);
        if (col) r.precision[i] = diag / static_cast<double>(col);
        r.total += row;
        trace += confusion[i][i];
        r.undefined_predictions += confusion[i][RelationClass::kUndefinedIndex];
    }
    if (r.total) r.accuracy = static_cast<double>(trace) / static_cast<double>(r.total);
    return r;
}

EvalReport classification_report(const std::map<std::string, RelationClass>& predictions,
                                  const std::map<std::string, ImageTextClass>& truth) {
    std::vector<std::string> missing;
    ConfusionMatrix cm{};
    for (const auto& [id, pred] : predictions) {
        auto t = truth.find(id);
        if (t == truth.end()) {
            missing.push_back(id);
            continue;
        }
        ++cm[static_cast<std::size_t>(t->second)][pred.index()];
    }
    if (!missing.empty()) {
        std::string msg = "predictions without truth label:";
        for (std::size_t i = 0; i < missing.size() && i < 20; ++i) msg += " " + missing[i];
        if (missing.size() > 20) msg += " ... (" + std::to_string(missing.size()) + " total)";
        throw Error(msg);
    }
    return report_from_confusion(cm);
}

EvalReport augmentation_quality_report(const std::map<std::string, ImageTextClass>& automatic,
                                       const std::map<std::string, ImageTextClass>& human) {
    std::map<std::string, RelationClass> preds;
    for (const auto& [id, c] : automatic) {
        if (human.count(id)) preds.emplace(id, c);
    }
    if (preds.empty()) throw Error("automatic and human label sets share no pair id");
    return classification_report(preds, human);
}

ConsistencyReport consistency_from_class_counts(
    const std::array<std::size_t, kClassCount>& counts) {
    ConsistencyReport r;
    r.class_counts = counts;
    for (auto c : kAllClasses) {
        const auto n = counts[static_cast<std::size_t>(c)];
        const auto t = triple_of_class(c);
        r.counts.cmi[level_index(t.cmi)] += n;
        r.counts.sc[level_index(t.sc)] += n;
        r.counts.stat[level_index(t.stat)] += n;
        r.total += n;
    }
    auto sum = [](const auto& a) { return std::accumulate(a.begin(), a.end(), std::size_t{0}); };
    r.totals_consistent = sum(r.counts.cmi) == r.total && sum(r.counts.sc) == r.total &&
                          sum(r.counts.stat) == r.total;
    return r;
}

ConsistencyReport corpus_consistency_report(const CorpusManifest& manifest) {
    std::array<std::size_t, kClassCount> counts{};
    std::vector<std::string> mismatches;
    for (const auto& p : manifest.pairs) {
        if (p.auto_class.is_undefined()) {
            mismatches.push_back(p.id + " " + to_string(p.auto_triple) + " " +
                                 std::string(validity_name(p.auto_class.reason())));
            continue;
        }
        if (classify_triple(p.auto_triple) != p.auto_class) {
            mismatches.push_back(p.id + " class disagrees with triple");
            continue;
        }
        ++counts[p.auto_class.index()];
    }
    auto r = consistency_from_class_counts(counts);
    r.mismatches = std::move(mismatches);
    r.total = manifest.pairs.size();
    auto sum = [](const auto& a) { return std::accumulate(a.begin(), a.end(), std::size_t{0}); };
    const std::size_t classified = sum(counts);
    r.totals_consistent = r.totals_consistent && classified + r.mismatches.size() == r.total;
    return r;
}

std::vector<std::pair<std::string, std::size_t>> metric_rows(const MetricCounts& c) {
    return {
        {"STAT T", c.stat[0]}, {"STAT 0", c.stat[1]}, {"STAT I", c.stat[2]},
        {"SC -1", c.sc[0]},    {"SC 0", c.sc[1]},     {"SC 1", c.sc[2]},
        {"CMI 0", c.cmi[0]},   {"CMI 1", c.cmi[1]},
    };
}

std::vector<MetricDiscrepancy> compare_metric_counts(
    const MetricCounts& computed, const std::map<std::string, std::size_t>& reference) {
    const auto rows = metric_rows(computed);
    std::vector<MetricDiscrepancy> out;
    for (const std::string dim : {"STAT", "SC", "CMI"}) {
        std::map<std::string, std::size_t> mine;
        std::vector<std::string> order;
        for (const auto& [label, value] : rows) {
            if (label.rfind(dim + " ", 0) == 0) {
                mine.emplace(label, value);
                order.push_back(label);
            }
        }
        MetricDiscrepancy d;
        d.dimension = dim;
        for (const auto& label : order) {
            auto it = reference.find(label);
            if (it == reference.end() || it->second != mine.at(label)) d.rows.push_back(label);
        }
        if (d.rows.empty()) continue;
        for (std::size_t i = 0; i < d.rows.size(); ++i) {
            for (std::size_t j = i + 1; j < d.rows.size(); ++j) {
                const auto& a = d.rows[i];
                const auto& b = d.rows[j];
                auto ra = reference.find(a), rb = reference.find(b);
                if (ra == reference.end() || rb == reference.end()) continue;
                if (ra->second == mine.at(b) && rb->second == mine.at(a)) d.swapped.emplace_back(a, b);
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::map<std::string, std::size_t> parse_metric_reference(std::string_view json) {
    ordered_json j;
    try {
        j = ordered_json::parse(json);
    } catch (const ordered_json::parse_error& e) {
        throw ParseError("<reference>", 0, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) throw ParseError("<reference>", 0, "reference must be a JSON object");
    static const std::set<std::string> known = {"STAT T", "STAT 0", "STAT I", "SC -1",
                                                "SC 0",   "SC 1",   "CMI 0",  "CMI 1"};
    std::map<std::string, std::size_t> out;
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ParseError("<reference>", 0, "unknown row '" + key + "'");
        if (!value.is_number_unsigned()) {
            throw ParseError("<reference>", 0, "row '" + key + "' must be a count");
        }
        out.emplace(key, value.get<std::size_t>());
    }
    return out;
}

std::string metric_counts_json(const MetricCounts& c) {
    ordered_json j;
    for (const auto& [label, value] : metric_rows(c)) j[label] = value;
    return j.dump();
}

std::string format_metric_table(const MetricCounts& c) {
    std::ostringstream os;
    os << "Metric     # Samples\n";
    for (const auto& [label, value] : metric_rows(c)) {
        os << pad_right(label, 11) << value << "\n";
    }
    return os.str();
}

std::string format_report_table(const EvalReport& r) {
    constexpr std::size_t w = 11;
    std::ostringstream os;
    os << pad_right("Truth\\Pred", w);
    for (auto name : kShortNames) os << pad(std::string(name), w);
    os << pad("Undefined", w) << pad("Sum", w) << "\n";
    for (std::size_t i = 0; i < kClassCount; ++i) {
        os << pad_right(std::string(kShortNames[i]), w);
        for (std::size_t j = 0; j < kConfusionSize; ++j) os << pad(std::to_string(r.confusion[i][j]), w);
        os << pad(std::to_string(r.support[i]), w) << "\n";
    }
    os << pad_right("Precision", w);
    for (const auto& p : r.precision) os << pad(pct(p), w);
    os << pad("-", w) << pad("-", w) << "\n";
    os << pad_right("Recall", w);
    for (const auto& p : r.recall) os << pad(pct(p), w);
    os << pad("-", w) << pad("-", w) << "\n";
    os << "Accuracy: " << pct(r.accuracy) << " over " << r.total << " pairs";
    if (r.undefined_predictions) {
        os << " (" << r.undefined_predictions << " Undefined)";
    }
    os << "\n";
    return os.str();
}

std::string format_quality_table(const EvalReport& r) {
    constexpr std::size_t w = 11;
    std::ostringstream os;
    for (std::size_t half = 0; half < 2; ++half) {
        os << pad_right("Class", w);
        for (std::size_t i = half * 4; i < half * 4 + 4; ++i) os << pad(std::string(kShortNames[i]), w);
        os << "\n" << pad_right("Recall", w);
        for (std::size_t i = half * 4; i < half * 4 + 4; ++i) os << pad(pct(r.recall[i]), w);
        os << "\n" << pad_right("Precision", w);
        for (std::size_t i = half * 4; i < half * 4 + 4; ++i) os << pad(pct(r.precision[i]), w);
        os << "\n" << pad_right("#Samples", w);
        for (std::size_t i = half * 4; i < half * 4 + 4; ++i) os << pad(std::to_string(r.support[i]), w);
        os << "\n";
    }
    return os.str();
}

std::string report_json(const EvalReport& r) {
    auto opt = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
    ordered_json j;
    ordered_json classes = ordered_json::array();
    for (auto c : kAllClasses) classes.push_back(std::string(class_name(c)));
    classes.push_back("Undefined");
    j["columns"] = classes;
    ordered_json cm = ordered_json::array();
    for (std::size_t i = 0; i < kClassCount; ++i) {
        ordered_json row = ordered_json::array();
        for (std::size_t k = 0; k < kConfusionSize; ++k) row.push_back(r.confusion[i][k]);
        cm.push_back(std::move(row));
    }
    j["confusion"] = std::move(cm);
    ordered_json per = ordered_json::object();
    for (auto c : kAllClasses) {
        const auto i = static_cast<std::size_t>(c);
        per[std::string(class_name(c))] = {
            {"precision", opt(r.precision[i])}, {"recall", opt(r.recall[i])}, {"support", r.support[i]}};
    }
    j["per_class"] = std::move(per);
    j["total"] = r.total;
    j["undefined_predictions"] = r.undefined_predictions;
    j["accuracy"] = opt(r.accuracy);
    return j.dump();
}

}  // namespace forge
