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

#include "forge/augment.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "forge/random.hpp"
#include "forge/text.hpp"

namespace forge {

namespace {

std::string normalize_keyword(std::string_view raw) {
    std::string out;
    bool pending_space = false;
    for (char c : raw) {
        if (text::is_space(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) out += ' ';
        pending_space = false;
        out += text::to_lower(c);
    }
    return out;
}

std::string first_word(std::string_view s) {
    std::size_t e = 0;
    while (e < s.size() && text::is_word_char(s[e])) ++e;
    return std::string(s.substr(0, e));
}

bool is_word_start(std::string_view s, std::size_t i) {
    return text::is_word_char(s[i]) && (i == 0 || !text::is_word_char(s[i - 1]));
}

bool matches_at(std::string_view s, std::size_t i, std::string_view keyword) {
    if (i + keyword.size() > s.size()) return false;
    for (std::size_t k = 0; k < keyword.size(); ++k) {
        if (text::to_lower(s[i + k]) != keyword[k]) return false;
    }
    const std::size_t end = i + keyword.size();
    return end == s.size() || !text::is_word_char(s[end]);
}

const std::vector<std::size_t> kNoCandidates;

// Visits every match left to right. fn(begin, entry_index).
template <class Fn>
void scan(std::string_view s, const AntonymLexicon& lex, Fn&& fn) {
    std::size_t i = 0;
    while (i < s.size()) {
        if (!is_word_start(s, i)) {
            ++i;
            continue;
        }
        std::size_t word_end = i;
        while (word_end < s.size() && text::is_word_char(s[word_end])) ++word_end;
        const auto& cands = lex.candidates(text::to_lower(s.substr(i, word_end - i)));
        bool matched = false;
        for (std::size_t idx : cands) {
            const auto& kw = lex.entries()[idx].keyword;
            if (matches_at(s, i, kw)) {
                fn(i, idx);
                i += kw.size();
                matched = true;
                break;
            }
        }
        if (!matched) i = word_end;
    }
}

}  // namespace

AntonymLexicon::AntonymLexicon(std::vector<LexiconEntry> entries) {
    for (auto& e : entries) {
        e.keyword = normalize_keyword(e.keyword);
        e.replacement = text::trim(e.replacement);
        if (e.keyword.empty()) throw Error("lexicon keyword must be non-empty");
        if (e.replacement.empty()) throw Error("lexicon replacement for '" + e.keyword + "' is empty");
        if (!text::is_word_char(e.keyword.front())) {
            throw Error("lexicon keyword '" + e.keyword + "' must start with a word character");
        }
    }
    entries_ = std::move(entries);
    for (std::size_t i = 0; i < entries_.size(); ++i) {
        auto& bucket = by_first_word_[first_word(entries_[i].keyword)];
        for (std::size_t j : bucket) {
            if (entries_[j].keyword == entries_[i].keyword) {
                throw Error("duplicate lexicon keyword '" + entries_[i].keyword + "'");
            }
        }
        bucket.push_back(i);
    }
    for (auto& [word, bucket] : by_first_word_) {
        std::stable_sort(bucket.begin(), bucket.end(), [this](std::size_t a, std::size_t b) {
            return entries_[a].keyword.size() > entries_[b].keyword.size();
        });
    }
}

const std::vector<std::size_t>& AntonymLexicon::candidates(std::string_view first) const {
    auto it = by_first_word_.find(std::string(first));
    return it == by_first_word_.end() ? kNoCandidates : it->second;
}

std::uint64_t AntonymLexicon::fingerprint() const {
    std::string buf;
    for (const auto& e : entries_) {
        buf += e.keyword;
        buf += '\t';
        buf += e.replacement;
        buf += '\n';
    }
    return fnv1a64(buf);
}

AntonymLexicon parse_lexicon(std::string_view tsv, const std::string& source) {
    std::vector<LexiconEntry> entries;
    std::vector<std::size_t> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= tsv.size()) {
        std::size_t nl = tsv.find('\n', pos);
        if (nl == std::string_view::npos) nl = tsv.size();
        std::string_view line = tsv.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty() || line.front() == '#') {
            if (nl == tsv.size()) break;
            continue;
        }
        const auto tab = line.find('\t');
        if (tab == std::string_view::npos || line.find('\t', tab + 1) != std::string_view::npos) {
            throw ParseError(source, line_no, "expected exactly two tab-separated columns");
        }
        LexiconEntry e{normalize_keyword(line.substr(0, tab)), text::trim(line.substr(tab + 1))};
        if (e.keyword.empty() || e.replacement.empty()) {
            throw ParseError(source, line_no, "empty keyword or replacement");
        }
        entries.push_back(std::move(e));
        lines.push_back(line_no);
        if (nl == tsv.size()) break;
    }
    // Duplicate detection with line numbers before the constructor re-checks.
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        auto [it, inserted] = seen.emplace(entries[i].keyword, lines[i]);
        if (!inserted) {
            throw ParseError(source, lines[i],
                             "duplicate keyword '" + entries[i].keyword + "' (first on line " +
                                 std::to_string(it->second) + ")");
        }
    }
    try {
        return AntonymLexicon(std::move(entries));
    } catch (const ParseError&) {
        throw;
    } catch (const Error& e) {
        throw ParseError(source, 0, e.what());
    }
}

AntonymLexicon load_lexicon(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open lexicon");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_lexicon(ss.str(), path.string());
}

AntonymLexicon reverse_lexicon(const AntonymLexicon& lex) {
    std::vector<LexiconEntry> rev;
    std::unordered_map<std::string, bool> seen;
    for (const auto& e : lex.entries()) {
        auto key = normalize_keyword(e.replacement);
        if (key.empty() || !text::is_word_char(key.front())) continue;
        if (!seen.emplace(key, true).second) continue;
        rev.push_back({std::move(key), e.keyword});
    }
    return AntonymLexicon(std::move(rev));
}

Substitution substitute_antonyms(std::string_view s, const AntonymLexicon& lex) {
    Substitution out;
    out.text.reserve(s.size());
    std::size_t copied = 0;
    scan(s, lex, [&](std::size_t begin, std::size_t idx) {
        const auto& e = lex.entries()[idx];
        out.text.append(s.substr(copied, begin - copied));
        std::string rep = e.replacement;
        if (s[begin] >= 'A' && s[begin] <= 'Z' && rep[0] >= 'a' && rep[0] <= 'z') {
            rep[0] = static_cast<char>(rep[0] - 'a' + 'A');
        }
        out.text += rep;
        copied = begin + e.keyword.size();
        ++out.replacements;
    });
    out.text.append(s.substr(copied));
    return out;
}

std::size_t count_keyword_hits(std::string_view s, const AntonymLexicon& lex) {
    std::size_t n = 0;
    scan(s, lex, [&](std::size_t, std::size_t) { ++n; });
    return n;
}

ImageTextClass negative_counterpart(ImageTextClass positive) {
    switch (positive) {
        case ImageTextClass::Complementary: return ImageTextClass::Contrasting;
        case ImageTextClass::Illustration: return ImageTextClass::BadIllustration;
        case ImageTextClass::Anchorage: return ImageTextClass::BadAnchorage;
        default:
            throw std::invalid_argument("no negative counterpart for " +
                                        std::string(class_name(positive)));
    }
}

std::string negative_id(std::string_view parent_id) {
    return opaque_id(derive_seed(0, "negative:" + std::string(parent_id)));
}

ImageTextPair derive_negative(const ImageTextPair& pair, const AntonymLexicon& lex) {
    if (pair.auto_class.is_undefined()) {
        throw std::invalid_argument("cannot derive a negative from an Undefined pair");
    }
    const ImageTextClass target = negative_counterpart(pair.auto_class.cls());
    auto sub = substitute_antonyms(pair.text, lex);
    if (sub.replacements == 0) throw NoReplacementError(pair.id);

    ImageTextPair neg = pair;
    neg.id = negative_id(pair.id);
    neg.text = std::move(sub.text);
    neg.auto_triple.sc = ScLevel::Neg;
    neg.auto_class = classify_triple(neg.auto_triple);
    neg.provenance.generator = std::string(kNegativeGenerator);
    neg.provenance.parent_ids = {pair.id};
    neg.provenance.replacements = static_cast<std::uint32_t>(sub.replacements);
    if (neg.auto_class != RelationClass(target)) {
        throw std::logic_error("negative class mapping disagrees with taxonomy");
    }
    return neg;
}

}  // namespace forge
