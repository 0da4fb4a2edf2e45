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

#include "forge/text.hpp"

#include <algorithm>
#include <array>

namespace forge::text {

namespace {

// 124 entries, sorted for binary search.
constexpr std::array<std::string_view, 124> kStopwords = {
    "a",       "about",   "above",  "after",   "again",   "against", "all",     "am",
    "an",      "and",     "any",    "are",     "as",      "at",      "be",      "because",
    "been",    "before",  "being",  "below",   "between", "both",    "but",     "by",
    "can",     "could",   "did",    "do",      "does",    "doing",   "down",    "during",
    "each",    "few",     "for",    "from",    "further", "had",     "has",     "have",
    "having",  "he",      "her",    "here",    "hers",    "herself", "him",     "himself",
    "his",     "how",     "i",      "if",      "in",      "into",    "is",      "it",
    "its",     "itself",  "just",   "me",      "more",    "most",    "my",      "myself",
    "no",      "nor",     "not",    "now",     "of",      "off",     "on",      "once",
    "only",    "or",      "other",  "ought",   "our",     "ours",    "out",     "over",
    "own",     "same",    "she",    "should",  "so",      "some",    "such",    "than",
    "that",    "the",     "their",  "theirs",  "them",    "then",    "there",   "these",
    "they",    "this",    "those",  "through", "to",      "too",     "under",   "until",
    "up",      "us",      "very",   "was",     "we",      "were",    "what",    "when",
    "where",   "which",   "while",  "who",     "whom",    "why",     "will",    "with",
    "would",   "you",     "your",   "yours",
};

}  // namespace

bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_sentence_end(char c) { return c == '.' || c == '!' || c == '?'; }

bool is_word_char(char c) {
    const auto u = static_cast<unsigned char>(c);
    return (u >= '0' && u <= '9') || (u >= 'a' && u <= 'z') || (u >= 'A' && u <= 'Z') ||
           u == '-' || u >= 0x80;
}

char to_lower(char c) { return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c; }

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = to_lower(c);
    return out;
}

std::vector<Span> split_sentences(std::string_view s) {
    std::vector<Span> out;
    std::size_t i = 0;
    const std::size_t n = s.size();
    while (i < n) {
        while (i < n && is_space(s[i])) ++i;
        if (i == n) break;
        const std::size_t begin = i;
        std::size_t end = n;
        for (; i < n; ++i) {
            if (is_sentence_end(s[i]) && (i + 1 == n || is_space(s[i + 1]))) {
                end = i + 1;
                ++i;
                break;
            }
        }
        if (end == n) {
            // unterminated tail: drop trailing whitespace
            while (end > begin && is_space(s[end - 1])) --end;
            i = n;
        }
        out.push_back({begin, end});
    }
    return out;
}

std::vector<Span> whitespace_tokens(std::string_view s) {
    std::vector<Span> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        const std::size_t b = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > b) out.push_back({b, i});
    }
    return out;
}

std::vector<std::string> word_tokens(std::string_view s) {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && !is_word_char(s[i])) ++i;
        const std::size_t b = i;
        while (i < s.size() && is_word_char(s[i])) ++i;
        if (i > b) out.push_back(to_lower(s.substr(b, i - b)));
    }
    return out;
}

bool is_stopword(std::string_view lowered) {
    return std::binary_search(kStopwords.begin(), kStopwords.end(), lowered);
}

std::size_t stopword_count() { return kStopwords.size(); }

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += sep;
        out += parts[i];
    }
    return out;
}

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && is_space(s[b])) ++b;
    while (e > b && is_space(s[e - 1])) --e;
    return std::string(s.substr(b, e - b));
}

}  // namespace forge::text
