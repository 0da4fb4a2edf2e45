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
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "forge/error.hpp"
#include "forge/pair.hpp"

namespace forge {

struct LexiconEntry {
    std::string keyword;  // lower case, words separated by single spaces
    std::string replacement;
};

// Keyword -> replacement table for antonym substitution. Immutable after
// construction; lookups try the longest keyword first.
class AntonymLexicon {
public:
    AntonymLexicon() = default;

    // Throws Error on an empty or duplicate (case-insensitive) keyword.
    explicit AntonymLexicon(std::vector<LexiconEntry> entries);

    const std::vector<LexiconEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }

    // Candidates whose keyword starts with this (lower-case) word, longest first.
    const std::vector<std::size_t>& candidates(std::string_view first_word) const;

    // Stable content hash over (keyword, replacement) pairs in file order.
    std::uint64_t fingerprint() const;

private:
    std::vector<LexiconEntry> entries_;
    std::unordered_map<std::string, std::vector<std::size_t>> by_first_word_;
};

// TSV: keyword<TAB>replacement. '#' lines and blank lines are skipped.
// Throws ParseError naming the line for malformed or duplicate rows.
AntonymLexicon load_lexicon(const std::filesystem::path& path);
AntonymLexicon parse_lexicon(std::string_view tsv, const std::string& source = "<string>");

// Replacement -> keyword table (first keyword wins on repeated replacements).
// Used to detect text that already carries substituted words.
AntonymLexicon reverse_lexicon(const AntonymLexicon& lex);

struct Substitution {
    std::string text;
    std::size_t replacements = 0;
};

// Left-to-right whole-word, case-insensitive replacement. Multiword keywords
// match across single spaces. A match starting with an upper-case letter gets
// an upper-case replacement initial. Untouched bytes are copied verbatim.
Substitution substitute_antonyms(std::string_view text, const AntonymLexicon& lex);

// Counts keyword occurrences without building the output.
std::size_t count_keyword_hits(std::string_view text, const AntonymLexicon& lex);

// Thrown by derive_negative when no keyword was found.
class NoReplacementError : public Error {
public:
    explicit NoReplacementError(const std::string& pair_id)
        : Error("pair " + pair_id + ": no lexicon keyword found, cannot justify sc=-1"),
          pair_id_(pair_id) {}

    const std::string& pair_id() const { return pair_id_; }

private:
    std::string pair_id_;
};

inline constexpr std::string_view kNegativeGenerator = "antonym-swap";

// Complementary -> Contrasting, Illustration -> Bad Illustration,
// Anchorage -> Bad Anchorage. Only text, sc and class change.
// Throws std::invalid_argument for any other class.
ImageTextClass negative_counterpart(ImageTextClass positive);

// Throws std::invalid_argument for a non-positive source class and
// NoReplacementError when the text contains no keyword.
ImageTextPair derive_negative(const ImageTextPair& pair, const AntonymLexicon& lex);

// Id of the negative derived from parent_id.
std::string negative_id(std::string_view parent_id);

}  // namespace forge
