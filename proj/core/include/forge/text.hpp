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
#include <string>
#include <string_view>
#include <vector>

namespace forge::text {

struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;  // one past the last byte

    std::string_view of(std::string_view s) const { return s.substr(begin, end - begin); }
};

bool is_space(char c);
bool is_sentence_end(char c);

// Alphanumerics, '-' and any non-ASCII byte (UTF-8 continuation or lead byte).
bool is_word_char(char c);

char to_lower(char c);
std::string to_lower(std::string_view s);

// Sentences end at '.', '!' or '?' followed by whitespace or end of text. The
// span covers the sentence including its terminator and excludes surrounding
// whitespace. A trailing fragment without terminator is a sentence too.
std::vector<Span> split_sentences(std::string_view s);

// Maximal runs of non-whitespace.
std::vector<Span> whitespace_tokens(std::string_view s);

// Case-folded maximal runs of word characters.
std::vector<std::string> word_tokens(std::string_view s);

// Fixed list of English function words (lower case).
bool is_stopword(std::string_view lowered);
std::size_t stopword_count();

std::string join(const std::vector<std::string>& parts, std::string_view sep);

std::string trim(std::string_view s);

}  // namespace forge::text
