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
#include <string>
#include <string_view>
#include <vector>

#include "forge/augment.hpp"
#include "forge/pair.hpp"
#include "forge/taxonomy.hpp"

namespace forge {

// One record of a neutral source manifest (captions, stories, concept images,
// concept summaries or slogans all share this shape).
struct SourceItem {
    std::string id;
    // nullopt for text-only records (the manifest carries "image_ref": null).
    std::optional<std::string> image_ref;
    std::vector<std::string> texts;
    std::vector<std::string> category_path;
    std::optional<std::string> story_id;
    std::optional<std::string> concept_name;  // JSON key "concept"
    std::vector<std::string> concept_tags;
    std::size_t line = 0;

    bool has_image() const { return image_ref.has_value(); }
    bool has_text() const { return !texts.empty(); }
};

// JSONL, one object per line; blank lines are ignored. Throws ParseError
// naming the line for malformed JSON, schema violations and duplicate ids.
std::vector<SourceItem> load_manifest(const std::filesystem::path& path);
std::vector<SourceItem> parse_manifest(std::string_view jsonl,
                                       const std::string& source = "<string>");

struct GeneratorStats {
    std::string generator;
    std::size_t produced = 0;
    std::size_t rejected = 0;  // failed a label condition (token overlap, no keyword)
    std::size_t skipped = 0;   // unusable input groups (story without image or captions)
    std::size_t dropped = 0;   // unmatched join keys
    std::vector<std::string> warnings;
};

struct Generated {
    std::vector<ImageTextPair> pairs;
    GeneratorStats stats;
};

inline constexpr std::size_t kDefaultMaxDraws = 1000;

// Image of one item with a caption of another whose category paths share no
// element. Throws GenerationError (achieved count) when a pair cannot be
// found within max_draws attempts.
Generated gen_uncorrelated(const std::vector<SourceItem>& items, std::size_t n,
                           std::uint64_t seed, std::size_t max_draws = kDefaultMaxDraws);

// Each sampled item's image with its own (first) description; sampling
// without replacement. Throws GenerationError if n exceeds the usable items.
Generated gen_anchorage(const std::vector<SourceItem>& items, std::size_t n, std::uint64_t seed);

// One pair per sampled story: all captions of the story in manifest order
// joined by single spaces, plus one image drawn uniformly from the story.
// Stories lacking an image or a caption are skipped and counted.
Generated gen_complementary(const std::vector<SourceItem>& items, std::size_t n,
                            std::uint64_t seed);

// Inner join on case-folded concept name; one random image per concept with
// the concept's summary. Output follows first appearance in concept_images.
Generated gen_illustration(const std::vector<SourceItem>& concept_images,
                           const std::vector<SourceItem>& concept_summaries, std::uint64_t seed);

// Slogan records whose content words share no token with their concept tags
// (case-folded, stopwords removed). Overlapping records are rejected.
Generated gen_interdependent(const std::vector<SourceItem>& items);

// True when the slogan text mentions one of the tags.
bool mentions_any_tag(std::string_view text, const std::vector<std::string>& tags);

// True when the two paths share no element (case-folded).
bool category_paths_disjoint(const std::vector<std::string>& a, const std::vector<std::string>& b);

struct TruncationCaps {
    std::size_t max_sentences = 10;
    std::size_t max_words_per_sentence = 0;  // 0: no per-sentence cap
};

// Corpus build profile and training preprocessing profile.
inline constexpr TruncationCaps kCorpusTruncation{10, 0};
inline constexpr TruncationCaps kTrainingTruncation{30, 50};

// Keeps the first max_sentences sentences and the first max_words whitespace
// tokens of each; a shortened sentence keeps its terminal punctuation. Text
// within both limits is returned unchanged. A cap of 0 disables that limit.
// Throws std::invalid_argument for empty or whitespace-only text.
std::string truncate_text(std::string_view text, std::size_t max_sentences,
                          std::size_t max_words_per_sentence);

struct SourcePaths {
    std::filesystem::path captions;           // Uncorrelated
    std::filesystem::path descriptions;       // Anchorage
    std::filesystem::path stories;            // Complementary
    std::filesystem::path concept_images;     // Illustration
    std::filesystem::path concept_summaries;  // Illustration
    std::filesystem::path slogans;            // Interdependent
};

struct CorpusConfig {
    SourcePaths sources;
    std::filesystem::path lexicon;
    std::array<std::size_t, kClassCount> targets{};
    std::uint64_t seed = 0;
    TruncationCaps truncation = kCorpusTruncation;
    std::size_t max_draws = kDefaultMaxDraws;
};

// Relative paths are resolved against the config file's directory.
CorpusConfig load_corpus_config(const std::filesystem::path& path);
CorpusConfig parse_corpus_config(std::string_view json, const std::filesystem::path& base_dir);

// Canonical JSON of the config (embedded in every corpus summary).
std::string corpus_config_json(const CorpusConfig& config);

struct CorpusManifest {
    std::vector<ImageTextPair> pairs;
    std::array<std::size_t, kClassCount> per_class_counts{};
    std::string created_with;  // config snapshot (JSON)
    std::vector<GeneratorStats> stats;
};

std::array<std::size_t, kClassCount> count_classes(const std::vector<ImageTextPair>& pairs);

// Runs all generators, derives the negatives from seeded draws of their
// positive counterparts and truncates every text. Each class ends up with
// exactly its target count or the build throws.
CorpusManifest build_corpus(const CorpusConfig& config);

// Writes <path> (one pair per line) and <path>.summary.json atomically.
// Nothing is left behind on failure.
void write_corpus(const CorpusManifest& manifest, const std::filesystem::path& path);

// Reads a corpus JSONL (summary is not required).
CorpusManifest read_corpus(const std::filesystem::path& path);
CorpusManifest parse_corpus(std::string_view jsonl, const std::string& source = "<string>");

// Class counts in the class-distribution table layout.
std::string format_class_table(const std::array<std::size_t, kClassCount>& counts);

std::filesystem::path summary_path(const std::filesystem::path& corpus_path);

// Writes bytes to a sibling temp file and renames it over path.
void write_file_atomic(const std::filesystem::path& path, std::string_view bytes);

}  // namespace forge
