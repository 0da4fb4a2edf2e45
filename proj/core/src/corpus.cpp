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

#include "forge/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "forge/eval.hpp"
#include "forge/random.hpp"
#include "forge/text.hpp"
#include "json_util.hpp"

namespace forge {

namespace {

using detail::ordered_json;
using detail::Where;

std::string read_all(const std::filesystem::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, std::string("cannot open ") + what);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Calls fn(line_view, line_number) for every non-blank line.
template <class Fn>
void for_each_line(std::string_view s, Fn&& fn) {
    std::size_t pos = 0, line_no = 0;
    while (pos < s.size()) {
        std::size_t nl = s.find('\n', pos);
        if (nl == std::string_view::npos) nl = s.size();
        std::string_view line = s.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (text::trim(line).empty()) continue;
        fn(line, line_no);
    }
}

SourceItem item_from(const ordered_json& j, const Where& at) {
    if (!j.is_object()) at.fail("record must be a JSON object");
    SourceItem it;
    it.id = detail::require_string(j, "id", at);
    const auto& img = detail::require(j, "image_ref", at);
    if (img.is_null()) {
        it.image_ref = std::nullopt;
    } else if (img.is_string() && !img.get<std::string>().empty()) {
        it.image_ref = img.get<std::string>();
    } else {
        at.fail("field 'image_ref' must be a non-empty string or null");
    }
    it.texts = detail::string_list(j, "texts", at);
    for (const auto& t : it.texts) {
        if (text::trim(t).empty()) at.fail("field 'texts' contains an empty text");
    }
    it.category_path = detail::string_list(j, "category_path", at);
    it.story_id = detail::optional_string(j, "story_id", at);
    it.concept_name = detail::optional_string(j, "concept", at);
    it.concept_tags = detail::string_list(j, "concept_tags", at);
    if (!it.has_image() && !it.has_text()) at.fail("record has neither image nor text");
    it.line = at.line;
    return it;
}

std::string fold(std::string_view s) { return text::to_lower(text::trim(s)); }

Provenance prov(std::string_view generator, std::uint64_t seed,
                std::vector<std::string> parents) {
    return Provenance{std::string(generator), seed, std::move(parents), 0};
}

constexpr MetricTriple kUncorrelated{CmiLevel::Zero, ScLevel::Zero, StatLevel::Equal};
constexpr MetricTriple kInterdependent{CmiLevel::Zero, ScLevel::Pos, StatLevel::Equal};
constexpr MetricTriple kComplementary{CmiLevel::One, ScLevel::Pos, StatLevel::Equal};
constexpr MetricTriple kIllustration{CmiLevel::One, ScLevel::Pos, StatLevel::T};
constexpr MetricTriple kAnchorage{CmiLevel::One, ScLevel::Pos, StatLevel::I};

// Keeps k of the pairs chosen by a seeded draw, in their original order.
std::vector<ImageTextPair> select_ordered(std::vector<ImageTextPair> pairs, std::size_t k,
                                          std::uint64_t seed, const char* what) {
    if (k > pairs.size()) {
        throw GenerationError(std::string(what) + ": target " + std::to_string(k) +
                                  " exceeds the " + std::to_string(pairs.size()) +
                                  " available pairs",
                              pairs.size());
    }
    Rng rng(seed);
    auto idx = rng.sample_indices(pairs.size(), k);
    std::sort(idx.begin(), idx.end());
    std::vector<ImageTextPair> out;
    out.reserve(k);
    for (auto i : idx) out.push_back(std::move(pairs[i]));
    return out;
}

std::string key_of(ImageTextClass c) { return std::string(class_name(c)); }

}  // namespace

std::vector<SourceItem> parse_manifest(std::string_view jsonl, const std::string& source) {
    std::vector<SourceItem> items;
    std::unordered_map<std::string, std::size_t> seen;
    for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
        const Where at{source, line_no};
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const ordered_json::parse_error& e) {
            at.fail(std::string("malformed JSON: ") + e.what());
        }
        auto item = item_from(j, at);
        auto [it, inserted] = seen.emplace(item.id, line_no);
        if (!inserted) {
            at.fail("duplicate id '" + item.id + "' (first on line " + std::to_string(it->second) +
                    ")");
        }
        items.push_back(std::move(item));
    });
    return items;
}

std::vector<SourceItem> load_manifest(const std::filesystem::path& path) {
    return parse_manifest(read_all(path, "manifest"), path.string());
}

bool category_paths_disjoint(const std::vector<std::string>& a,
                             const std::vector<std::string>& b) {
    std::unordered_set<std::string> left;
    for (const auto& s : a) left.insert(fold(s));
    for (const auto& s : b) {
        if (left.count(fold(s))) return false;
    }
    return true;
}

Generated gen_uncorrelated(const std::vector<SourceItem>& items, std::size_t n,
                           std::uint64_t seed, std::size_t max_draws) {
    Generated out;
    out.stats.generator = "uncorrelated";
    if (n == 0) return out;

    std::vector<const SourceItem*> images, captions;
    for (const auto& it : items) {
        if (it.category_path.empty()) continue;
        if (it.has_image()) images.push_back(&it);
        if (it.has_text()) captions.push_back(&it);
    }
    if (images.empty() || captions.empty()) {
        throw GenerationError("uncorrelated: no categorized items with image and caption", 0);
    }
    out.pairs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint64_t item_seed = derive_seed(seed, "uncorrelated", i);
        Rng rng(item_seed);
        bool found = false;
        for (std::size_t draw = 0; draw < max_draws && !found; ++draw) {
            const SourceItem& a = *images[rng.below(images.size())];
            const SourceItem& b = *captions[rng.below(captions.size())];
            if (!category_paths_disjoint(a.category_path, b.category_path)) continue;
            const auto& caption = b.texts[rng.below(b.texts.size())];
            out.pairs.push_back(make_pair(opaque_id(item_seed), *a.image_ref, caption,
                                          a.concept_tags, kUncorrelated,
                                          prov("uncorrelated", item_seed, {a.id, b.id})));
            found = true;
        }
        if (!found) {
            throw GenerationError("uncorrelated: no disjoint partner within " +
                                      std::to_string(max_draws) + " draws; achieved " +
                                      std::to_string(i) + " of " + std::to_string(n),
                                  i);
        }
    }
    out.stats.produced = out.pairs.size();
    return out;
}

Generated gen_anchorage(const std::vector<SourceItem>& items, std::size_t n, std::uint64_t seed) {
    Generated out;
    out.stats.generator = "anchorage";
    std::vector<const SourceItem*> usable;
    for (const auto& it : items) {
        if (it.has_image() && it.has_text()) usable.push_back(&it);
    }
    if (n > usable.size()) {
        throw GenerationError("anchorage: requested " + std::to_string(n) + " but only " +
                                  std::to_string(usable.size()) + " items are available",
                              usable.size());
    }
    Rng rng(seed);
    for (std::size_t i : rng.sample_indices(usable.size(), n)) {
        const SourceItem& it = *usable[i];
        out.pairs.push_back(make_pair(opaque_id(derive_seed(seed, "anchorage:" + it.id)),
                                      *it.image_ref, it.texts.front(), it.concept_tags,
                                      kAnchorage, prov("anchorage", seed, {it.id})));
    }
    out.stats.produced = out.pairs.size();
    return out;
}

Generated gen_complementary(const std::vector<SourceItem>& items, std::size_t n,
                            std::uint64_t seed) {
    Generated out;
    out.stats.generator = "complementary";

    struct Story {
        std::string id;
        std::vector<const SourceItem*> members;
    };
    std::vector<Story> stories;
    std::unordered_map<std::string, std::size_t> index;
    for (const auto& it : items) {
        if (!it.story_id) continue;
        auto [pos, inserted] = index.emplace(*it.story_id, stories.size());
        if (inserted) stories.push_back({*it.story_id, {}});
        stories[pos->second].members.push_back(&it);
    }

    struct Usable {
        const Story* story;
        std::string text;
        std::vector<const SourceItem*> images;
    };
    std::vector<Usable> usable;
    for (const auto& s : stories) {
        Usable u{&s, {}, {}};
        std::vector<std::string> captions;
        for (const auto* m : s.members) {
            for (const auto& t : m->texts) captions.push_back(text::trim(t));
            if (m->has_image()) u.images.push_back(m);
        }
        if (u.images.empty() || captions.empty()) {
            ++out.stats.skipped;
            out.stats.warnings.push_back("story " + s.id +
                                         (u.images.empty() ? " has no image" : " has no caption"));
            continue;
        }
        u.text = text::join(captions, " ");
        usable.push_back(std::move(u));
    }
    if (n > usable.size()) {
        throw GenerationError("complementary: requested " + std::to_string(n) + " but only " +
                                  std::to_string(usable.size()) + " usable stories",
                              usable.size());
    }
    Rng pick(derive_seed(seed, "complementary-stories"));
    const auto chosen = pick.sample_indices(usable.size(), n);
    for (std::size_t k = 0; k < chosen.size(); ++k) {
        const Usable& u = usable[chosen[k]];
        const std::uint64_t item_seed = derive_seed(seed, "complementary:" + u.story->id);
        Rng rng(item_seed);
        const SourceItem& img = *u.images[rng.below(u.images.size())];
        std::vector<std::string> parents;
        for (const auto* m : u.story->members) parents.push_back(m->id);
        out.pairs.push_back(make_pair(opaque_id(item_seed), *img.image_ref, u.text,
                                      img.concept_tags, kComplementary,
                                      prov("complementary", item_seed, std::move(parents))));
    }
    out.stats.produced = out.pairs.size();
    return out;
}

Generated gen_illustration(const std::vector<SourceItem>& concept_images,
                           const std::vector<SourceItem>& concept_summaries,
                           std::uint64_t seed) {
    Generated out;
    out.stats.generator = "illustration";

    std::map<std::string, const SourceItem*> summaries;
    for (const auto& s : concept_summaries) {
        if (!s.concept_name || !s.has_text()) continue;
        summaries.emplace(fold(*s.concept_name), &s);  // first summary per concept wins
    }
    std::vector<std::string> order;
    std::unordered_map<std::string, std::vector<const SourceItem*>> images;
    for (const auto& it : concept_images) {
        if (!it.concept_name || !it.has_image()) continue;
        auto key = fold(*it.concept_name);
        auto& bucket = images[key];
        if (bucket.empty()) order.push_back(key);
        bucket.push_back(&it);
    }
    std::set<std::string> matched;
    for (const auto& key : order) {
        auto s = summaries.find(key);
        if (s == summaries.end()) {
            ++out.stats.dropped;
            continue;
        }
        matched.insert(key);
        const auto& bucket = images[key];
        const std::uint64_t item_seed = derive_seed(seed, "illustration:" + key);
        Rng rng(item_seed);
        const SourceItem& img = *bucket[rng.below(bucket.size())];
        std::vector<std::string> parts;
        for (const auto& t : s->second->texts) parts.push_back(text::trim(t));
        out.pairs.push_back(make_pair(opaque_id(item_seed), *img.image_ref,
                                      text::join(parts, " "), img.concept_tags, kIllustration,
                                      prov("illustration", item_seed, {img.id, s->second->id})));
    }
    for (const auto& [key, _] : summaries) {
        if (!matched.count(key)) ++out.stats.dropped;
    }
    out.stats.produced = out.pairs.size();
    return out;
}

bool mentions_any_tag(std::string_view slogan, const std::vector<std::string>& tags) {
    std::unordered_set<std::string> tag_tokens;
    for (const auto& t : tags) {
        for (auto& w : text::word_tokens(t)) tag_tokens.insert(std::move(w));
    }
    for (const auto& w : text::word_tokens(slogan)) {
        if (text::is_stopword(w)) continue;
        if (tag_tokens.count(w)) return true;
    }
    return false;
}

Generated gen_interdependent(const std::vector<SourceItem>& items) {
    Generated out;
    out.stats.generator = "interdependent";
    for (const auto& it : items) {
        if (!it.has_image() || !it.has_text()) {
            ++out.stats.skipped;
            continue;
        }
        const auto& slogan = it.texts.front();
        if (mentions_any_tag(slogan, it.concept_tags)) {
            ++out.stats.rejected;
            out.stats.warnings.push_back("slogan " + it.id + " mentions a depicted concept");
            continue;
        }
        out.pairs.push_back(make_pair(opaque_id(derive_seed(0, "interdependent:" + it.id)),
                                      *it.image_ref, slogan, it.concept_tags, kInterdependent,
                                      prov("interdependent", 0, {it.id})));
    }
    out.stats.produced = out.pairs.size();
    return out;
}

std::string truncate_text(std::string_view s, std::size_t max_sentences,
                          std::size_t max_words) {
    if (text::trim(s).empty()) throw std::invalid_argument("truncate_text: empty text");
    const auto sentences = text::split_sentences(s);

    auto too_long = [&](const text::Span& sp) {
        return max_words != 0 && text::whitespace_tokens(sp.of(s)).size() > max_words;
    };
    const bool too_many = max_sentences != 0 && sentences.size() > max_sentences;
    if (!too_many && std::none_of(sentences.begin(), sentences.end(), too_long)) {
        return std::string(s);
    }

    const std::size_t keep = too_many ? max_sentences : sentences.size();
    std::string out(s.substr(0, sentences.front().begin));
    for (std::size_t k = 0; k < keep; ++k) {
        const auto& sp = sentences[k];
        if (k > 0) out.append(s.substr(sentences[k - 1].end, sp.begin - sentences[k - 1].end));
        const std::string_view sentence = sp.of(s);
        if (!too_long(sp)) {
            out.append(sentence);
            continue;
        }
        const auto words = text::whitespace_tokens(sentence);
        out.append(sentence.substr(0, words[max_words - 1].end));
        std::size_t term = sentence.size();
        while (term > 0 && text::is_sentence_end(sentence[term - 1])) --term;
        out.append(sentence.substr(term));
    }
    return out;
}

CorpusConfig parse_corpus_config(std::string_view json, const std::filesystem::path& base_dir) {
    const std::string source = (base_dir / "<config>").string();
    const Where at{source, 0};
    ordered_json j;
    try {
        j = ordered_json::parse(json);
    } catch (const ordered_json::parse_error& e) {
        at.fail(std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) at.fail("config must be a JSON object");

    auto resolve = [&](const std::string& p) -> std::filesystem::path {
        if (p.empty()) return {};
        std::filesystem::path path(p);
        return path.is_absolute() ? path : base_dir / path;
    };

    CorpusConfig c;
    if (auto it = j.find("seed"); it != j.end()) {
        if (!it->is_number_unsigned()) at.fail("'seed' must be a non-negative integer");
        c.seed = it->get<std::uint64_t>();
    }
    c.lexicon = resolve(detail::optional_string(j, "lexicon", at).value_or(""));
    if (auto it = j.find("sources"); it != j.end()) {
        const auto& s = *it;
        if (!s.is_object()) at.fail("'sources' must be an object");
        c.sources.captions = resolve(detail::optional_string(s, "captions", at).value_or(""));
        c.sources.descriptions = resolve(detail::optional_string(s, "descriptions", at).value_or(""));
        c.sources.stories = resolve(detail::optional_string(s, "stories", at).value_or(""));
        c.sources.concept_images =
            resolve(detail::optional_string(s, "concept_images", at).value_or(""));
        c.sources.concept_summaries =
            resolve(detail::optional_string(s, "concept_summaries", at).value_or(""));
        c.sources.slogans = resolve(detail::optional_string(s, "slogans", at).value_or(""));
        for (const auto& [key, _] : s.items()) {
            static const std::set<std::string> known{"captions",       "descriptions",
                                                     "stories",        "concept_images",
                                                     "concept_summaries", "slogans"};
            if (!known.count(key)) at.fail("unknown source '" + key + "'");
        }
    }
    if (auto it = j.find("targets"); it != j.end()) {
        if (!it->is_object()) at.fail("'targets' must be an object keyed by class name");
        for (const auto& [name, value] : it->items()) {
            auto cls = parse_class(name);
            if (!cls) at.fail("unknown class '" + name + "' in targets");
            if (!value.is_number_unsigned()) at.fail("target for '" + name + "' must be a count");
            c.targets[static_cast<std::size_t>(*cls)] = value.get<std::size_t>();
        }
    }
    if (auto it = j.find("truncation"); it != j.end()) {
        if (!it->is_object()) at.fail("'truncation' must be an object");
        if (auto m = it->find("max_sentences"); m != it->end()) {
            c.truncation.max_sentences = m->get<std::size_t>();
        }
        if (auto m = it->find("max_words_per_sentence"); m != it->end()) {
            c.truncation.max_words_per_sentence = m->get<std::size_t>();
        }
    }
    if (auto it = j.find("max_draws"); it != j.end()) c.max_draws = it->get<std::size_t>();
    return c;
}

CorpusConfig load_corpus_config(const std::filesystem::path& path) {
    auto base = path.parent_path();
    if (base.empty()) base = ".";
    return parse_corpus_config(read_all(path, "config"), base);
}

std::string corpus_config_json(const CorpusConfig& c) {
    ordered_json j;
    j["seed"] = c.seed;
    j["lexicon"] = c.lexicon.generic_string();
    ordered_json s;
    s["captions"] = c.sources.captions.generic_string();
    s["descriptions"] = c.sources.descriptions.generic_string();
    s["stories"] = c.sources.stories.generic_string();
    s["concept_images"] = c.sources.concept_images.generic_string();
    s["concept_summaries"] = c.sources.concept_summaries.generic_string();
    s["slogans"] = c.sources.slogans.generic_string();
    j["sources"] = std::move(s);
    ordered_json t;
    for (auto cls : kAllClasses) t[key_of(cls)] = c.targets[static_cast<std::size_t>(cls)];
    j["targets"] = std::move(t);
    j["truncation"] = {{"max_sentences", c.truncation.max_sentences},
                       {"max_words_per_sentence", c.truncation.max_words_per_sentence}};
    j["max_draws"] = c.max_draws;
    return j.dump();
}

std::array<std::size_t, kClassCount> count_classes(const std::vector<ImageTextPair>& pairs) {
    std::array<std::size_t, kClassCount> counts{};
    for (const auto& p : pairs) {
        if (!p.auto_class.is_undefined()) ++counts[p.auto_class.index()];
    }
    return counts;
}

CorpusManifest build_corpus(const CorpusConfig& config) {
    auto target = [&](ImageTextClass c) { return config.targets[static_cast<std::size_t>(c)]; };
    auto load = [](const std::filesystem::path& p, const char* what) {
        if (p.empty()) throw Error(std::string("config names no source for ") + what);
        return load_manifest(p);
    };

    CorpusManifest m;
    m.created_with = corpus_config_json(config);
    std::array<std::vector<ImageTextPair>, kClassCount> by_class;
    auto take = [&](ImageTextClass c, Generated g) {
        m.stats.push_back(std::move(g.stats));
        by_class[static_cast<std::size_t>(c)] = std::move(g.pairs);
    };

    if (auto n = target(ImageTextClass::Uncorrelated)) {
        take(ImageTextClass::Uncorrelated,
             gen_uncorrelated(load(config.sources.captions, "Uncorrelated"), n,
                              derive_seed(config.seed, "uncorrelated"), config.max_draws));
    }
    if (auto n = target(ImageTextClass::Interdependent)) {
        auto g = gen_interdependent(load(config.sources.slogans, "Interdependent"));
        g.pairs = select_ordered(std::move(g.pairs), n,
                                 derive_seed(config.seed, "interdependent-select"),
                                 "interdependent");
        take(ImageTextClass::Interdependent, std::move(g));
    }
    if (auto n = target(ImageTextClass::Complementary)) {
        take(ImageTextClass::Complementary,
             gen_complementary(load(config.sources.stories, "Complementary"), n,
                               derive_seed(config.seed, "complementary")));
    }
    if (auto n = target(ImageTextClass::Illustration)) {
        auto g = gen_illustration(load(config.sources.concept_images, "Illustration images"),
                                  load(config.sources.concept_summaries, "Illustration summaries"),
                                  derive_seed(config.seed, "illustration"));
        g.pairs = select_ordered(std::move(g.pairs), n,
                                 derive_seed(config.seed, "illustration-select"), "illustration");
        take(ImageTextClass::Illustration, std::move(g));
    }
    if (auto n = target(ImageTextClass::Anchorage)) {
        take(ImageTextClass::Anchorage,
             gen_anchorage(load(config.sources.descriptions, "Anchorage"), n,
                           derive_seed(config.seed, "anchorage")));
    }
    for (auto& bucket : by_class) {
        for (auto& p : bucket) {
            p.text = truncate_text(p.text, config.truncation.max_sentences,
                                   config.truncation.max_words_per_sentence);
        }
    }

    constexpr std::array<std::pair<ImageTextClass, ImageTextClass>, 3> kNegatives = {{
        {ImageTextClass::Contrasting, ImageTextClass::Complementary},
        {ImageTextClass::BadIllustration, ImageTextClass::Illustration},
        {ImageTextClass::BadAnchorage, ImageTextClass::Anchorage},
    }};
    std::optional<AntonymLexicon> lex;
    for (auto [neg, pos] : kNegatives) {
        const std::size_t n = target(neg);
        if (n == 0) continue;
        if (!lex) {
            if (config.lexicon.empty()) throw Error("negative targets need a lexicon path");
            lex = load_lexicon(config.lexicon);
        }
        const auto& parents = by_class[static_cast<std::size_t>(pos)];
        GeneratorStats stats;
        stats.generator = std::string(kNegativeGenerator) + ":" + key_of(neg);
        Rng rng(derive_seed(config.seed, "negatives:" + key_of(neg)));
        std::vector<std::size_t> order = rng.sample_indices(parents.size(), parents.size());
        auto& out = by_class[static_cast<std::size_t>(neg)];
        for (std::size_t i : order) {
            if (out.size() == n) break;
            try {
                auto d = derive_negative(parents[i], *lex);
                d.text = truncate_text(d.text, config.truncation.max_sentences,
                                       config.truncation.max_words_per_sentence);
                out.push_back(std::move(d));
            } catch (const NoReplacementError&) {
                ++stats.rejected;
            }
        }
        if (out.size() < n) {
            throw GenerationError(key_of(neg) + ": only " + std::to_string(out.size()) + " of " +
                                      std::to_string(n) + " negatives derivable from " +
                                      std::to_string(parents.size()) + " " + key_of(pos) +
                                      " pairs",
                                  out.size());
        }
        stats.produced = out.size();
        m.stats.push_back(std::move(stats));
    }

    std::unordered_set<std::string> ids;
    for (std::size_t c = 0; c < kClassCount; ++c) {
        if (by_class[c].size() != config.targets[c]) {
            throw GenerationError(key_of(kAllClasses[c]) + ": produced " +
                                      std::to_string(by_class[c].size()) + ", target " +
                                      std::to_string(config.targets[c]),
                                  by_class[c].size());
        }
        for (auto& p : by_class[c]) {
            if (p.auto_class.is_undefined() || p.auto_class.index() != c) {
                throw std::logic_error("generated pair " + p.id + " carries the wrong label");
            }
            if (!ids.insert(p.id).second) throw Error("duplicate pair id " + p.id);
            m.pairs.push_back(std::move(p));
        }
    }
    m.per_class_counts = count_classes(m.pairs);
    return m;
}

std::filesystem::path summary_path(const std::filesystem::path& corpus_path) {
    return std::filesystem::path(corpus_path.string() + ".summary.json");
}

void write_file_atomic(const std::filesystem::path& path, std::string_view bytes) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

std::string format_class_table(const std::array<std::size_t, kClassCount>& counts) {
    std::ostringstream os;
    std::size_t total = 0;
    os << "Class              # Samples\n";
    for (auto c : kAllClasses) {
        const auto n = counts[static_cast<std::size_t>(c)];
        total += n;
        std::string name(class_name(c));
        os << name << std::string(19 - name.size(), ' ') << n << "\n";
    }
    os << "Total              " << total << "\n";
    return os.str();
}

void write_corpus(const CorpusManifest& manifest, const std::filesystem::path& path) {
    std::string body;
    for (const auto& p : manifest.pairs) {
        body += pair_to_json(p);
        body += '\n';
    }
    const auto consistency = corpus_consistency_report(manifest);

    ordered_json summary;
    summary["pairs"] = manifest.pairs.size();
    ordered_json classes;
    for (auto c : kAllClasses) {
        classes[key_of(c)] = manifest.per_class_counts[static_cast<std::size_t>(c)];
    }
    summary["class_counts"] = std::move(classes);
    summary["metric_counts"] = ordered_json::parse(metric_counts_json(consistency.counts));
    ordered_json stats = ordered_json::array();
    for (const auto& s : manifest.stats) {
        stats.push_back({{"generator", s.generator},
                         {"produced", s.produced},
                         {"rejected", s.rejected},
                         {"skipped", s.skipped},
                         {"dropped", s.dropped},
                         {"warnings", s.warnings}});
    }
    summary["generators"] = std::move(stats);
    summary["created_with"] = manifest.created_with.empty()
                                  ? ordered_json(nullptr)
                                  : ordered_json::parse(manifest.created_with);
    summary["class_table"] = format_class_table(manifest.per_class_counts);
    summary["metric_table"] = format_metric_table(consistency.counts);

    // Summary first: if it fails, no corpus file is published.
    const auto sp = summary_path(path);
    write_file_atomic(sp, summary.dump(2) + "\n");
    try {
        write_file_atomic(path, body);
    } catch (...) {
        std::error_code ec;
        std::filesystem::remove(sp, ec);
        throw;
    }
}

CorpusManifest parse_corpus(std::string_view jsonl, const std::string& source) {
    CorpusManifest m;
    std::unordered_set<std::string> ids;
    for_each_line(jsonl, [&](std::string_view line, std::size_t line_no) {
        auto p = pair_from_json(line, source, line_no);
        if (!ids.insert(p.id).second) throw ParseError(source, line_no, "duplicate id " + p.id);
        m.pairs.push_back(std::move(p));
    });
    m.per_class_counts = count_classes(m.pairs);
    return m;
}

CorpusManifest read_corpus(const std::filesystem::path& path) {
    auto m = parse_corpus(read_all(path, "corpus"), path.string());
    std::ifstream probe(summary_path(path));
    if (probe) {
        std::ostringstream ss;
        ss << probe.rdbuf();
        try {
            auto j = ordered_json::parse(ss.str());
            if (auto it = j.find("created_with"); it != j.end() && !it->is_null()) {
                m.created_with = it->dump();
            }
        } catch (const ordered_json::parse_error&) {
            // summary is advisory on read
        }
    }
    return m;
}

}  // namespace forge
