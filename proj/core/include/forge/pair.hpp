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

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "forge/taxonomy.hpp"

namespace forge {

struct Provenance {
    std::string generator;
    std::uint64_t seed = 0;
    std::vector<std::string> parent_ids;
    // Antonym substitutions applied; 0 for pairs that were not derived.
    std::uint32_t replacements = 0;

    friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ImageTextPair {
    std::string id;
    std::string image_ref;
    std::string text;
    std::vector<std::string> concept_tags;
    MetricTriple auto_triple;
    RelationClass auto_class = ImageTextClass::Uncorrelated;
    Provenance provenance;

    friend bool operator==(const ImageTextPair&, const ImageTextPair&) = default;
};

// 16 lower-case hex digits. Corpus ids carry no class information so they can
// be shown to annotators.
std::string opaque_id(std::uint64_t value);

// Builds a pair whose class is derived from the triple.
ImageTextPair make_pair(std::string id, std::string image_ref, std::string text,
                        std::vector<std::string> concept_tags, MetricTriple triple,
                        Provenance provenance);

// One corpus line. Field order is fixed so output is byte-stable.
std::string pair_to_json(const ImageTextPair& p);

// Throws ParseError (with `line`) on schema violations or when auto_class
// disagrees with auto_triple.
ImageTextPair pair_from_json(std::string_view line_text, const std::string& file = "<string>",
                             std::size_t line = 0);

}  // namespace forge
