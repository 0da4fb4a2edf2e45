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

#include "forge/pair.hpp"

#include "forge/error.hpp"
#include "json_util.hpp"

namespace forge {

std::string opaque_id(std::uint64_t value) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[value & 0xF];
        value >>= 4;
    }
    return out;
}

ImageTextPair make_pair(std::string id, std::string image_ref, std::string text,
                        std::vector<std::string> concept_tags, MetricTriple triple,
                        Provenance provenance) {
    ImageTextPair p;
    p.id = std::move(id);
    p.image_ref = std::move(image_ref);
    p.text = std::move(text);
    p.concept_tags = std::move(concept_tags);
    p.auto_triple = triple;
    p.auto_class = classify_triple(triple);
    p.provenance = std::move(provenance);
    return p;
}

std::string pair_to_json(const ImageTextPair& p) { return detail::pair_json(p).dump(); }

ImageTextPair pair_from_json(std::string_view line_text, const std::string& file,
                             std::size_t line) {
    detail::ordered_json j;
    try {
        j = detail::ordered_json::parse(line_text);
    } catch (const detail::ordered_json::parse_error& e) {
        throw ParseError(file, line, std::string("malformed JSON: ") + e.what());
    }
    return detail::pair_from(j, file, line);
}

}  // namespace forge
