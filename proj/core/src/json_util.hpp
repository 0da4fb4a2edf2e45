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

// Internal JSON helpers shared by the codec-bearing translation units.

#include <optional>
#include <string>
#include <vector>

#include "forge/error.hpp"
#include "forge/pair.hpp"
#include "json.hpp"

namespace forge::detail {

using ordered_json = nlohmann::ordered_json;

struct Where {
    const std::string& file;
    std::size_t line;

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(file, line, what); }
};

inline const ordered_json& require(const ordered_json& j, const char* key, const Where& at) {
    auto it = j.find(key);
    if (it == j.end()) at.fail(std::string("missing field '") + key + "'");
    return *it;
}

inline std::string require_string(const ordered_json& j, const char* key, const Where& at,
                                  bool allow_empty = false) {
    const auto& v = require(j, key, at);
    if (!v.is_string()) at.fail(std::string("field '") + key + "' must be a string");
    auto s = v.get<std::string>();
    if (!allow_empty && s.empty()) at.fail(std::string("field '") + key + "' must be non-empty");
    return s;
}

inline std::optional<std::string> optional_string(const ordered_json& j, const char* key,
                                                  const Where& at) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) at.fail(std::string("field '") + key + "' must be a string or null");
    return it->get<std::string>();
}

inline std::vector<std::string> string_list(const ordered_json& j, const char* key,
                                            const Where& at) {
    std::vector<std::string> out;
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return out;
    if (!it->is_array()) at.fail(std::string("field '") + key + "' must be an array of strings");
    for (const auto& e : *it) {
        if (!e.is_string()) at.fail(std::string("field '") + key + "' must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

inline ordered_json triple_json(const MetricTriple& t) {
    ordered_json j;
    j["cmi"] = cmi_value(t.cmi);
    j["sc"] = sc_value(t.sc);
    j["stat"] = std::string(stat_value(t.stat));
    return j;
}

inline MetricTriple triple_from(const ordered_json& j, const Where& at) {
    if (!j.is_object()) at.fail("metric triple must be an object");
    const auto& cmi = require(j, "cmi", at);
    const auto& sc = require(j, "sc", at);
    const auto& stat = require(j, "stat", at);
    if (!cmi.is_number_integer() || !sc.is_number_integer() || !stat.is_string()) {
        at.fail("metric triple has wrong field types");
    }
    auto c = parse_cmi(cmi.get<int>());
    auto s = parse_sc(sc.get<int>());
    auto st = parse_stat(stat.get<std::string>());
    if (!c || !s || !st) at.fail("metric triple value out of range");
    return {*c, *s, *st};
}

inline ordered_json pair_json(const ImageTextPair& p) {
    ordered_json j;
    j["id"] = p.id;
    j["image_ref"] = p.image_ref;
    j["text"] = p.text;
    j["concept_tags"] = p.concept_tags;
    j["auto_triple"] = triple_json(p.auto_triple);
    j["auto_class"] = class_name(p.auto_class);
    ordered_json prov;
    prov["generator"] = p.provenance.generator;
    prov["seed"] = p.provenance.seed;
    prov["parent_ids"] = p.provenance.parent_ids;
    prov["replacements"] = p.provenance.replacements;
    j["provenance"] = std::move(prov);
    return j;
}

inline ImageTextPair pair_from(const ordered_json& j, const std::string& file, std::size_t line) {
    const Where at{file, line};
    if (!j.is_object()) at.fail("pair record must be a JSON object");
    ImageTextPair p;
    p.id = require_string(j, "id", at);
    p.image_ref = require_string(j, "image_ref", at);
    p.text = require_string(j, "text", at);
    p.concept_tags = string_list(j, "concept_tags", at);
    p.auto_triple = triple_from(require(j, "auto_triple", at), at);
    p.auto_class = classify_triple(p.auto_triple);
    const auto cls = require_string(j, "auto_class", at);
    if (cls != class_name(p.auto_class)) {
        at.fail("auto_class '" + cls + "' disagrees with auto_triple " + to_string(p.auto_triple));
    }
    if (auto it = j.find("provenance"); it != j.end() && it->is_object()) {
        p.provenance.generator = optional_string(*it, "generator", at).value_or("");
        if (auto s = it->find("seed"); s != it->end() && s->is_number_unsigned()) {
            p.provenance.seed = s->get<std::uint64_t>();
        }
        p.provenance.parent_ids = string_list(*it, "parent_ids", at);
        if (auto r = it->find("replacements"); r != it->end() && r->is_number_unsigned()) {
            p.provenance.replacements = r->get<std::uint32_t>();
        }
    }
    return p;
}

}  // namespace forge::detail
