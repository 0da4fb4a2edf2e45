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

#include "forge/taxonomy.hpp"

#include <stdexcept>

namespace forge {

namespace {

struct ClassRow {
    ImageTextClass cls;
    std::string_view name;
    MetricTriple triple;
};

constexpr std::array<ClassRow, kClassCount> kClassTable = {{
    {ImageTextClass::Uncorrelated, "Uncorrelated", {CmiLevel::Zero, ScLevel::Zero, StatLevel::Equal}},
    {ImageTextClass::Interdependent, "Interdependent", {CmiLevel::Zero, ScLevel::Pos, StatLevel::Equal}},
    {ImageTextClass::Complementary, "Complementary", {CmiLevel::One, ScLevel::Pos, StatLevel::Equal}},
    {ImageTextClass::Illustration, "Illustration", {CmiLevel::One, ScLevel::Pos, StatLevel::T}},
    {ImageTextClass::Anchorage, "Anchorage", {CmiLevel::One, ScLevel::Pos, StatLevel::I}},
    {ImageTextClass::Contrasting, "Contrasting", {CmiLevel::One, ScLevel::Neg, StatLevel::Equal}},
    {ImageTextClass::BadIllustration, "Bad Illustration", {CmiLevel::One, ScLevel::Neg, StatLevel::T}},
    {ImageTextClass::BadAnchorage, "Bad Anchorage", {CmiLevel::One, ScLevel::Neg, StatLevel::I}},
}};

constexpr std::string_view kUndefinedName = "Undefined";

}  // namespace

RelationClass RelationClass::undefined(Validity reason) {
    if (reason == Validity::Valid) {
        throw std::invalid_argument("Undefined requires a Case reason");
    }
    return RelationClass(reason);
}

ImageTextClass RelationClass::cls() const {
    if (is_undefined()) throw std::logic_error("RelationClass is Undefined");
    return cls_;
}

std::size_t RelationClass::index() const {
    return is_undefined() ? kUndefinedIndex : static_cast<std::size_t>(cls_);
}

Validity validity_reason(const MetricTriple& t) {
    if (t.cmi == CmiLevel::Zero) {
        switch (t.sc) {
            case ScLevel::Neg:
                return Validity::CaseA;
            case ScLevel::Zero:
                return t.stat == StatLevel::Equal ? Validity::Valid : Validity::CaseB;
            case ScLevel::Pos:
                return t.stat == StatLevel::Equal ? Validity::Valid : Validity::CaseC;
        }
    }
    if (t.sc == ScLevel::Zero) return Validity::CaseD;
    return Validity::Valid;
}

RelationClass classify_triple(const MetricTriple& t) {
    const Validity v = validity_reason(t);
    if (v != Validity::Valid) return RelationClass::undefined(v);
    for (const auto& row : kClassTable) {
        if (row.triple == t) return row.cls;
    }
    // Unreachable: exactly eight triples are Valid and each has a row.
    throw std::logic_error("valid triple without class: " + to_string(t));
}

MetricTriple triple_of_class(ImageTextClass c) {
    return kClassTable[static_cast<std::size_t>(c)].triple;
}

MetricTriple triple_of_class(const RelationClass& c) {
    if (c.is_undefined()) {
        throw std::invalid_argument("Undefined has no defining metric triple");
    }
    return triple_of_class(c.cls());
}

std::array<MetricTriple, kTripleCount> enumerate_triples() {
    std::array<MetricTriple, kTripleCount> out{};
    std::size_t k = 0;
    for (std::size_t c = 0; c < kCmiLevels; ++c)
        for (std::size_t s = 0; s < kScLevels; ++s)
            for (std::size_t st = 0; st < kStatLevels; ++st)
                out[k++] = {cmi_from_index(c), sc_from_index(s), stat_from_index(st)};
    return out;
}

std::size_t level_index(CmiLevel v) { return static_cast<std::size_t>(v); }
std::size_t level_index(ScLevel v) { return static_cast<std::size_t>(v); }
std::size_t level_index(StatLevel v) { return static_cast<std::size_t>(v); }

CmiLevel cmi_from_index(std::size_t i) {
    if (i >= kCmiLevels) throw std::out_of_range("cmi level index");
    return static_cast<CmiLevel>(i);
}

ScLevel sc_from_index(std::size_t i) {
    if (i >= kScLevels) throw std::out_of_range("sc level index");
    return static_cast<ScLevel>(i);
}

StatLevel stat_from_index(std::size_t i) {
    if (i >= kStatLevels) throw std::out_of_range("stat level index");
    return static_cast<StatLevel>(i);
}

std::string_view class_name(ImageTextClass c) {
    return kClassTable[static_cast<std::size_t>(c)].name;
}

std::string class_name(const RelationClass& c) {
    return std::string(c.is_undefined() ? kUndefinedName : class_name(c.cls()));
}

std::string_view validity_name(Validity v) {
    switch (v) {
        case Validity::Valid: return "Valid";
        case Validity::CaseA: return "Case A";
        case Validity::CaseB: return "Case B";
        case Validity::CaseC: return "Case C";
        case Validity::CaseD: return "Case D";
    }
    return "?";
}

std::optional<ImageTextClass> parse_class(std::string_view name) {
    for (const auto& row : kClassTable) {
        if (row.name == name) return row.cls;
    }
    return std::nullopt;
}

std::optional<RelationClass> parse_relation_class(std::string_view name,
                                                  std::optional<Validity> reason) {
    if (name == kUndefinedName) {
        const Validity r = reason.value_or(Validity::CaseA);
        if (r == Validity::Valid) return std::nullopt;
        return RelationClass::undefined(r);
    }
    if (auto c = parse_class(name)) return RelationClass(*c);
    return std::nullopt;
}

int cmi_value(CmiLevel v) { return v == CmiLevel::One ? 1 : 0; }

int sc_value(ScLevel v) { return static_cast<int>(level_index(v)) - 1; }

std::string_view stat_value(StatLevel v) {
    switch (v) {
        case StatLevel::T: return "T";
        case StatLevel::Equal: return "0";
        case StatLevel::I: return "I";
    }
    return "?";
}

std::optional<CmiLevel> parse_cmi(int v) {
    if (v == 0) return CmiLevel::Zero;
    if (v == 1) return CmiLevel::One;
    return std::nullopt;
}

std::optional<ScLevel> parse_sc(int v) {
    if (v < -1 || v > 1) return std::nullopt;
    return sc_from_index(static_cast<std::size_t>(v + 1));
}

std::optional<StatLevel> parse_stat(std::string_view v) {
    if (v == "T") return StatLevel::T;
    if (v == "0") return StatLevel::Equal;
    if (v == "I") return StatLevel::I;
    return std::nullopt;
}

std::string to_string(const MetricTriple& t) {
    return "(" + std::to_string(cmi_value(t.cmi)) + ", " + std::to_string(sc_value(t.sc)) +
           ", " + std::string(stat_value(t.stat)) + ")";
}

}  // namespace forge
