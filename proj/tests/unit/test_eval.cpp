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

#include <gtest/gtest.h>

#include <cmath>

#include "common/fixtures.hpp"
#include "forge/corpus.hpp"
#include "forge/eval.hpp"
#include "forge/random.hpp"

namespace forge {
namespace {

using testing::alpha_by_pair_enumeration;

ReliabilityMatrix random_matrix(Rng& rng) {
    ReliabilityMatrix m;
    const auto units = 2 + rng.below(30);
    const auto coders = 2 + rng.below(5);
    const auto cats = 2 + rng.below(5);
    for (std::uint64_t u = 0; u < units; ++u) {
        for (std::uint64_t c = 0; c < coders; ++c) {
            if (rng.below(4) == 0) continue;  // missing rating
            // Bias toward agreement so alpha covers a wide range.
            const auto v = rng.below(3) == 0 ? rng.below(cats) : u % cats;
            m.set("u" + std::to_string(u), "c" + std::to_string(c), "k" + std::to_string(v));
        }
    }
    return m;
}

TEST(Alpha, MatchesPairEnumerationOracle) {
    Rng rng(77);
    int checked = 0;
    while (checked < 100) {
        const auto m = random_matrix(rng);
        const auto want = alpha_by_pair_enumeration(m);
        if (!want) {
            EXPECT_THROW(krippendorff_alpha(m), AgreementError);
            continue;
        }
        EXPECT_NEAR(krippendorff_alpha(m), *want, 1e-9);
        ++checked;
    }
}

TEST(Alpha, PerfectAgreementIsOne) {
    ReliabilityMatrix m;
    for (int u = 0; u < 6; ++u)
        for (const char* c : {"a", "b", "c"}) m.set("u" + std::to_string(u), c, u % 2 ? "X" : "Y");
    EXPECT_DOUBLE_EQ(krippendorff_alpha(m), 1.0);
}

TEST(Alpha, HandComputedCase) {
    // Units {A,B} and {A,A}: n=4, D_o = 2/4, pooled A,A,A,B gives D_e = 6/12.
    ReliabilityMatrix m;
    m.set("1", "x", "A");
    m.set("1", "y", "B");
    m.set("2", "x", "A");
    m.set("2", "y", "A");
    EXPECT_NEAR(krippendorff_alpha(m), 0.0, 1e-12);
}

TEST(Alpha, UndefinedCasesThrow) {
    ReliabilityMatrix single;
    single.set("1", "x", "A");
    single.set("2", "x", "B");
    EXPECT_THROW(krippendorff_alpha(single), AgreementError);
    ReliabilityMatrix one_cat;
    one_cat.set("1", "x", "A");
    one_cat.set("1", "y", "A");
    EXPECT_THROW(krippendorff_alpha(one_cat), AgreementError);
    EXPECT_THROW(krippendorff_alpha(ReliabilityMatrix{}), AgreementError);
}

TEST(Alpha, InvariantUnderRelabelingAndCoderRenaming) {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
        const auto m = random_matrix(rng);
        if (!alpha_by_pair_enumeration(m)) continue;
        ReliabilityMatrix relabeled, renamed;
        for (const auto& [u, coders] : m.units) {
            for (const auto& [c, v] : coders) {
                relabeled.set(u, c, "zz" + v + "!");
                renamed.set(u, "coder-" + std::to_string(coders.size()) + c, v);
            }
        }
        const double a = krippendorff_alpha(m);
        EXPECT_NEAR(krippendorff_alpha(relabeled), a, 1e-12);
        EXPECT_NEAR(krippendorff_alpha(renamed), a, 1e-12);
    }
}

TEST(Alpha, ReliabilityFromRecordsLatestWinsAndUnsureHandling) {
    const std::vector<LabelRecord> recs = {
        {"p1", "a", ImageTextClass::Anchorage, 1},
        {"p1", "a", ImageTextClass::Illustration, 2},
        {"p1", "b", AnnotatorLabel::unsure(), 3},
    };
    const auto with = reliability_from_records(recs, true);
    EXPECT_EQ(with.units.at("p1").at("a"), "Illustration");
    EXPECT_EQ(with.units.at("p1").at("b"), "Unsure");
    const auto without = reliability_from_records(recs, false);
    EXPECT_EQ(without.units.at("p1").size(), 1u);
}

TEST(Labels, ParseAndNames) {
    EXPECT_EQ(AnnotatorLabel::parse("Unsure"), AnnotatorLabel::unsure());
    EXPECT_EQ(AnnotatorLabel::parse("Bad Anchorage"), AnnotatorLabel(ImageTextClass::BadAnchorage));
    EXPECT_FALSE(AnnotatorLabel::parse("Undefined").has_value());
    EXPECT_FALSE(AnnotatorLabel::parse("unsure").has_value());
    const auto names = AnnotatorLabel::valid_names();
    ASSERT_EQ(names.size(), 9u);
    EXPECT_EQ(names.back(), "Unsure");
    EXPECT_THROW(AnnotatorLabel::unsure().cls(), std::logic_error);
}

TEST(Labels, TimestampRoundTrip) {
    EXPECT_EQ(format_timestamp(0), "1970-01-01T00:00:00.000Z");
    EXPECT_EQ(format_timestamp(1792210740123), "2026-10-17T04:19:00.123Z");
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        const auto ms = static_cast<TimestampMs>(rng.below(4102444800000ull));
        ASSERT_EQ(parse_timestamp(format_timestamp(ms)), ms);
    }
    EXPECT_FALSE(parse_timestamp("2026-10-17 04:19:00").has_value());
    EXPECT_FALSE(parse_timestamp("2026-13-17T04:19:00.000Z").has_value());
}

LabelRecord vote(const std::string& pair, const std::string& who, AnnotatorLabel l) {
    return {pair, who, l, 0};
}

TEST(Votes, MajorityRules) {
    const auto a = AnnotatorLabel(ImageTextClass::Anchorage);
    const auto i = AnnotatorLabel(ImageTextClass::Illustration);
    const auto u = AnnotatorLabel::unsure();
    const auto out = majority_vote({
        vote("win", "x", a), vote("win", "y", a), vote("win", "z", i),
        vote("tie", "x", a), vote("tie", "y", i),
        vote("plural", "x", a), vote("plural", "y", i), vote("plural", "z", u), vote("plural", "w", a),
        vote("unsure", "x", u), vote("unsure", "y", u), vote("unsure", "z", a),
        vote("solo", "x", i),
    });
    EXPECT_EQ(out.at("win").cls, ImageTextClass::Anchorage);
    EXPECT_EQ(out.at("win").votes, 3u);
    EXPECT_EQ(out.at("tie").excluded, Exclusion::NoMajority);
    EXPECT_EQ(out.at("plural").excluded, Exclusion::NoMajority);  // 2 of 4 is not a majority
    EXPECT_EQ(out.at("unsure").excluded, Exclusion::UnsureMajority);
    EXPECT_EQ(out.at("solo").cls, ImageTextClass::Illustration);
    EXPECT_EQ(exclusion_name(Exclusion::UnsureMajority), "unsure-majority");
}

double pct(const std::optional<double>& v) { return 100.0 * v.value(); }

TEST(Reports, ReferenceClassicConfusionTable) {
    const auto maps = testing::maps_from_matrix(testing::kClassicConfusion);
    const auto r = classification_report(maps.predicted, maps.truth);
    EXPECT_EQ(r.total, 798u);
    EXPECT_EQ(r.undefined_predictions, 0u);
    for (std::size_t c = 0; c < kClassCount; ++c) {
        EXPECT_NEAR(pct(r.precision[c]), testing::kClassicPrecision[c], 0.1) << c;
        EXPECT_NEAR(pct(r.recall[c]), testing::kClassicRecall[c], 0.1) << c;
        for (std::size_t p = 0; p < kClassCount; ++p) EXPECT_EQ(r.confusion[c][p], testing::kClassicConfusion[c][p]);
    }
}

TEST(Reports, ReferenceAugmentationQualityTable) {
    const auto maps = testing::maps_from_matrix(testing::kAutoVsHuman);
    std::map<std::string, ImageTextClass> automatic;
    for (const auto& [id, rc] : maps.predicted) automatic.emplace(id, rc.cls());
    const auto r = augmentation_quality_report(automatic, maps.truth);
    for (std::size_t c = 0; c < kClassCount; ++c) {
        EXPECT_NEAR(pct(r.recall[c]), testing::kAutoVsHumanRecall[c], 0.1) << c;
        EXPECT_NEAR(pct(r.precision[c]), testing::kAutoVsHumanPrecision[c], 0.1) << c;
    }
    const auto table = format_quality_table(r);
    EXPECT_NE(table.find("Recall"), std::string::npos);
}

TEST(Reports, UndefinedPredictionsAreErrors) {
    std::map<std::string, RelationClass> pred = {
        {"a", ImageTextClass::Anchorage}, {"b", RelationClass::undefined(Validity::CaseD)}};
    std::map<std::string, ImageTextClass> truth = {{"a", ImageTextClass::Anchorage},
                                                   {"b", ImageTextClass::Anchorage},
                                                   {"c", ImageTextClass::Illustration}};
    const auto r = classification_report(pred, truth);
    EXPECT_EQ(r.total, 2u);
    EXPECT_EQ(r.undefined_predictions, 1u);
    EXPECT_DOUBLE_EQ(r.accuracy.value(), 0.5);
    EXPECT_DOUBLE_EQ(r.recall[4].value(), 0.5);
    EXPECT_DOUBLE_EQ(r.precision[4].value(), 1.0);
    EXPECT_FALSE(r.precision[3].has_value());
    pred.emplace("zzz", ImageTextClass::Anchorage);
    EXPECT_THROW(classification_report(pred, truth), Error);
    EXPECT_THROW(augmentation_quality_report({{"x", ImageTextClass::Anchorage}}, {{"y", ImageTextClass::Anchorage}}), Error);
}

TEST(Consistency, FullScaleCountsAggregate) {
    const auto rep = consistency_from_class_counts(testing::kFullScaleClassCounts);
    EXPECT_TRUE(rep.totals_consistent);
    EXPECT_EQ(rep.total, 224856u);
    // Per-metric sums written out by hand from the class triples.
    const auto& k = testing::kFullScaleClassCounts;
    EXPECT_EQ(rep.counts.cmi[0], k[0] + k[1]);
    EXPECT_EQ(rep.counts.sc[0], k[5] + k[6] + k[7]);
    EXPECT_EQ(rep.counts.sc[1], k[0]);
    EXPECT_EQ(rep.counts.stat[0], k[3] + k[6]);
    EXPECT_EQ(rep.counts.stat[1], k[0] + k[1] + k[2] + k[5]);
    EXPECT_EQ(rep.counts.stat[2], k[4] + k[7]);
    EXPECT_EQ(rep.counts.stat[0], 9546u);
    EXPECT_EQ(rep.counts.stat[1], 125463u);
}

TEST(Consistency, ReferenceStatRowsAreSwapped) {
    const auto rep = consistency_from_class_counts(testing::kFullScaleClassCounts);
    const auto diffs = compare_metric_counts(rep.counts, testing::kReferenceMetricRows);
    ASSERT_EQ(diffs.size(), 1u);
    EXPECT_EQ(diffs[0].dimension, "STAT");
    ASSERT_EQ(diffs[0].swapped.size(), 1u);
    const auto& [a, b] = diffs[0].swapped[0];
    EXPECT_EQ(std::set<std::string>({a, b}), (std::set<std::string>{"STAT T", "STAT 0"}));
    // The shipped reference file carries the same rows.
    const auto ref = parse_metric_reference(testing::slurp(testing::kDataDir / "reference_metric_table.json"));
    EXPECT_EQ(ref, testing::kReferenceMetricRows);
}

TEST(Consistency, MatchingReferenceHasNoDiscrepancy) {
    const auto rep = consistency_from_class_counts(testing::kFullScaleClassCounts);
    std::map<std::string, std::size_t> ref;
    for (const auto& [label, v] : metric_rows(rep.counts)) ref[label] = v;
    EXPECT_TRUE(compare_metric_counts(rep.counts, ref).empty());
    ref["SC 0"] += 1;
    const auto d = compare_metric_counts(rep.counts, ref);
    ASSERT_EQ(d.size(), 1u);
    EXPECT_TRUE(d[0].swapped.empty());
    EXPECT_EQ(d[0].rows, std::vector<std::string>{"SC 0"});
}

TEST(Consistency, CorpusWithUndefinedPairIsFlagged) {
    CorpusManifest m;
    m.pairs.push_back(make_pair("ok", "i", "t", {}, triple_of_class(ImageTextClass::Anchorage), {}));
    m.pairs.push_back(make_pair("bad", "i", "t", {}, {CmiLevel::Zero, ScLevel::Neg, StatLevel::Equal}, {}));
    const auto rep = corpus_consistency_report(m);
    EXPECT_EQ(rep.mismatches.size(), 1u);
    EXPECT_NE(rep.mismatches[0].find("bad"), std::string::npos);
}

}  // namespace
}  // namespace forge
