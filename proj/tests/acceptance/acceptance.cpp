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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Tolerances and time limits are fixed below.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "common/fixtures.hpp"
#include "forge/augment.hpp"
#include "forge/classifier.hpp"
#include "forge/corpus.hpp"
#include "forge/eval.hpp"
#include "forge/random.hpp"
#include "forge/session.hpp"
#include "forge/taxonomy.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace forge;

namespace {

constexpr double kAlphaOracleTol = 1e-9;
constexpr double kAlphaChanceBound = 0.05;
constexpr double kTablePointTol = 0.1;  // percentage points
constexpr double kGradRelTol = 1e-4;
constexpr double kSoftmaxSumTol = 1e-9;
constexpr double kFdStep = 1e-5;
constexpr std::size_t kSeparableEpochs = 200;
constexpr double kBaselineMargin = 0.20;
constexpr double kHeadSubsetAccuracy = 0.95;
constexpr double kCascadeSubsetAccuracy = 0.90;
constexpr std::size_t kMinSubset = 20;
constexpr std::uint64_t kPipelineSeed = 7;

struct Check {
    bool ok = true;
    std::ostringstream note;

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            if (!ok) note << "; ";
            ok = false;
            note << what;
        }
    }
};

struct Context {
    fs::path forge;
    fs::path work;
};

std::string quote(const std::string& s) {
    std::string out = "'";
    for (char c : s) out += c == '\'' ? std::string("'\\''") : std::string(1, c);
    return out + "'";
}

// Runs the forge binary; stdout goes to out_file. Returns the exit status.
int run_forge(const Context& ctx, const std::vector<std::string>& args, const fs::path& out_file) {
    std::string cmd = quote(ctx.forge.string());
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " > " + quote(out_file.string()) + " 2> " + quote(out_file.string() + ".err");
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// ---------------------------------------------------------------- criteria

void taxonomy_exhaustive(const Context&, Check& c) {
    std::set<ImageTextClass> classes;
    std::map<Validity, int> cases;
    for (const auto& t : enumerate_triples()) {
        const auto r = classify_triple(t);
        if (r.is_undefined()) {
            ++cases[r.reason()];
        } else {
            classes.insert(r.cls());
        }
    }
    c.expect(enumerate_triples().size() == 18, "triple count");
    c.expect(classes.size() == 8, "valid classes " + std::to_string(classes.size()));
    c.expect(cases[Validity::CaseA] == 3 && cases[Validity::CaseB] == 2 && cases[Validity::CaseC] == 2 &&
                 cases[Validity::CaseD] == 3,
             "case counts");
    for (auto k : kAllClasses) {
        const auto r = classify_triple(triple_of_class(k));
        c.expect(!r.is_undefined() && r.cls() == k, "round trip " + std::string(class_name(k)));
    }
    c.note << "8 classes, invalid A/B/C/D = " << cases[Validity::CaseA] << "/" << cases[Validity::CaseB] << "/"
           << cases[Validity::CaseC] << "/" << cases[Validity::CaseD];
}

void table_consistency(const Context& ctx, Check& c) {
    CorpusManifest m;
    const auto& k = testing::kFullScaleClassCounts;
    m.pairs.reserve(224856);
    for (std::size_t cls = 0; cls < kClassCount; ++cls) {
        const auto t = triple_of_class(kAllClasses[cls]);
        for (std::size_t i = 0; i < k[cls]; ++i) {
            ImageTextPair p;
            p.id = std::to_string(cls) + "-" + std::to_string(i);
            p.auto_triple = t;
            p.auto_class = kAllClasses[cls];
            m.pairs.push_back(std::move(p));
        }
    }
    const auto rep = corpus_consistency_report(m);
    const auto& n = rep.counts;
    c.expect(rep.total == 224856 && rep.totals_consistent && rep.mismatches.empty(), "total");
    c.expect(n.sc[0] == 62677 && n.sc[1] == 60000 && n.sc[2] == 102179, "SC rows");
    c.expect(n.cmi[0] == 61007 && n.cmi[1] == 163849, "CMI rows");
    c.expect(n.stat[0] == 9546 && n.stat[1] == 125463 && n.stat[2] == 89847, "STAT rows");
    const auto diffs = compare_metric_counts(n, testing::kReferenceMetricRows);
    const bool swap_flagged = diffs.size() == 1 && diffs[0].dimension == "STAT" && diffs[0].swapped.size() == 1 &&
                              std::set<std::string>{diffs[0].swapped[0].first, diffs[0].swapped[0].second} ==
                                  std::set<std::string>{"STAT T", "STAT 0"};
    c.expect(swap_flagged, "STAT T/0 swap not flagged");

    // Same through the CLI with the shipped reference file.
    const auto out = ctx.work / "consistency.json";
    const int code = run_forge(ctx,
                               {"consistency", "--class-counts", "60000,1007,33088,5447,62637,31368,4099,27210",
                                "--reference", (testing::kDataDir / "reference_metric_table.json").string(), "--json"},
                               out);
    c.expect(code == 0, "cli exit " + std::to_string(code));
    if (code == 0) {
        const auto j = json::parse(testing::slurp(out));
        c.expect(j["total"] == 224856, "cli total");
        c.expect(j["reference_discrepancies"].size() == 1 && j["reference_discrepancies"][0]["swapped"].size() == 1,
                 "cli swap");
    }
    c.note << "SC " << n.sc[0] << "/" << n.sc[1] << "/" << n.sc[2] << ", CMI " << n.cmi[0] << "/" << n.cmi[1]
           << ", STAT " << n.stat[0] << "/" << n.stat[1] << "/" << n.stat[2]
           << (swap_flagged ? ", reference STAT T/0 swap flagged" : "");
}

ReliabilityMatrix random_matrix(Rng& rng) {
    ReliabilityMatrix m;
    const auto units = 2 + rng.below(40);
    const auto coders = 2 + rng.below(5);
    const auto cats = 2 + rng.below(6);
    for (std::uint64_t u = 0; u < units; ++u)
        for (std::uint64_t k = 0; k < coders; ++k) {
            if (rng.below(4) == 0) continue;
            const auto v = rng.below(3) == 0 ? rng.below(cats) : u % cats;
            m.set("u" + std::to_string(u), "c" + std::to_string(k), std::to_string(v));
        }
    return m;
}

void alpha_criterion(const Context&, Check& c) {
    Rng rng(20261017);
    int compared = 0;
    double worst = 0.0;
    while (compared < 100) {
        const auto m = random_matrix(rng);
        const auto want = testing::alpha_by_pair_enumeration(m);
        if (!want) continue;
        worst = std::max(worst, std::abs(krippendorff_alpha(m) - *want));
        ++compared;
    }
    c.expect(worst <= kAlphaOracleTol, "oracle deviation");

    ReliabilityMatrix perfect;
    for (int u = 0; u < 10; ++u)
        for (const char* a : {"a", "b", "c"}) perfect.set(std::to_string(u), a, u % 3 ? "X" : "Y");
    const double a_perfect = krippendorff_alpha(perfect);
    c.expect(a_perfect == 1.0, "perfect fixture");

    ReliabilityMatrix two;
    two.set("1", "x", "A");
    two.set("1", "y", "B");
    two.set("2", "x", "A");
    two.set("2", "y", "A");
    const double a_two = krippendorff_alpha(two);
    c.expect(a_two == 0.0, "{A,B}/{A,A} fixture");

    ReliabilityMatrix chance;
    Rng iid(99);
    for (int u = 0; u < 2000; ++u)
        for (const char* a : {"a", "b", "c"}) chance.set(std::to_string(u), a, std::to_string(iid.below(4)));
    const double a_chance = krippendorff_alpha(chance);
    c.expect(std::abs(a_chance) < kAlphaChanceBound, "chance alpha");
    c.note << std::setprecision(3) << "max oracle deviation " << worst << " over 100 matrices, perfect " << a_perfect
           << ", {A,B}/{A,A} " << a_two << ", i.i.d. " << a_chance;
}

void majority_criterion(const Context&, Check& c) {
    // 800 pairs, 3 annotators; pairs 17 and 503 get an Unsure majority, the
    // rest a 3-0 or 2-1 class majority (some with one Unsure vote).
    std::vector<ImageTextPair> pairs;
    for (int i = 0; i < 800; ++i) {
        pairs.push_back(make_pair("pair-" + std::to_string(i), "img", "text", {},
                                  triple_of_class(kAllClasses[static_cast<std::size_t>(i) % kClassCount]), {}));
    }
    SessionOptions so;
    so.clock = [] { return TimestampMs{0}; };
    AnnotationSession session(pairs, {"a1", "a2", "a3"}, so);
    std::vector<LabelRecord> records;
    for (int i = 0; i < 800; ++i) {
        const auto id = "pair-" + std::to_string(i);
        const std::string truth(class_name(kAllClasses[static_cast<std::size_t>(i) % kClassCount]));
        const std::string other(class_name(kAllClasses[static_cast<std::size_t>(i + 3) % kClassCount]));
        std::array<std::string, 3> v{truth, truth, truth};
        if (i == 17 || i == 503) v = {"Unsure", "Unsure", truth};
        else if (i % 5 == 1) v[2] = other;
        else if (i % 7 == 2) v[1] = "Unsure";
        for (int a = 0; a < 3; ++a) records.push_back(session.submit_label("a" + std::to_string(a + 1), id, v[static_cast<std::size_t>(a)]));
    }
    std::size_t resolved = 0, unsure = 0, none = 0;
    for (const auto& [id, o] : majority_vote(records)) {
        if (o.resolved()) ++resolved;
        else if (*o.excluded == Exclusion::UnsureMajority) ++unsure;
        else ++none;
    }
    std::size_t live = 0;
    for (const auto& [id, o] : session.agreement_snapshot().votes) live += o.resolved();
    c.expect(resolved == 798 && unsure == 2 && none == 0, "offline resolution");
    c.expect(live == 798, "live resolution");
    c.note << resolved << " of 800 resolved, " << unsure << " excluded (Unsure majority)";
}

double pct(const std::optional<double>& v) { return v ? 100.0 * *v : -1.0; }

void table_recompute(const Context&, Check& c) {
    double worst = 0.0;
    const auto classic = testing::maps_from_matrix(testing::kClassicConfusion);
    const auto r = classification_report(classic.predicted, classic.truth);
    for (std::size_t k = 0; k < kClassCount; ++k) {
        worst = std::max(worst, std::abs(pct(r.precision[k]) - testing::kClassicPrecision[k]));
        worst = std::max(worst, std::abs(pct(r.recall[k]) - testing::kClassicRecall[k]));
    }
    const auto auto_human = testing::maps_from_matrix(testing::kAutoVsHuman);
    std::map<std::string, ImageTextClass> automatic;
    for (const auto& [id, rc] : auto_human.predicted) automatic.emplace(id, rc.cls());
    const auto q = augmentation_quality_report(automatic, auto_human.truth);
    for (std::size_t k = 0; k < kClassCount; ++k) {
        worst = std::max(worst, std::abs(pct(q.precision[k]) - testing::kAutoVsHumanPrecision[k]));
        worst = std::max(worst, std::abs(pct(q.recall[k]) - testing::kAutoVsHumanRecall[k]));
    }
    c.expect(worst <= kTablePointTol, "row deviation");
    c.note << std::fixed << std::setprecision(3) << "32 classifier + 16 augmentation-quality rows, max deviation "
           << worst << " pp; Uncorrelated " << std::setprecision(1) << pct(r.precision[0]) << "%/"
           << pct(r.recall[0]) << "%";
}

void augmentation_criterion(const Context& ctx, Check& c) {
    const auto documented = parse_lexicon("tall\tsmall\nman\twoman\nin front of\tbehind\ngreen\tred\n");
    const std::string example = "tall man standing in front of a green car";
    const auto a = substitute_antonyms(example, documented);
    c.expect(a.text == "small woman standing behind a red car" && a.replacements == 4, "example (documented entries)");
    const auto shipped = load_lexicon(testing::kDataDir / "antonyms.tsv");
    const auto b = substitute_antonyms(example, shipped);
    c.expect(b.text == a.text && b.replacements == 4, "example (shipped lexicon)");

    Rng rng(4242);
    const std::vector<std::string> filler = {"the", "photo", "shows", "a", "near", "with", "blue-ish", "and"};
    const std::array<ImageTextClass, 3> positives = {ImageTextClass::Complementary, ImageTextClass::Illustration,
                                                     ImageTextClass::Anchorage};
    std::size_t checked = 0;
    for (int i = 0; i < 1000; ++i) {
        std::string text;
        for (auto n = 1 + rng.below(8); n > 0; --n) text += filler[rng.below(filler.size())] + " ";
        text += shipped.entries()[rng.below(shipped.size())].keyword;
        for (auto n = rng.below(5); n > 0; --n) text += " " + filler[rng.below(filler.size())];
        text += ".";
        const auto cls = positives[rng.below(3)];
        const auto p = make_pair(opaque_id(rng.next()), "img/" + std::to_string(i) + ".jpg", text,
                                 {"tag" + std::to_string(rng.below(9))}, triple_of_class(cls), {"src", 1, {}, 0});
        const auto n = derive_negative(p, shipped);
        const bool ok = n.image_ref == p.image_ref && n.auto_triple.cmi == p.auto_triple.cmi &&
                        n.auto_triple.stat == p.auto_triple.stat && n.auto_triple.sc == ScLevel::Neg &&
                        n.auto_class == RelationClass(negative_counterpart(cls)) && n.concept_tags == p.concept_tags &&
                        n.provenance.replacements >= 1 && n.text != p.text;
        if (!ok) {
            c.expect(false, "negative property broken for '" + text + "'");
            break;
        }
        ++checked;
    }
    bool rejected = false;
    try {
        derive_negative(make_pair("x", "i", "zzz qqq.", {}, triple_of_class(ImageTextClass::Anchorage), {}), shipped);
    } catch (const NoReplacementError&) {
        rejected = true;
    }
    c.expect(rejected, "zero-replacement input accepted");
    const int code = run_forge(ctx, {"augment", "--lexicon", (testing::kDataDir / "antonyms.tsv").string(), "--text",
                                     "zzz qqq"},
                               ctx.work / "augment-none.txt");
    c.expect(code == 1, "cli zero-replacement exit " + std::to_string(code));
    c.note << "\"" << a.text << "\" (" << a.replacements << "), " << checked
           << " negatives keep image/cmi/stat, zero-replacement rejected";
}

std::vector<Sample> random_samples(Rng& rng, std::size_t n, std::size_t dim, std::size_t classes) {
    std::vector<Sample> out(n);
    for (auto& s : out) {
        s.x.resize(dim);
        for (auto& v : s.x) v = rng.unit() * 2 - 1;
        s.label = rng.below(classes);
    }
    return out;
}

void classifier_criterion(const Context&, Check& c) {
    Rng rng(31337);
    const std::array<Head, 4> heads = {Head::Cmi, Head::Sc, Head::Stat, Head::Classic};
    double worst_grad = 0.0, worst_sum = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const Head h = heads[static_cast<std::size_t>(inst) % 4];
        const std::size_t in = 3 + rng.below(6), hidden = 2 + rng.below(6);
        BaselineModel m(h, in, hidden);
        for (auto* v : {&m.w1, &m.b1, &m.w2, &m.b2})
            for (auto& x : *v) x = rng.unit() * 2 - 1;
        const auto data = random_samples(rng, 1 + rng.below(10), in, head_arity(h));
        Gradients g;
        loss_and_gradient(m, data, &g);
        auto check = [&](std::vector<double>& param, const std::vector<double>& grad) {
            for (std::size_t i = 0; i < param.size(); ++i) {
                const double keep = param[i];
                param[i] = keep + kFdStep;
                const double up = loss_and_gradient(m, data, nullptr);
                param[i] = keep - kFdStep;
                const double down = loss_and_gradient(m, data, nullptr);
                param[i] = keep;
                const double fd = (up - down) / (2 * kFdStep);
                // Relative error with an absolute floor for near-zero entries
                // (dead ReLU units give exact zeros on both sides).
                const double denom = std::max({std::abs(fd), std::abs(grad[i]), 1e-6});
                worst_grad = std::max(worst_grad, std::abs(fd - grad[i]) / denom);
            }
        };
        check(m.w1, g.w1);
        check(m.b1, g.b1);
        check(m.w2, g.w2);
        check(m.b2, g.b2);
        for (const auto& s : data) {
            const auto p = predict_proba(m, s.x);
            double sum = 0;
            for (double v : p) sum += v;
            worst_sum = std::max(worst_sum, std::abs(sum - 1.0));
        }
    }
    c.expect(worst_grad <= kGradRelTol, "gradient check");
    c.expect(worst_sum <= kSoftmaxSumTol, "softmax sum");

    // Separable set: four Gaussian-free clusters on distinct axes.
    std::vector<Sample> data;
    Rng blob(5);
    for (std::size_t k = 0; k < 8; ++k)
        for (int i = 0; i < 25; ++i) {
            Sample s;
            s.x.assign(10, 0.0);
            for (auto& v : s.x) v = (blob.unit() - 0.5) * 0.3;
            s.x[k] += 1.0;
            s.label = k;
            data.push_back(std::move(s));
        }
    TrainConfig tc;
    tc.epochs = kSeparableEpochs;
    tc.hidden_dim = 32;
    tc.learning_rate = 1e-2;
    tc.seed = 1;
    const auto res = train(data, Head::Classic, tc);
    std::size_t correct = 0;
    for (const auto& s : data) correct += argmax(predict_proba(res.model, s.x)) == s.label;
    c.expect(correct == data.size(), "separable train accuracy");
    c.note << std::setprecision(2) << "max gradient rel. error " << worst_grad << " on 20 instances, max |sum p - 1| "
           << worst_sum << ", separable set " << correct << "/" << data.size() << " after " << kSeparableEpochs
           << " epochs";
}

struct PipelinePaths {
    fs::path corpus, models, classic_pred, cascade_pred;
};

std::map<std::string, json> read_prediction_lines(const fs::path& p) {
    std::map<std::string, json> out;
    std::istringstream in(testing::slurp(p));
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) {
            auto j = json::parse(line);
            out.emplace(j["pair_id"].get<std::string>(), j);
        }
    return out;
}

void pipeline_criterion(const Context& ctx, Check& c) {
    const auto dir = ctx.work / "pipeline";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const auto lexicon = (testing::kDataDir / "antonyms.tsv").string();
    const auto corpus = (dir / "corpus.jsonl").string();
    const auto models = (dir / "models").string();
    const auto seed = std::to_string(kPipelineSeed);

    int code = run_forge(ctx, {"build", "--config", (testing::kDataDir / "mini/config.json").string(), "--out", corpus},
                         dir / "build.txt");
    if (code != 0) return c.expect(false, "build exit " + std::to_string(code));
    const auto manifest = read_corpus(corpus);
    for (auto n : manifest.per_class_counts) c.expect(n == 50, "class count " + std::to_string(n));

    code = run_forge(ctx, {"train", "--corpus", corpus, "--lexicon", lexicon, "--out-dir", models, "--heads",
                           "classic,cmi,sc,stat", "--seed", seed},
                     dir / "train.txt");
    if (code != 0) return c.expect(false, "train exit " + std::to_string(code));
    for (const char* mode : {"classic", "cascade"}) {
        code = run_forge(ctx, {"predict", "--corpus", corpus, "--models", models, "--mode", mode, "--out",
                               (dir / (std::string(mode) + ".jsonl")).string()},
                         dir / (std::string("predict-") + mode + ".txt"));
        if (code != 0) return c.expect(false, std::string("predict ") + mode + " exit " + std::to_string(code));
    }
    code = run_forge(ctx, {"evaluate", "--predictions", (dir / "classic.jsonl").string(), "--corpus", corpus, "--json"},
                     dir / "eval-classic.json");
    if (code != 0) return c.expect(false, "evaluate exit " + std::to_string(code));

    std::map<std::string, const ImageTextPair*> by_id;
    for (const auto& p : manifest.pairs) by_id[p.id] = &p;
    const auto classic = read_prediction_lines(dir / "classic.jsonl");
    const auto cascade = read_prediction_lines(dir / "cascade.jsonl");

    // Majority-class baseline on the held-out truth.
    std::array<std::size_t, kClassCount> support{};
    std::size_t classic_correct = 0;
    for (const auto& [id, j] : classic) {
        const auto& truth = *by_id.at(id);
        ++support[truth.auto_class.index()];
        classic_correct += j["prediction"].get<std::string>() == class_name(truth.auto_class);
    }
    const double n_test = static_cast<double>(classic.size());
    const double baseline = static_cast<double>(*std::max_element(support.begin(), support.end())) / n_test;
    const double classic_acc = static_cast<double>(classic_correct) / n_test;
    c.expect(classic.size() >= 40, "test split too small");
    c.expect(classic_acc - baseline >= kBaselineMargin, "classic margin over baseline");

    const auto eval = json::parse(testing::slurp(dir / "eval-classic.json"));
    const auto acc_field = eval.contains("classification") ? eval["classification"]["accuracy"] : json();
    c.expect(acc_field.is_number() && std::abs(acc_field.get<double>() - classic_acc) < 1e-12,
             "evaluate accuracy disagrees with recount");

    std::size_t undefined = 0;
    for (const auto& [id, j] : cascade) undefined += j["prediction"] == "Undefined";
    const double undefined_rate = static_cast<double>(undefined) / static_cast<double>(cascade.size());

    // Per-head confidences, recomputed in process from the saved models.
    const auto summary = json::parse(testing::slurp(fs::path(models) / "train_summary.json"));
    const FeatureExtractor fx({summary["features"]["text_dims"].get<std::size_t>(),
                               summary["features"]["tag_dims"].get<std::size_t>()},
                              load_lexicon(lexicon));
    const auto cmi = load_model(fs::path(models) / "cmi.model.json", fx.schema_hash());
    const auto sc = load_model(fs::path(models) / "sc.model.json", fx.schema_hash());
    const auto stat = load_model(fs::path(models) / "stat.model.json", fx.schema_hash());
    const double fraction = summary["split"]["test_fraction"].get<double>();

    struct Row {
        double confidence;
        std::array<bool, 3> head_ok;
        bool cascade_ok;
    };
    std::vector<Row> rows;
    std::size_t replay_mismatch = 0;
    for (const auto& p : manifest.pairs) {
        if (!in_test_split(p.id, fraction, derive_seed(kPipelineSeed, "split"))) continue;
        ImageTextPair view = p;
        view.text = truncate_text(p.text, kTrainingTruncation.max_sentences, kTrainingTruncation.max_words_per_sentence);
        const auto f = fx.extract(view);
        const auto pc = predict_proba(cmi, f), ps = predict_proba(sc, f), pt = predict_proba(stat, f);
        const MetricTriple t{cmi_from_index(argmax(pc)), sc_from_index(argmax(ps)), stat_from_index(argmax(pt))};
        const auto predicted = classify_triple(t);
        const auto it = cascade.find(p.id);
        if (it == cascade.end() || it->second["prediction"].get<std::string>() != class_name(predicted)) ++replay_mismatch;
        rows.push_back({std::min({*std::max_element(pc.begin(), pc.end()), *std::max_element(ps.begin(), ps.end()),
                                  *std::max_element(pt.begin(), pt.end())}),
                        {t.cmi == p.auto_triple.cmi, t.sc == p.auto_triple.sc, t.stat == p.auto_triple.stat},
                        predicted == p.auto_class});
    }
    c.expect(replay_mismatch == 0 && rows.size() == cascade.size(), "in-process cascade disagrees with predict");

    // Largest most-confident prefix on which every head is >= 95% accurate.
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.confidence > b.confidence; });
    std::size_t subset = 0;
    std::array<std::size_t, 3> head_hits{};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (int h = 0; h < 3; ++h) head_hits[static_cast<std::size_t>(h)] += rows[i].head_ok[static_cast<std::size_t>(h)];
        const double n = static_cast<double>(i + 1);
        if (std::all_of(head_hits.begin(), head_hits.end(), [&](std::size_t x) { return x / n >= kHeadSubsetAccuracy; }))
            subset = i + 1;
    }
    std::size_t cascade_hits = 0;
    for (std::size_t i = 0; i < subset; ++i) cascade_hits += rows[i].cascade_ok;
    const double subset_acc = subset ? static_cast<double>(cascade_hits) / static_cast<double>(subset) : 0.0;
    c.expect(subset >= kMinSubset, "subset with all heads >= 95% too small (" + std::to_string(subset) + ")");
    c.expect(subset_acc >= kCascadeSubsetAccuracy, "cascade subset accuracy");

    c.note << std::fixed << std::setprecision(1) << "test " << classic.size() << " pairs, classic "
           << 100 * classic_acc << "% vs majority baseline " << 100 * baseline << "%, cascade Undefined "
           << undefined << " (" << 100 * undefined_rate << "%), cascade on " << subset << "-pair subset "
           << 100 * subset_acc << "%";
}

// Every subcommand twice with identical inputs; artifacts must match byte for byte.
void determinism_criterion(const Context& ctx, Check& c) {
    const auto dir = ctx.work / "determinism";
    fs::remove_all(dir);
    const auto data = testing::kDataDir;
    const auto lexicon = (data / "antonyms.tsv").string();
    std::size_t compared = 0;

    // Shared inputs produced once.
    fs::create_directories(dir / "shared");
    const auto corpus = (dir / "shared/corpus.jsonl").string();
    const auto models = (dir / "shared/models").string();
    if (run_forge(ctx, {"build", "--config", (data / "mini/config.json").string(), "--out", corpus}, dir / "shared/b.txt") != 0 ||
        run_forge(ctx, {"train", "--corpus", corpus, "--lexicon", lexicon, "--out-dir", models, "--heads", "classic,cmi,sc,stat",
                        "--epochs", "8", "--seed", "3"},
                  dir / "shared/t.txt") != 0 ||
        run_forge(ctx, {"predict", "--corpus", corpus, "--models", models, "--mode", "classic", "--out",
                        (dir / "shared/pred.jsonl").string()},
                  dir / "shared/p.txt") != 0) {
        return c.expect(false, "could not prepare shared inputs");
    }
    // Synthetic label export for evaluate.
    {
        SessionOptions so;
        so.clock = [] { return TimestampMs{1792210740000}; };
        const auto m = read_corpus(corpus);
        std::vector<ImageTextPair> first(m.pairs.begin(), m.pairs.begin() + 12);
        AnnotationSession s(first, {"a", "b", "c"}, so);
        for (std::size_t i = 0; i < first.size(); ++i)
            for (const char* a : {"a", "b", "c"})
                s.submit_label(a, first[i].id, (i + std::string(a).size()) % 4 ? class_name(first[i].auto_class) : "Unsure");
        testing::spit(dir / "shared/labels.jsonl", s.export_labels());
    }

    using Artifacts = std::vector<std::string>;  // relative paths inside the run dir
    struct Case {
        std::string name;
        std::function<std::vector<std::string>(const fs::path&)> args;
        Artifacts files;
    };
    const std::vector<Case> cases = {
        {"taxonomy", [](const fs::path&) { return std::vector<std::string>{"taxonomy", "--enumerate", "--json"}; }, {}},
        {"build",
         [&](const fs::path& r) {
             return std::vector<std::string>{"build", "--config", (data / "mini/config.json").string(), "--out",
                                             (r / "corpus.jsonl").string()};
         },
         {"corpus.jsonl", "corpus.jsonl.summary.json"}},
        {"augment",
         [&](const fs::path& r) {
             return std::vector<std::string>{"augment", "--lexicon", lexicon, "--in", corpus, "--out",
                                             (r / "neg.jsonl").string()};
         },
         {"neg.jsonl"}},
        {"train",
         [&](const fs::path& r) {
             return std::vector<std::string>{"train", "--corpus", corpus, "--lexicon", lexicon, "--out-dir",
                                             (r / "m").string(), "--heads", "classic,cmi,sc,stat", "--epochs", "8",
                                             "--seed", "3"};
         },
         {"m/classic.model.json", "m/cmi.model.json", "m/sc.model.json", "m/stat.model.json", "m/train_summary.json"}},
        {"predict",
         [&](const fs::path& r) {
             return std::vector<std::string>{"predict", "--corpus", corpus, "--models", models, "--mode", "cascade",
                                             "--split", "all", "--out", (r / "pred.jsonl").string()};
         },
         {"pred.jsonl"}},
        {"evaluate",
         [&](const fs::path&) {
             return std::vector<std::string>{"evaluate", "--predictions", (dir / "shared/pred.jsonl").string(), "--corpus",
                                             corpus, "--json"};
         },
         {}},
        {"evaluate-labels",
         [&](const fs::path&) {
             return std::vector<std::string>{"evaluate", "--corpus", corpus, "--labels",
                                             (dir / "shared/labels.jsonl").string(), "--json"};
         },
         {}},
        {"consistency",
         [&](const fs::path&) {
             return std::vector<std::string>{"consistency", "--manifest", corpus, "--reference",
                                             (data / "reference_metric_table.json").string(), "--json"};
         },
         {}},
    };

    std::vector<std::string> checked;
    for (const auto& k : cases) {
        std::array<std::string, 2> stdout_bytes;
        std::array<std::vector<std::string>, 2> file_bytes;
        bool ran = true;
        for (int run = 0; run < 2; ++run) {
            const auto r = dir / k.name / ("run" + std::to_string(run));
            fs::create_directories(r);
            const int code = run_forge(ctx, k.args(r), r / "stdout.txt");
            if (code != 0) {
                c.expect(false, k.name + " exit " + std::to_string(code));
                ran = false;
                break;
            }
            // Output paths differ between runs, so stdout is only compared for
            // commands that do not echo them.
            stdout_bytes[static_cast<std::size_t>(run)] = testing::slurp(r / "stdout.txt");
            for (const auto& f : k.files) file_bytes[static_cast<std::size_t>(run)].push_back(testing::slurp(r / f));
        }
        if (!ran) continue;
        if (k.files.empty()) {
            c.expect(stdout_bytes[0] == stdout_bytes[1] && !stdout_bytes[0].empty(), k.name + " output differs");
            ++compared;
        }
        for (std::size_t i = 0; i < k.files.size(); ++i) {
            c.expect(!file_bytes[0][i].empty() && file_bytes[0][i] == file_bytes[1][i], k.name + ": " + k.files[i] + " differs");
            ++compared;
        }
        checked.push_back(k.name);
    }
    c.note << compared << " artifacts identical across runs of";
    for (const auto& n : checked) c.note << " " << n;
}

struct Criterion {
    const char* name;
    double limit_seconds;
    void (*fn)(const Context&, Check&);
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"forge acceptance gate"};
    Context ctx;
    std::string forge_path, work;
    app.add_option("--forge", forge_path, "Path of the forge executable")->required();
    app.add_option("--work", work, "Scratch directory")->required();
    CLI11_PARSE(app, argc, argv);
    ctx.forge = fs::absolute(forge_path);
    ctx.work = fs::absolute(work);
    fs::create_directories(ctx.work);

    const std::vector<Criterion> criteria = {
        {"taxonomy-exhaustiveness", 1.0, taxonomy_exhaustive},
        {"class-to-metric-consistency", 1.0, table_consistency},
        {"krippendorff-alpha", 10.0, alpha_criterion},
        {"majority-vote", 1.0, majority_criterion},
        {"reference-table-recomputation", 1.0, table_recompute},
        {"augmentation", 5.0, augmentation_criterion},
        {"classifier-numerics", 60.0, classifier_criterion},
        {"end-to-end-pipeline", 300.0, pipeline_criterion},
        {"determinism", 300.0, determinism_criterion},
    };

    int failures = 0;
    for (const auto& k : criteria) {
        Check c;
        const auto start = std::chrono::steady_clock::now();
        try {
            k.fn(ctx, c);
        } catch (const std::exception& e) {
            c.expect(false, std::string("exception: ") + e.what());
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (secs > k.limit_seconds) {
            std::ostringstream m;
            m << std::fixed << std::setprecision(2) << "took " << secs << " s, limit " << k.limit_seconds << " s";
            c.expect(false, m.str());
        }
        std::cout << (c.ok ? "PASS " : "FAIL ") << k.name << ": " << c.note.str() << " [" << std::fixed
                  << std::setprecision(2) << secs << " s]" << std::endl;
        failures += !c.ok;
    }
    std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - static_cast<std::size_t>(failures) << "/"
              << criteria.size() << std::endl;
    return failures ? 1 : 0;
}
