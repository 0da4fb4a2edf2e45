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

#include "cli.hpp"

#include <csignal>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "forge/augment.hpp"
#include "forge/classifier.hpp"
#include "forge/corpus.hpp"
#include "forge/eval.hpp"
#include "forge/random.hpp"
#include "forge/server.hpp"
#include "forge/session.hpp"
#include "forge/taxonomy.hpp"
#include "forge/text.hpp"
#include "json.hpp"

namespace forge::cli {

namespace {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

constexpr const char* kSummaryFile = "train_summary.json";

std::string read_file(const fs::path& p, const char* what) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw Error(std::string("cannot open ") + what + " " + p.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

json read_json(const fs::path& p, const char* what) {
    try {
        return json::parse(read_file(p, what));
    } catch (const json::parse_error& e) {
        throw ParseError(p.string(), 0, std::string("malformed JSON: ") + e.what());
    }
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (auto t = text::trim(cur); !t.empty()) out.push_back(t);
    return out;
}

std::optional<Validity> parse_validity(std::string_view s) {
    for (auto v : {Validity::CaseA, Validity::CaseB, Validity::CaseC, Validity::CaseD}) {
        if (validity_name(v) == s) return v;
    }
    return std::nullopt;
}

json triple_json(const MetricTriple& t) {
    return {{"cmi", cmi_value(t.cmi)}, {"sc", sc_value(t.sc)}, {"stat", std::string(stat_value(t.stat))}};
}

std::string percent(std::optional<double> v) {
    if (!v) return "n/a";
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << *v * 100.0;
    return os.str();
}

json opt_json(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

// Text as seen by the classifier: training truncation profile applied.
ImageTextPair training_view(const ImageTextPair& p) {
    ImageTextPair q = p;
    q.text = truncate_text(p.text, kTrainingTruncation.max_sentences,
                           kTrainingTruncation.max_words_per_sentence);
    return q;
}

std::uint64_t split_seed(std::uint64_t seed) { return derive_seed(seed, "split"); }

// ---------------------------------------------------------------- taxonomy

struct TaxonomyArgs {
    bool enumerate = false;
    bool json = false;
};

int cmd_taxonomy(const TaxonomyArgs& a, std::ostream& out) {
    if (a.enumerate) {
        json rows = json::array();
        std::size_t valid = 0;
        std::ostringstream os;
        os << "CMI  SC  STAT  Result\n";
        for (const auto& t : enumerate_triples()) {
            const auto r = classify_triple(t);
            valid += !r.is_undefined();
            const std::string result =
                r.is_undefined() ? "Undefined (" + std::string(validity_name(r.reason())) + ")"
                                 : class_name(r);
            os << std::setw(3) << cmi_value(t.cmi) << std::setw(4) << sc_value(t.sc)
               << std::setw(6) << stat_value(t.stat) << "  " << result << "\n";
            json row;
            row["triple"] = triple_json(t);
            row["class"] = class_name(r);
            row["validity"] = std::string(validity_name(validity_reason(t)));
            rows.push_back(std::move(row));
        }
        os << valid << " of " << rows.size() << " triples are valid classes\n";
        if (a.json) {
            out << json{{"triples", rows}, {"valid", valid}, {"total", rows.size()}}.dump(2) << "\n";
        } else {
            out << os.str();
        }
        return kExitOk;
    }
    json classes = json::array();
    for (auto c : kAllClasses) {
        classes.push_back({{"class", std::string(class_name(c))}, {"triple", triple_json(triple_of_class(c))}});
    }
    if (a.json) {
        out << json{{"classes", classes}}.dump(2) << "\n";
    } else {
        out << "Class             CMI  SC  STAT\n";
        for (auto c : kAllClasses) {
            const auto t = triple_of_class(c);
            const std::string name(class_name(c));
            out << name << std::string(18 - name.size(), ' ') << std::setw(3) << cmi_value(t.cmi)
                << std::setw(4) << sc_value(t.sc) << std::setw(6) << stat_value(t.stat) << "\n";
        }
    }
    return kExitOk;
}

// ---------------------------------------------------------------- build

struct BuildArgs {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool json = false;
};

int cmd_build(const BuildArgs& a, std::ostream& out, std::ostream& err) {
    auto config = load_corpus_config(a.config);
    if (a.seed) config.seed = *a.seed;
    const auto manifest = build_corpus(config);
    write_corpus(manifest, a.out);
    for (const auto& s : manifest.stats) {
        for (const auto& w : s.warnings) err << "warning: " << s.generator << ": " << w << "\n";
    }
    if (a.json) {
        json j;
        j["corpus"] = a.out;
        j["summary"] = summary_path(a.out).string();
        j["pairs"] = manifest.pairs.size();
        json counts;
        for (auto c : kAllClasses) counts[std::string(class_name(c))] = manifest.per_class_counts[static_cast<std::size_t>(c)];
        j["class_counts"] = counts;
        json gens = json::array();
        for (const auto& s : manifest.stats) {
            gens.push_back({{"generator", s.generator}, {"produced", s.produced}, {"rejected", s.rejected},
                            {"skipped", s.skipped}, {"dropped", s.dropped}});
        }
        j["generators"] = gens;
        out << j.dump(2) << "\n";
    } else {
        out << format_class_table(manifest.per_class_counts);
        for (const auto& s : manifest.stats) {
            out << s.generator << ": produced " << s.produced << ", rejected " << s.rejected
                << ", skipped " << s.skipped << ", dropped " << s.dropped << "\n";
        }
        out << "wrote " << a.out << " and " << summary_path(a.out).string() << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- augment

struct AugmentArgs {
    std::string lexicon;
    std::string input;
    std::string out;
    std::string text;
    bool json = false;
};

int cmd_augment(const AugmentArgs& a, std::ostream& out, std::ostream& err) {
    const auto lex = load_lexicon(a.lexicon);
    if (!a.text.empty()) {
        const auto s = substitute_antonyms(a.text, lex);
        if (a.json) {
            out << json{{"text", s.text}, {"replacements", s.replacements}}.dump(2) << "\n";
        } else {
            out << s.text << "\n" << "replacements: " << s.replacements << "\n";
        }
        if (s.replacements == 0) {
            err << "no lexicon keyword in text; a negative cannot be justified\n";
            return kExitValidation;
        }
        return kExitOk;
    }
    if (a.input.empty() || a.out.empty()) {
        err << "augment needs --text, or --in and --out\n";
        return kExitUsage;
    }
    const auto corpus = read_corpus(a.input);
    std::string body;
    std::size_t produced = 0, rejected = 0, skipped = 0;
    for (const auto& p : corpus.pairs) {
        const bool positive = !p.auto_class.is_undefined() &&
                              (p.auto_class.cls() == ImageTextClass::Complementary ||
                               p.auto_class.cls() == ImageTextClass::Illustration ||
                               p.auto_class.cls() == ImageTextClass::Anchorage);
        if (!positive) {
            ++skipped;
            continue;
        }
        try {
            body += pair_to_json(derive_negative(p, lex));
            body += '\n';
            ++produced;
        } catch (const NoReplacementError& e) {
            err << "rejected: " << e.what() << "\n";
            ++rejected;
        }
    }
    write_file_atomic(a.out, body);
    if (a.json) {
        out << json{{"out", a.out}, {"produced", produced}, {"rejected", rejected}, {"skipped", skipped}}.dump(2)
            << "\n";
    } else {
        out << "negatives: " << produced << ", rejected (no keyword): " << rejected
            << ", skipped (not a positive class): " << skipped << "\nwrote " << a.out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- train

struct TrainArgs {
    std::string corpus;
    std::string lexicon;
    std::string out_dir;
    std::string heads = "classic,cmi,sc,stat";
    std::size_t epochs = 50;
    double learning_rate = 1e-3;
    std::size_t batch_size = 12;
    std::size_t hidden = 128;
    std::uint64_t seed = 0;
    bool balance = false;
    double test_fraction = 0.2;
    std::size_t text_dims = 1024;
    std::size_t tag_dims = 256;
    bool json = false;
};

std::vector<Head> parse_heads(const std::string& list) {
    std::vector<Head> heads;
    for (const auto& name : split_list(list)) {
        const auto h = parse_head(name);
        if (!h) throw Error("unknown head '" + name + "' (expected classic, cmi, sc, stat)");
        if (std::find(heads.begin(), heads.end(), *h) == heads.end()) heads.push_back(*h);
    }
    if (heads.empty()) throw Error("no heads selected");
    return heads;
}

std::string model_file(Head h) { return text::to_lower(head_name(h)) + ".model.json"; }

int cmd_train(const TrainArgs& a, std::ostream& out) {
    if (!(a.test_fraction >= 0.0 && a.test_fraction < 1.0)) {
        throw Error("--test-fraction must be in [0, 1)");
    }
    const auto heads = parse_heads(a.heads);
    const auto corpus = read_corpus(a.corpus);
    const FeatureExtractor fx(FeatureSchema{a.text_dims, a.tag_dims}, load_lexicon(a.lexicon));

    std::vector<const ImageTextPair*> train_pairs;
    std::vector<FeatureVector> features;
    std::size_t test_count = 0;
    for (const auto& p : corpus.pairs) {
        if (p.auto_class.is_undefined()) throw Error("corpus pair " + p.id + " has an Undefined label");
        if (in_test_split(p.id, a.test_fraction, split_seed(a.seed))) {
            ++test_count;
            continue;
        }
        train_pairs.push_back(&p);
        features.push_back(fx.extract(training_view(p)));
    }
    if (train_pairs.empty()) throw Error("training split is empty");

    TrainConfig tc;
    tc.epochs = a.epochs;
    tc.learning_rate = a.learning_rate;
    tc.batch_size = a.batch_size;
    tc.hidden_dim = a.hidden;
    tc.balance_classes = a.balance;

    fs::create_directories(a.out_dir);
    json summary;
    summary["format"] = "forge-train-summary";
    summary["version"] = 1;
    summary["config"] = {{"corpus", a.corpus},         {"lexicon", a.lexicon},
                         {"heads", a.heads},           {"epochs", a.epochs},
                         {"learning_rate", a.learning_rate}, {"batch_size", a.batch_size},
                         {"hidden", a.hidden},         {"seed", a.seed},
                         {"balance", a.balance},       {"test_fraction", a.test_fraction},
                         {"text_dims", a.text_dims},   {"tag_dims", a.tag_dims}};
    summary["features"] = {{"text_dims", a.text_dims},
                           {"tag_dims", a.tag_dims},
                           {"schema_hash", opaque_id(fx.schema_hash())}};
    summary["split"] = {{"seed", a.seed},
                        {"test_fraction", a.test_fraction},
                        {"train", train_pairs.size()},
                        {"test", test_count}};
    json head_info;
    std::ostringstream report;
    for (Head h : heads) {
        std::vector<Sample> samples;
        samples.reserve(train_pairs.size());
        for (std::size_t i = 0; i < train_pairs.size(); ++i) {
            samples.push_back({features[i], head_label(h, *train_pairs[i])});
        }
        tc.seed = derive_seed(a.seed, "train:" + std::string(head_name(h)));
        const auto result = train(samples, h, tc, fx.schema_hash());
        save_model(result.model, fs::path(a.out_dir) / model_file(h));
        std::size_t correct = 0;
        for (const auto& s : samples) correct += argmax(predict_proba(result.model, s.x)) == s.label;
        const double acc = static_cast<double>(correct) / static_cast<double>(samples.size());
        head_info[text::to_lower(head_name(h))] = {{"file", model_file(h)},
                                                   {"final_loss", result.model.training.final_loss},
                                                   {"train_accuracy", acc},
                                                   {"loss_trace", result.loss_trace}};
        report << std::left << std::setw(8) << head_name(h) << " final loss "
               << std::setprecision(4) << result.model.training.final_loss << ", train accuracy "
               << percent(acc) << "%\n";
    }
    summary["heads"] = head_info;
    write_file_atomic(fs::path(a.out_dir) / kSummaryFile, summary.dump(2) + "\n");
    if (a.json) {
        json j = summary;
        for (auto& [k, v] : j["heads"].items()) v.erase("loss_trace");
        out << j.dump(2) << "\n";
    } else {
        out << "train " << train_pairs.size() << " / test " << test_count << " pairs\n" << report.str()
            << "wrote models to " << a.out_dir << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string corpus;
    std::string models;
    std::string lexicon;
    std::string mode = "classic";
    std::string split = "test";
    std::string out;
    bool json = false;
};

int cmd_predict(const PredictArgs& a, std::ostream& out) {
    if (a.mode != "classic" && a.mode != "cascade") throw Error("--mode must be classic or cascade");
    if (a.split != "test" && a.split != "train" && a.split != "all") {
        throw Error("--split must be test, train or all");
    }
    const fs::path dir(a.models);
    const auto summary = read_json(dir / kSummaryFile, "training summary");
    const FeatureSchema schema{summary.at("features").at("text_dims").get<std::size_t>(),
                               summary.at("features").at("tag_dims").get<std::size_t>()};
    const std::string lex_path =
        a.lexicon.empty() ? summary.at("config").at("lexicon").get<std::string>() : a.lexicon;
    const FeatureExtractor fx(schema, load_lexicon(lex_path));
    const double fraction = summary.at("split").at("test_fraction").get<double>();
    const auto seed = summary.at("split").at("seed").get<std::uint64_t>();

    std::optional<BaselineModel> classic, cmi, sc, stat;
    if (a.mode == "classic") {
        classic = load_model(dir / model_file(Head::Classic), fx.schema_hash());
    } else {
        cmi = load_model(dir / model_file(Head::Cmi), fx.schema_hash());
        sc = load_model(dir / model_file(Head::Sc), fx.schema_hash());
        stat = load_model(dir / model_file(Head::Stat), fx.schema_hash());
    }

    const auto corpus = read_corpus(a.corpus);
    std::string body;
    std::size_t n = 0, undefined = 0;
    for (const auto& p : corpus.pairs) {
        const bool test = in_test_split(p.id, fraction, split_seed(seed));
        if ((a.split == "test" && !test) || (a.split == "train" && test)) continue;
        const auto f = fx.extract(training_view(p));
        json line;
        line["pair_id"] = p.id;
        if (classic) {
            line["prediction"] = class_name(classic_predict(*classic, f));
        } else {
            const auto t = cascade_triple(*cmi, *sc, *stat, f);
            const auto r = classify_triple(t);
            line["prediction"] = class_name(r);
            if (r.is_undefined()) {
                line["reason"] = std::string(validity_name(r.reason()));
                ++undefined;
            }
            line["triple"] = triple_json(t);
        }
        body += line.dump();
        body += '\n';
        ++n;
    }
    if (!a.out.empty()) write_file_atomic(a.out, body);
    const double rate = n ? static_cast<double>(undefined) / static_cast<double>(n) : 0.0;
    if (a.json) {
        json j{{"mode", a.mode}, {"split", a.split}, {"predictions", n}, {"undefined", undefined},
               {"undefined_rate", rate}};
        if (!a.out.empty()) j["out"] = a.out;
        out << j.dump(2) << "\n";
    } else if (a.out.empty()) {
        out << body;
    } else {
        out << n << " predictions (" << a.mode << ", " << a.split << " split)";
        if (a.mode == "cascade") out << ", Undefined " << undefined << " (" << percent(rate) << "%)";
        out << "\nwrote " << a.out << "\n";
    }
    return kExitOk;
}

// ---------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string predictions;
    std::string corpus;
    std::string labels;
    bool unsure_as_category = true;
    bool json = false;
};

std::map<std::string, RelationClass> read_predictions(const fs::path& p) {
    std::map<std::string, RelationClass> out;
    std::istringstream in(read_file(p, "predictions"));
    std::string line;
    std::size_t no = 0;
    while (std::getline(in, line)) {
        ++no;
        if (text::trim(line).empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error&) {
            throw ParseError(p.string(), no, "malformed JSON");
        }
        if (!j.is_object() || !j.contains("pair_id") || !j.contains("prediction")) {
            throw ParseError(p.string(), no, "prediction lines need pair_id and prediction");
        }
        std::optional<Validity> reason;
        if (j.contains("reason")) reason = parse_validity(j["reason"].get<std::string>());
        const auto r = parse_relation_class(j["prediction"].get<std::string>(), reason);
        if (!r) throw ParseError(p.string(), no, "unknown class in prediction");
        out.insert_or_assign(j["pair_id"].get<std::string>(), *r);
    }
    return out;
}

json eval_json(const EvalReport& r) { return json::parse(report_json(r)); }

int cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
    json result;
    std::ostringstream text_out;
    std::map<std::string, ImageTextClass> truth;

    if (!a.labels.empty()) {
        const auto records = import_labels_jsonl(read_file(a.labels, "label export"), a.labels);
        const auto snap = agreement_from_records(records, a.unsure_as_category);
        std::size_t unsure = 0, none = 0;
        for (const auto& [id, v] : snap.votes) {
            if (v.resolved()) {
                truth.emplace(id, *v.cls);
            } else {
                (*v.excluded == Exclusion::UnsureMajority ? unsure : none)++;
            }
        }
        result["agreement"] = {{"alpha", opt_json(snap.alpha)},
                               {"status", snap.status},
                               {"pairable_units", snap.pairable_units},
                               {"unsure_as_category", a.unsure_as_category}};
        result["votes"] = {{"pairs", snap.votes.size()},
                           {"resolved", truth.size()},
                           {"excluded_unsure_majority", unsure},
                           {"excluded_no_majority", none}};
        text_out << "Krippendorff's alpha: "
                 << (snap.alpha ? std::to_string(*snap.alpha) : snap.status) << " over "
                 << snap.pairable_units << " pairs\n"
                 << "majority vote: " << truth.size() << " resolved, " << unsure
                 << " excluded (unsure-majority), " << none << " excluded (no-majority)\n";
    }

    std::optional<CorpusManifest> corpus;
    if (!a.corpus.empty()) corpus = read_corpus(a.corpus);

    if (corpus && !a.labels.empty()) {
        std::map<std::string, ImageTextClass> automatic;
        for (const auto& p : corpus->pairs) {
            if (!p.auto_class.is_undefined()) automatic.emplace(p.id, p.auto_class.cls());
        }
        const auto q = augmentation_quality_report(automatic, truth);
        result["augmentation_quality"] = eval_json(q);
        text_out << "\nAutomatic labels vs human majority\n" << format_quality_table(q);
    }

    if (!a.predictions.empty()) {
        std::map<std::string, ImageTextClass> reference = truth;
        if (a.labels.empty()) {
            if (!corpus) {
                err << "evaluate --predictions needs --corpus or --labels for the ground truth\n";
                return kExitUsage;
            }
            for (const auto& p : corpus->pairs) {
                if (!p.auto_class.is_undefined()) reference.emplace(p.id, p.auto_class.cls());
            }
        }
        const auto r = classification_report(read_predictions(a.predictions), reference);
        result["classification"] = eval_json(r);
        text_out << "\n" << format_report_table(r) << "Undefined predictions: " << r.undefined_predictions
                 << " of " << r.total << "\n";
    }

    if (result.empty()) {
        err << "evaluate needs --predictions, --labels or both\n";
        return kExitUsage;
    }
    if (a.json) {
        out << result.dump(2) << "\n";
    } else {
        auto s = text_out.str();
        if (!s.empty() && s.front() == '\n') s.erase(0, 1);
        out << s;
    }
    return kExitOk;
}

// ---------------------------------------------------------------- consistency

struct ConsistencyArgs {
    std::string manifest;
    std::string class_counts;
    std::string reference;
    bool json = false;
};

int cmd_consistency(const ConsistencyArgs& a, std::ostream& out, std::ostream& err) {
    ConsistencyReport rep;
    if (!a.manifest.empty()) {
        rep = corpus_consistency_report(read_corpus(a.manifest));
    } else if (!a.class_counts.empty()) {
        const auto parts = split_list(a.class_counts);
        if (parts.size() != kClassCount) throw Error("--class-counts needs 8 comma-separated counts");
        std::array<std::size_t, kClassCount> counts{};
        for (std::size_t i = 0; i < kClassCount; ++i) {
            std::size_t used = 0;
            try {
                counts[i] = std::stoull(parts[i], &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != parts[i].size()) throw Error("invalid count '" + parts[i] + "'");
        }
        rep = consistency_from_class_counts(counts);
    } else {
        err << "consistency needs --manifest or --class-counts\n";
        return kExitUsage;
    }

    std::vector<MetricDiscrepancy> diffs;
    if (!a.reference.empty()) {
        diffs = compare_metric_counts(rep.counts, parse_metric_reference(read_file(a.reference, "reference")));
    }
    const bool ok = rep.mismatches.empty() && rep.totals_consistent;

    if (a.json) {
        json j;
        j["total"] = rep.total;
        json cc;
        for (auto c : kAllClasses) cc[std::string(class_name(c))] = rep.class_counts[static_cast<std::size_t>(c)];
        j["class_counts"] = cc;
        j["metric_counts"] = json::parse(metric_counts_json(rep.counts));
        j["undefined_pairs"] = rep.mismatches;
        j["totals_consistent"] = rep.totals_consistent;
        json d = json::array();
        for (const auto& x : diffs) {
            json sw = json::array();
            for (const auto& [p, q] : x.swapped) sw.push_back({p, q});
            d.push_back({{"dimension", x.dimension}, {"rows", x.rows}, {"swapped", sw}});
        }
        j["reference_discrepancies"] = d;
        j["ok"] = ok;
        out << j.dump(2) << "\n";
    } else {
        out << format_metric_table(rep.counts) << "Total      " << rep.total << "\n";
        if (!rep.totals_consistent) out << "per-metric totals disagree with the class total\n";
        for (const auto& id : rep.mismatches) out << "Undefined: " << id << "\n";
        for (const auto& x : diffs) {
            out << "reference differs in " << x.dimension << ":";
            for (const auto& r : x.rows) out << " [" << r << "]";
            out << "\n";
            for (const auto& [p, q] : x.swapped) {
                out << "  reference rows " << p << " and " << q << " are swapped\n";
            }
        }
    }
    return ok ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------- annotate-serve

struct ServeArgs {
    std::string corpus;
    std::string annotators;
    std::string log;
    std::string addr;
    std::string media_root;
    std::string ui_root;
    std::uint64_t seed = 0;
    bool unsure_as_category = true;
};

AnnotationServer* g_server = nullptr;

extern "C" void on_signal(int) {
    if (g_server) g_server->stop();
}

int cmd_serve(const ServeArgs& a, std::ostream& out) {
    auto corpus = read_corpus(a.corpus);
    SessionOptions so;
    so.seed = a.seed;
    so.unsure_as_category = a.unsure_as_category;
    if (!a.log.empty()) so.log_path = a.log;
    AnnotationSession session(std::move(corpus.pairs), split_list(a.annotators), so);
    if (session.recovered_torn_bytes()) {
        out << "dropped " << session.recovered_torn_bytes() << " bytes of a torn last log line\n";
    }

    ServerOptions opts;
    apply_environment(opts);
    if (!a.addr.empty()) apply_address(opts, a.addr);
    if (!a.media_root.empty()) opts.media_root = a.media_root;
    if (!a.ui_root.empty()) opts.ui_root = a.ui_root;

    AnnotationServer server(session, opts);
    const int port = server.bind();
    out << "serving " << session.pair_count() << " pairs to " << session.annotators().size()
        << " annotators on http://" << opts.host << ":" << port << "/\n"
        << std::flush;
    g_server = &server;
    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    server.listen();
    g_server = nullptr;
    return kExitOk;
}

}  // namespace

std::vector<std::string> expand_config(const std::vector<std::string>& args) {
    std::size_t sub = 0;
    while (sub < args.size() && !args[sub].empty() && args[sub][0] == '-') ++sub;
    if (sub >= args.size() || args[sub] == "build") return args;

    std::vector<std::string> rest;
    std::optional<std::string> config;
    for (std::size_t i = sub + 1; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (!config) return args;

    const auto j = read_json(*config, "config");
    if (!j.is_object()) throw ParseError(*config, 0, "config must be a JSON object of flag values");
    std::vector<std::string> out(args.begin(), args.begin() + static_cast<std::ptrdiff_t>(sub) + 1);
    for (const auto& [key, value] : j.items()) {
        const std::string flag = "--" + key;
        if (value.is_boolean()) {
            out.push_back(flag + "=" + (value.get<bool>() ? "true" : "false"));
        } else if (value.is_string()) {
            out.push_back(flag);
            out.push_back(value.get<std::string>());
        } else if (value.is_number()) {
            out.push_back(flag);
            out.push_back(value.dump());
        } else if (value.is_array()) {
            std::string joined;
            for (const auto& e : value) {
                if (!joined.empty()) joined += ',';
                joined += e.is_string() ? e.get<std::string>() : e.dump();
            }
            out.push_back(flag);
            out.push_back(joined);
        } else {
            throw ParseError(*config, 0, "unsupported value for '" + key + "'");
        }
    }
    out.insert(out.end(), rest.begin(), rest.end());
    return out;
}

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Image-text relation toolkit: corpus synthesis, baselines and evaluation.", "forge"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);
    app.fallthrough(false);

    TaxonomyArgs tax;
    auto* c_tax = app.add_subcommand("taxonomy", "Print the class table or enumerate all metric triples");
    c_tax->add_flag("--enumerate", tax.enumerate, "List all 18 triples with their class or invalid case");
    c_tax->add_flag("--json", tax.json, "Machine-readable output");

    BuildArgs build;
    std::uint64_t build_seed = 0;
    auto* c_build = app.add_subcommand("build", "Synthesize a labeled corpus from source manifests");
    c_build->add_option("--config", build.config, "Corpus config (JSON)")->required()->check(CLI::ExistingFile);
    c_build->add_option("--out", build.out, "Output corpus path (JSONL); a .summary.json is written beside it")
        ->required();
    auto* build_seed_opt = c_build->add_option("--seed", build_seed, "Override the config seed");
    c_build->add_flag("--json", build.json, "Machine-readable output");

    AugmentArgs aug;
    auto* c_aug = app.add_subcommand("augment", "Antonym substitution on a text or derive negatives of a corpus");
    c_aug->add_option("--lexicon", aug.lexicon, "Antonym lexicon (TSV)")->required()->check(CLI::ExistingFile);
    c_aug->add_option("--text", aug.text, "Substitute a single text and print the result");
    c_aug->add_option("--in", aug.input, "Corpus whose positive pairs get negatives")->check(CLI::ExistingFile);
    c_aug->add_option("--out", aug.out, "Output JSONL of derived negatives");
    c_aug->add_flag("--json", aug.json, "Machine-readable output");

    TrainArgs tr;
    auto* c_train = app.add_subcommand("train", "Train classic and metric heads on the training split");
    c_train->add_option("--corpus", tr.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    c_train->add_option("--lexicon", tr.lexicon, "Antonym lexicon used by the features")->required()->check(CLI::ExistingFile);
    c_train->add_option("--out-dir", tr.out_dir, "Directory for models and train_summary.json")->required();
    c_train->add_option("--heads", tr.heads, "Comma-separated heads: classic, cmi, sc, stat")->capture_default_str();
    c_train->add_option("--epochs", tr.epochs, "Training epochs")->capture_default_str();
    c_train->add_option("--learning-rate", tr.learning_rate, "Adam learning rate")->capture_default_str();
    c_train->add_option("--batch-size", tr.batch_size, "Minibatch size")->capture_default_str();
    c_train->add_option("--hidden", tr.hidden, "Hidden layer width")->capture_default_str();
    c_train->add_option("--seed", tr.seed, "Seed for the split, initialization and batch order")->capture_default_str();
    c_train->add_flag("--balance", tr.balance, "Inverse-frequency class weights in the loss");
    c_train->add_option("--test-fraction", tr.test_fraction, "Fraction of pairs held out by id hash")->capture_default_str();
    c_train->add_option("--text-dims", tr.text_dims, "Hashed text buckets")->capture_default_str();
    c_train->add_option("--tag-dims", tr.tag_dims, "Hashed tag buckets")->capture_default_str();
    c_train->add_flag("--json", tr.json, "Machine-readable output");

    PredictArgs pr;
    auto* c_pred = app.add_subcommand("predict", "Predict classes with trained models");
    c_pred->add_option("--corpus", pr.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    c_pred->add_option("--models", pr.models, "Directory written by train")->required()->check(CLI::ExistingDirectory);
    c_pred->add_option("--lexicon", pr.lexicon, "Lexicon (defaults to the one recorded at training)");
    c_pred->add_option("--mode", pr.mode, "classic or cascade")->capture_default_str();
    c_pred->add_option("--split", pr.split, "test, train or all")->capture_default_str();
    c_pred->add_option("--out", pr.out, "Predictions JSONL (printed when omitted)");
    c_pred->add_flag("--json", pr.json, "Machine-readable summary");

    EvaluateArgs ev;
    auto* c_eval = app.add_subcommand("evaluate", "Score predictions and annotations");
    c_eval->add_option("--predictions", ev.predictions, "Predictions JSONL")->check(CLI::ExistingFile);
    c_eval->add_option("--corpus", ev.corpus, "Corpus JSONL (automatic labels)")->check(CLI::ExistingFile);
    c_eval->add_option("--labels", ev.labels, "Label export from annotate-serve")->check(CLI::ExistingFile);
    c_eval->add_option("--unsure-as-category", ev.unsure_as_category,
                       "Count Unsure as its own category in alpha")
        ->capture_default_str();
    c_eval->add_flag("--json", ev.json, "Machine-readable output");

    ConsistencyArgs co;
    auto* c_cons = app.add_subcommand("consistency", "Aggregate class counts into metric counts");
    c_cons->add_option("--manifest", co.manifest, "Corpus JSONL")->check(CLI::ExistingFile);
    c_cons->add_option("--class-counts", co.class_counts, "Eight comma-separated class counts");
    c_cons->add_option("--reference", co.reference, "Reference metric table (JSON keyed by row label)")
        ->check(CLI::ExistingFile);
    c_cons->add_flag("--json", co.json, "Machine-readable output");

    ServeArgs sv;
    auto* c_serve = app.add_subcommand("annotate-serve", "Serve the annotation API");
    c_serve->add_option("--corpus", sv.corpus, "Corpus JSONL")->required()->check(CLI::ExistingFile);
    c_serve->add_option("--annotators", sv.annotators, "Comma-separated annotator ids")->required();
    c_serve->add_option("--log", sv.log, "Append-only label log (replayed on start)");
    c_serve->add_option("--addr", sv.addr, "host:port (default FORGE_ADDR or 127.0.0.1:8080)");
    c_serve->add_option("--media-root", sv.media_root, "Image directory (default FORGE_MEDIA_ROOT)");
    c_serve->add_option("--ui-root", sv.ui_root, "Directory with the browser UI bundle");
    c_serve->add_option("--seed", sv.seed, "Seed for per-annotator serving order")->capture_default_str();
    c_serve->add_option("--unsure-as-category", sv.unsure_as_category,
                        "Count Unsure as its own category in alpha")
        ->capture_default_str();

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    std::vector<const char*> argv{"forge"};
    for (const auto& s : args) argv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const auto subs = app.get_subcommands();
        err << (subs.empty() ? app.help() : subs.front()->help());
        return kExitUsage;
    }

    try {
        if (c_tax->parsed()) return cmd_taxonomy(tax, out);
        if (c_build->parsed()) {
            if (build_seed_opt->count()) build.seed = build_seed;
            return cmd_build(build, out, err);
        }
        if (c_aug->parsed()) return cmd_augment(aug, out, err);
        if (c_train->parsed()) return cmd_train(tr, out);
        if (c_pred->parsed()) return cmd_predict(pr, out);
        if (c_eval->parsed()) return cmd_evaluate(ev, out, err);
        if (c_cons->parsed()) return cmd_consistency(co, out, err);
        if (c_serve->parsed()) return cmd_serve(sv, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitUsage;
}

}  // namespace forge::cli
