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

#include "forge/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_set>

#include "forge/corpus.hpp"
#include "forge/random.hpp"
#include "forge/text.hpp"
#include "json_util.hpp"

namespace forge {

namespace {

using detail::ordered_json;

void normalize_l2(std::span<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    if (s == 0.0) return;
    const double inv = 1.0 / std::sqrt(s);
    for (double& x : v) x *= inv;
}

std::string hex64(std::uint64_t v) { return opaque_id(v); }

std::optional<std::uint64_t> parse_hex64(std::string_view s) {
    if (s.size() != 16) return std::nullopt;
    std::uint64_t v = 0;
    for (char c : s) {
        v <<= 4;
        if (c >= '0' && c <= '9') v |= static_cast<std::uint64_t>(c - '0');
        else if (c >= 'a' && c <= 'f') v |= static_cast<std::uint64_t>(c - 'a' + 10);
        else return std::nullopt;
    }
    return v;
}

void check_dim(const BaselineModel& m, std::span<const double> x) {
    if (x.size() != m.input_dim) {
        throw DimensionError("feature vector has " + std::to_string(x.size()) +
                             " values, model expects " + std::to_string(m.input_dim));
    }
}

// Forward pass keeping the hidden activations.
void forward(const BaselineModel& m, std::span<const double> x, std::vector<double>& hidden,
             std::vector<double>& out, std::vector<std::size_t>& nz) {
    nz.clear();
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] != 0.0) nz.push_back(i);
    }
    hidden.assign(m.hidden_dim, 0.0);
    for (std::size_t j = 0; j < m.hidden_dim; ++j) {
        const double* row = m.w1.data() + j * m.input_dim;
        double acc = m.b1[j];
        for (std::size_t i : nz) acc += row[i] * x[i];
        hidden[j] = acc > 0.0 ? acc : 0.0;
    }
    out.assign(m.outputs, 0.0);
    for (std::size_t k = 0; k < m.outputs; ++k) {
        const double* row = m.w2.data() + k * m.hidden_dim;
        double acc = m.b2[k];
        for (std::size_t j = 0; j < m.hidden_dim; ++j) acc += row[j] * hidden[j];
        out[k] = acc;
    }
}

void validate_order(std::array<Head, 3> order) {
    std::set<Head> seen(order.begin(), order.end());
    if (seen.size() != 3 || seen.count(Head::Classic)) {
        throw std::invalid_argument("cascade order must be a permutation of CMI, SC, STAT");
    }
}

}  // namespace

std::size_t head_arity(Head h) {
    switch (h) {
        case Head::Cmi: return kCmiLevels;
        case Head::Sc: return kScLevels;
        case Head::Stat: return kStatLevels;
        case Head::Classic: return kClassCount;
    }
    return 0;
}

std::string_view head_name(Head h) {
    switch (h) {
        case Head::Cmi: return "CMI";
        case Head::Sc: return "SC";
        case Head::Stat: return "STAT";
        case Head::Classic: return "Classic";
    }
    return "?";
}

std::optional<Head> parse_head(std::string_view name) {
    const auto n = text::to_lower(name);
    if (n == "cmi") return Head::Cmi;
    if (n == "sc") return Head::Sc;
    if (n == "stat") return Head::Stat;
    if (n == "classic") return Head::Classic;
    return std::nullopt;
}

std::size_t head_label(Head h, const ImageTextPair& p) {
    if (p.auto_class.is_undefined()) {
        throw std::invalid_argument("pair " + p.id + " has no valid class");
    }
    switch (h) {
        case Head::Cmi: return level_index(p.auto_triple.cmi);
        case Head::Sc: return level_index(p.auto_triple.sc);
        case Head::Stat: return level_index(p.auto_triple.stat);
        case Head::Classic: return p.auto_class.index();
    }
    return 0;
}

std::size_t hash_bucket(std::string_view token, std::size_t dims) {
    const std::uint64_t h = fnv1a64(token) * 0x9E3779B97F4A7C15ull;
    return static_cast<std::size_t>((h >> 32) % dims);
}

double overlap_ratio(std::string_view s, const std::vector<std::string>& tags) {
    const auto tokens = text::word_tokens(s);
    const std::unordered_set<std::string> present(tokens.begin(), tokens.end());
    std::set<std::string> distinct;
    for (const auto& t : tags) {
        auto f = text::to_lower(text::trim(t));
        if (!f.empty()) distinct.insert(std::move(f));
    }
    std::size_t hits = 0;
    for (const auto& tag : distinct) {
        const auto words = text::word_tokens(tag);
        if (!words.empty() && std::all_of(words.begin(), words.end(),
                                          [&](const auto& w) { return present.count(w) > 0; })) {
            ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(std::max<std::size_t>(1, distinct.size()));
}

bool in_test_split(std::string_view id, double test_fraction, std::uint64_t seed) {
    const std::uint64_t h = mix64(fnv1a64(id) ^ mix64(seed));
    return static_cast<double>(h >> 11) * 0x1.0p-53 < test_fraction;
}

FeatureExtractor::FeatureExtractor(FeatureSchema schema, AntonymLexicon lexicon)
    : schema_(schema), lexicon_(std::move(lexicon)), reverse_(reverse_lexicon(lexicon_)) {
    if (schema_.hashed_text_dims == 0 || schema_.hashed_tag_dims == 0) {
        throw std::invalid_argument("hashed feature blocks need at least one bucket");
    }
    const std::string desc =
        "forge-features-v1;text=" + std::to_string(schema_.hashed_text_dims) +
        ";tags=" + std::to_string(schema_.hashed_tag_dims) +
        ";scalars=overlap_ratio,lexicon_keyword_hits,lexicon_replacement_hits,sentence_count,"
        "mean_sentence_length,tag_count;lexicon=" +
        hex64(lexicon_.fingerprint());
    schema_hash_ = fnv1a64(desc);
}

FeatureVector FeatureExtractor::extract(const ImageTextPair& pair) const {
    FeatureVector f(schema_.dimension(), 0.0);
    const auto text_block = std::span<double>(f).subspan(0, schema_.hashed_text_dims);
    const auto tag_block =
        std::span<double>(f).subspan(schema_.hashed_text_dims, schema_.hashed_tag_dims);

    for (const auto& tok : text::word_tokens(pair.text)) {
        text_block[hash_bucket(tok, schema_.hashed_text_dims)] += 1.0;
    }
    normalize_l2(text_block);

    std::set<std::string> tags;
    for (const auto& t : pair.concept_tags) {
        auto folded = text::to_lower(text::trim(t));
        if (!folded.empty()) tags.insert(std::move(folded));
    }
    for (const auto& t : tags) tag_block[hash_bucket(t, schema_.hashed_tag_dims)] += 1.0;
    normalize_l2(tag_block);

    const auto sentences = text::split_sentences(pair.text);
    std::size_t words = 0;
    for (const auto& sp : sentences) words += text::whitespace_tokens(sp.of(pair.text)).size();
    const double mean_len =
        sentences.empty() ? 0.0 : static_cast<double>(words) / static_cast<double>(sentences.size());

    auto set = [&](ScalarFeature which, double v) { f[scalar_offset(which)] = v; };
    set(ScalarFeature::OverlapRatio, overlap_ratio(pair.text, pair.concept_tags));
    set(ScalarFeature::LexiconKeywordHits,
        std::log1p(static_cast<double>(count_keyword_hits(pair.text, lexicon_))));
    set(ScalarFeature::LexiconReplacementHits,
        std::log1p(static_cast<double>(count_keyword_hits(pair.text, reverse_))));
    set(ScalarFeature::SentenceCount, std::log1p(static_cast<double>(sentences.size())));
    set(ScalarFeature::MeanSentenceLength, std::log1p(mean_len));
    set(ScalarFeature::TagCount, std::log1p(static_cast<double>(tags.size())));
    return f;
}

FeatureVector extract_features(const ImageTextPair& pair, const FeatureSchema& schema,
                               const AntonymLexicon& lex) {
    return FeatureExtractor(schema, lex).extract(pair);
}

BaselineModel::BaselineModel(Head h, std::size_t input, std::size_t hidden)
    : head(h),
      input_dim(input),
      hidden_dim(hidden),
      outputs(head_arity(h)),
      w1(hidden * input, 0.0),
      b1(hidden, 0.0),
      w2(head_arity(h) * hidden, 0.0),
      b2(head_arity(h), 0.0) {}

std::vector<double> softmax(std::span<const double> z) {
    std::vector<double> p(z.size());
    if (z.empty()) return p;
    const double mx = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t k = 0; k < z.size(); ++k) {
        p[k] = std::exp(z[k] - mx);
        sum += p[k];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::size_t argmax(std::span<const double> v) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

std::vector<double> logits(const BaselineModel& m, std::span<const double> x) {
    check_dim(m, x);
    std::vector<double> hidden, out;
    std::vector<std::size_t> nz;
    forward(m, x, hidden, out, nz);
    return out;
}

std::vector<double> predict_proba(const BaselineModel& m, std::span<const double> x) {
    return softmax(logits(m, x));
}

double loss_and_gradient(const BaselineModel& m, std::span<const Sample> samples,
                         Gradients* grad, std::span<const double> class_weights) {
    if (grad) {
        grad->w1.assign(m.w1.size(), 0.0);
        grad->b1.assign(m.b1.size(), 0.0);
        grad->w2.assign(m.w2.size(), 0.0);
        grad->b2.assign(m.b2.size(), 0.0);
    }
    if (samples.empty()) return 0.0;

    std::vector<double> hidden, out, dz(m.outputs), dh(m.hidden_dim);
    std::vector<std::size_t> nz;
    double total_weight = 0.0, loss = 0.0;
    for (const auto& s : samples) {
        check_dim(m, s.x);
        if (s.label >= m.outputs) throw Error("label out of range for head");
        const double w = class_weights.empty() ? 1.0 : class_weights[s.label];
        total_weight += w;
        forward(m, s.x, hidden, out, nz);
        const auto p = softmax(out);
        loss -= w * std::log(std::max(p[s.label], 1e-300));
        if (!grad) continue;
        for (std::size_t k = 0; k < m.outputs; ++k) {
            dz[k] = w * (p[k] - (k == s.label ? 1.0 : 0.0));
        }
        std::fill(dh.begin(), dh.end(), 0.0);
        for (std::size_t k = 0; k < m.outputs; ++k) {
            grad->b2[k] += dz[k];
            double* gw = grad->w2.data() + k * m.hidden_dim;
            const double* row = m.w2.data() + k * m.hidden_dim;
            for (std::size_t j = 0; j < m.hidden_dim; ++j) {
                gw[j] += dz[k] * hidden[j];
                dh[j] += dz[k] * row[j];
            }
        }
        for (std::size_t j = 0; j < m.hidden_dim; ++j) {
            if (hidden[j] <= 0.0) continue;  // ReLU gate
            grad->b1[j] += dh[j];
            double* gw = grad->w1.data() + j * m.input_dim;
            for (std::size_t i : nz) gw[i] += dh[j] * s.x[i];
        }
    }
    const double inv = 1.0 / total_weight;
    if (grad) {
        for (auto* v : {&grad->w1, &grad->b1, &grad->w2, &grad->b2}) {
            for (double& g : *v) g *= inv;
        }
    }
    return loss * inv;
}

TrainResult train(std::span<const Sample> data, Head head, const TrainConfig& config,
                  std::uint64_t schema_hash) {
    if (data.empty()) throw Error("cannot train on an empty dataset");
    if (config.batch_size == 0 || config.hidden_dim == 0) {
        throw Error("batch size and hidden dimension must be positive");
    }
    const std::size_t input = data.front().x.size();
    const std::size_t arity = head_arity(head);
    std::vector<std::size_t> class_counts(arity, 0);
    for (const auto& s : data) {
        if (s.x.size() != input) throw DimensionError("samples have inconsistent dimensions");
        if (s.label >= arity) {
            throw Error("label " + std::to_string(s.label) + " out of range for head " +
                        std::string(head_name(head)));
        }
        ++class_counts[s.label];
    }

    std::vector<double> class_weights;
    if (config.balance_classes) {
        class_weights.assign(arity, 0.0);
        std::size_t present = 0;
        for (auto c : class_counts) present += c > 0;
        for (std::size_t k = 0; k < arity; ++k) {
            if (class_counts[k]) {
                class_weights[k] = static_cast<double>(data.size()) /
                                   (static_cast<double>(present) * static_cast<double>(class_counts[k]));
            }
        }
    }

    TrainResult r;
    BaselineModel& m = r.model;
    m = BaselineModel(head, input, config.hidden_dim);
    m.schema_hash = schema_hash;

    Rng init(derive_seed(config.seed, "init"));
    const double lim1 = std::sqrt(6.0 / static_cast<double>(input));
    const double lim2 = std::sqrt(6.0 / static_cast<double>(config.hidden_dim + arity));
    for (double& w : m.w1) w = (2.0 * init.unit() - 1.0) * lim1;
    for (double& w : m.w2) w = (2.0 * init.unit() - 1.0) * lim2;

    struct Moments {
        std::vector<double> m, v;
    };
    std::array<std::vector<double>*, 4> params = {&m.w1, &m.b1, &m.w2, &m.b2};
    std::array<Moments, 4> moments;
    for (std::size_t t = 0; t < 4; ++t) {
        moments[t].m.assign(params[t]->size(), 0.0);
        moments[t].v.assign(params[t]->size(), 0.0);
    }

    Rng order_rng(derive_seed(config.seed, "batches"));
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<Sample> batch;
    Gradients g;
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        order_rng.shuffle(order);
        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end = std::min(order.size(), start + config.batch_size);
            batch.clear();
            for (std::size_t i = start; i < end; ++i) batch.push_back(data[order[i]]);
            const double loss = loss_and_gradient(m, batch, &g, class_weights);
            if (!std::isfinite(loss)) {
                throw TrainingError("non-finite loss at epoch " + std::to_string(epoch) +
                                    ", step " + std::to_string(step) + " (lr " +
                                    std::to_string(config.learning_rate) + ")");
            }
            epoch_loss += loss * static_cast<double>(end - start);

            ++step;
            const double c1 = 1.0 - std::pow(config.beta1, static_cast<double>(step));
            const double c2 = 1.0 - std::pow(config.beta2, static_cast<double>(step));
            std::array<std::vector<double>*, 4> grads = {&g.w1, &g.b1, &g.w2, &g.b2};
            for (std::size_t t = 0; t < 4; ++t) {
                auto& p = *params[t];
                const auto& gr = *grads[t];
                auto& mm = moments[t].m;
                auto& vv = moments[t].v;
                for (std::size_t i = 0; i < p.size(); ++i) {
                    mm[i] = config.beta1 * mm[i] + (1.0 - config.beta1) * gr[i];
                    vv[i] = config.beta2 * vv[i] + (1.0 - config.beta2) * gr[i] * gr[i];
                    p[i] -= config.learning_rate * (mm[i] / c1) / (std::sqrt(vv[i] / c2) + config.epsilon);
                }
            }
        }
        r.loss_trace.push_back(epoch_loss / static_cast<double>(data.size()));
    }

    m.training.seed = config.seed;
    m.training.epochs = config.epochs;
    m.training.batch_size = config.batch_size;
    m.training.learning_rate = config.learning_rate;
    m.training.balanced = config.balance_classes;
    m.training.final_loss = r.loss_trace.empty() ? 0.0 : r.loss_trace.back();
    return r;
}

RelationClass classic_predict(const BaselineModel& model, std::span<const double> f) {
    if (model.head != Head::Classic) {
        throw std::invalid_argument("classic_predict needs a Classic head, got " +
                                    std::string(head_name(model.head)));
    }
    return kAllClasses[argmax(predict_proba(model, f))];
}

MetricTriple cascade_triple(const BaselineModel& cmi, const BaselineModel& sc,
                            const BaselineModel& stat, std::span<const double> f,
                            std::array<Head, 3> order) {
    if (cmi.head != Head::Cmi || sc.head != Head::Sc || stat.head != Head::Stat) {
        throw std::invalid_argument("cascade needs CMI, SC and STAT heads in that order");
    }
    validate_order(order);
    MetricTriple t;
    for (Head h : order) {
        switch (h) {
            case Head::Cmi: t.cmi = cmi_from_index(argmax(predict_proba(cmi, f))); break;
            case Head::Sc: t.sc = sc_from_index(argmax(predict_proba(sc, f))); break;
            case Head::Stat: t.stat = stat_from_index(argmax(predict_proba(stat, f))); break;
            case Head::Classic: break;
        }
    }
    return t;
}

RelationClass cascade_predict(const BaselineModel& cmi, const BaselineModel& sc,
                              const BaselineModel& stat, std::span<const double> f,
                              std::array<Head, 3> order) {
    return classify_triple(cascade_triple(cmi, sc, stat, f, order));
}

std::string model_to_json(const BaselineModel& m) {
    ordered_json j;
    j["format"] = "forge-baseline-model";
    j["version"] = 1;
    j["head"] = std::string(head_name(m.head));
    j["schema_hash"] = hex64(m.schema_hash);
    j["input_dim"] = m.input_dim;
    j["hidden_dim"] = m.hidden_dim;
    j["outputs"] = m.outputs;
    j["training"] = {{"seed", m.training.seed},
                     {"epochs", m.training.epochs},
                     {"batch_size", m.training.batch_size},
                     {"learning_rate", m.training.learning_rate},
                     {"balanced", m.training.balanced},
                     {"final_loss", m.training.final_loss}};
    j["w1"] = m.w1;
    j["b1"] = m.b1;
    j["w2"] = m.w2;
    j["b2"] = m.b2;
    return j.dump();
}

BaselineModel model_from_json(std::string_view json, std::optional<std::uint64_t> expected,
                              const std::string& source) {
    const detail::Where at{source, 0};
    ordered_json j;
    try {
        j = ordered_json::parse(json);
    } catch (const ordered_json::parse_error& e) {
        at.fail(std::string("malformed model JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("format", "") != "forge-baseline-model") {
        at.fail("not a forge model file");
    }
    if (j.value("version", 0) != 1) at.fail("unsupported model version");
    const auto head = parse_head(detail::require_string(j, "head", at));
    if (!head) at.fail("unknown head");
    const auto hash = parse_hex64(detail::require_string(j, "schema_hash", at));
    if (!hash) at.fail("schema_hash must be 16 hex digits");
    if (expected && *expected != *hash) {
        at.fail("feature schema mismatch: model " + hex64(*hash) + ", extractor " +
                hex64(*expected));
    }
    BaselineModel m(*head, detail::require(j, "input_dim", at).get<std::size_t>(),
                    detail::require(j, "hidden_dim", at).get<std::size_t>());
    if (detail::require(j, "outputs", at).get<std::size_t>() != m.outputs) {
        at.fail("output count does not match head arity");
    }
    m.schema_hash = *hash;
    auto load_vec = [&](const char* key, std::vector<double>& dst) {
        const auto& v = detail::require(j, key, at);
        if (!v.is_array() || v.size() != dst.size()) {
            at.fail(std::string("weight array '") + key + "' has the wrong size");
        }
        for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = v[i].get<double>();
    };
    load_vec("w1", m.w1);
    load_vec("b1", m.b1);
    load_vec("w2", m.w2);
    load_vec("b2", m.b2);
    if (auto t = j.find("training"); t != j.end() && t->is_object()) {
        m.training.seed = t->value("seed", std::uint64_t{0});
        m.training.epochs = t->value("epochs", std::size_t{0});
        m.training.batch_size = t->value("batch_size", std::size_t{0});
        m.training.learning_rate = t->value("learning_rate", 0.0);
        m.training.balanced = t->value("balanced", false);
        m.training.final_loss = t->value("final_loss", 0.0);
    }
    return m;
}

void save_model(const BaselineModel& m, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(m) + "\n");
}

BaselineModel load_model(const std::filesystem::path& path, std::optional<std::uint64_t> expected) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError(path.string(), 0, "cannot open model");
    std::ostringstream ss;
    ss << in.rdbuf();
    return model_from_json(ss.str(), expected, path.string());
}

}  // namespace forge
