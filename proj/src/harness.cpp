#include "ease/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include <json.hpp>

#include "ease/abstractor.hpp"
#include "ease/extractor.hpp"
#include "ease/text.hpp"

namespace ease {

namespace {

using nlohmann::json;

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::map<std::string, Tensor> clone_param_map(const std::map<std::string, Tensor>& src,
                                              bool requires_grad) {
    std::map<std::string, Tensor> out;
    for (const auto& [name, t] : src) {
        Tensor copy = t.clone();
        copy.drop_grad();
        copy.set_requires_grad(requires_grad);
        out.emplace(name, std::move(copy));
    }
    return out;
}

/// Flags of the k highest-probability units; ties keep the earlier unit,
/// matching hard_select_topk.
std::vector<int> topk_flags(const Tensor& unit_probs, Index k) {
    const Index n = unit_probs.rows();
    k = std::clamp<Index>(k, 0, n);
    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
        return unit_probs.values()[a] > unit_probs.values()[b];
    });
    std::vector<int> flags(static_cast<size_t>(n), 0);
    for (Index i = 0; i < k; ++i) flags[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
    return flags;
}

std::vector<int> leadk_flags(Index n, Index k) {
    std::vector<int> flags(static_cast<size_t>(n), 0);
    for (Index i = 0; i < std::min(n, k); ++i) flags[static_cast<size_t>(i)] = 1;
    return flags;
}

std::vector<int> random_k_flags(Index n, Index k, RngState& rng) {
    k = std::min(n, k);
    std::vector<Index> slots(static_cast<size_t>(n));
    std::iota(slots.begin(), slots.end(), Index{0});
    for (Index i = 0; i < k; ++i) {
        Index j = i + static_cast<Index>(next_below(rng, static_cast<std::uint64_t>(n - i)));
        std::swap(slots[static_cast<size_t>(i)], slots[static_cast<size_t>(j)]);
    }
    std::vector<int> flags(static_cast<size_t>(n), 0);
    for (Index i = 0; i < k; ++i) flags[static_cast<size_t>(slots[static_cast<size_t>(i)])] = 1;
    return flags;
}

/// Unit flags to a [T,1] token mask, broadcasting through sentence_ids at
/// sentence level.
Tensor flags_token_mask(const std::vector<int>& flags, const EncodedExample& enc) {
    std::vector<double> vals(flags.begin(), flags.end());
    const Index n = static_cast<Index>(vals.size());
    Tensor units = Tensor::from_values({n, 1}, std::move(vals));
    if (enc.level == EncodeLevel::token) return units;
    return broadcast_sentence_mask(units, enc.sentence_ids);
}

std::vector<std::string> generation_tokens(std::vector<Index> ids, const Vocabulary& vocab) {
    if (!ids.empty() && ids.back() == k_eos_id) ids.pop_back();
    return decode(ids, vocab);
}

std::vector<std::string> flatten_sentences(const std::vector<std::vector<std::string>>& sentences) {
    std::vector<std::string> flat;
    for (const auto& s : sentences) flat.insert(flat.end(), s.begin(), s.end());
    return flat;
}

json variant_json(const VariantScore& v) {
    return json{{"rouge1", v.rouge1}, {"rouge2", v.rouge2}, {"rougeL", v.rougeL}};
}

json report_json(const MetricsReport& r) {
    json j;
    j["evidence_precision"] = r.evidence_precision;
    j["evidence_recall"] = r.evidence_recall;
    j["mean_transitions"] = r.mean_transitions;
    j["num_examples"] = r.num_examples;
    j["report_seed"] = r.report_seed;
    j["token_sparsity"] = r.token_sparsity;
    json variants = json::object();
    for (const auto& [name, score] : r.variants) variants[name] = variant_json(score);
    j["variants"] = variants;
    return j;
}

}  // namespace

// ---------------------------------------------------------------------------
// loss log
// ---------------------------------------------------------------------------

std::string loss_csv_row(const LossRow& row) {
    std::string out = std::to_string(row.step);
    for (double v : {row.task, row.kl, row.lasso, row.bce, row.total, row.lr})
        out += "," + fmt_double(v);
    return out;
}

void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("loss csv: cannot open " + path);
    out << k_loss_csv_header << "\n";
    for (const LossRow& row : rows) out << loss_csv_row(row) << "\n";
    if (!out) throw std::runtime_error("loss csv: write failed for " + path);
}

// ---------------------------------------------------------------------------
// Trainer
// ---------------------------------------------------------------------------

Trainer::Trainer(TrainConfig config) : cfg_(std::move(config)) {
    validate(cfg_);
    prepare_data();
    init_params();
    rng_ = derive_stream(cfg_.seed, "train");
}

Trainer::Trainer(const Checkpoint& snapshot) : cfg_(snapshot.config) {
    validate(cfg_);
    prepare_data();
    params_ = clone_param_map(snapshot.params, true);
    adam_.restore(clone_param_map(snapshot.adam_m, false), clone_param_map(snapshot.adam_v, false),
                  snapshot.adam_step);
    rng_ = snapshot.rng;
    step_ = snapshot.step;
}

void Trainer::prepare_data() {
    xcfg_ = extractor_config(cfg_);
    acfg_ = abstractor_config(cfg_);
    if (!cfg_.plain_seq2seq) validate(xcfg_);
    validate(acfg_);

    if (cfg_.train_data.empty()) throw std::invalid_argument("train: train_data is not set");
    std::vector<RawExample> raw = read_jsonl(cfg_.train_data);
    if (raw.empty()) throw std::invalid_argument("train: dataset " + cfg_.train_data + " is empty");

    if (cfg_.pretrain) {
        for (RawExample& ex : raw) {
            ex.target = ex.source;
            ex.has_target = true;
        }
    } else {
        for (size_t i = 0; i < raw.size(); ++i)
            if (!raw[i].has_target)
                throw std::invalid_argument("train: example " + std::to_string(i) +
                                            " has no target (use pretrain for unlabeled data)");
    }

    std::vector<std::string> sources;
    sources.reserve(raw.size());
    for (const RawExample& ex : raw) sources.push_back(ex.source);
    vocab_ = Vocabulary::build(sources, static_cast<size_t>(cfg_.vocab_size));

    encoded_.reserve(raw.size());
    for (size_t i = 0; i < raw.size(); ++i) {
        if (tokenize(raw[i].source).empty())
            throw std::invalid_argument("train: example " + std::to_string(i) +
                                        " has an empty source");
        EncodedExample enc = encode(raw[i].source, raw[i].target, vocab_, cfg_.level);
        if (static_cast<Index>(enc.source_ids.size()) > cfg_.max_positions)
            throw std::invalid_argument(
                "train: example " + std::to_string(i) + " has " +
                std::to_string(enc.source_ids.size()) + " source positions, max_positions is " +
                std::to_string(cfg_.max_positions));
        if (static_cast<Index>(enc.target_ids.size()) > cfg_.max_positions)
            throw std::invalid_argument("train: example " + std::to_string(i) +
                                        " has a target longer than max_positions");
        encoded_.push_back(std::move(enc));
    }

    if (cfg_.bce_weight > 0.0) {
        if (cfg_.train_labels.empty())
            throw std::invalid_argument("train: bce_weight > 0 needs train_labels");
        std::vector<std::vector<int>> per_sentence = read_oracle_labels(cfg_.train_labels);
        if (per_sentence.size() != encoded_.size())
            throw std::invalid_argument(
                "train: " + cfg_.train_labels + " has " + std::to_string(per_sentence.size()) +
                " label rows for " + std::to_string(encoded_.size()) + " examples");
        unit_labels_.reserve(encoded_.size());
        for (size_t i = 0; i < encoded_.size(); ++i) {
            const EncodedExample& enc = encoded_[i];
            const std::vector<int>& labels = per_sentence[i];
            if (static_cast<Index>(labels.size()) != enc.num_sentences)
                throw std::invalid_argument("train: example " + std::to_string(i) + " has " +
                                            std::to_string(enc.num_sentences) + " sentences but " +
                                            std::to_string(labels.size()) + " labels");
            if (cfg_.level == EncodeLevel::sentence) {
                unit_labels_.push_back(labels);
            } else {
                std::vector<int> per_token;
                per_token.reserve(enc.source_ids.size());
                for (Index sid : enc.sentence_ids)
                    per_token.push_back(labels[static_cast<size_t>(sid)]);
                unit_labels_.push_back(std::move(per_token));
            }
        }
    }
}

void Trainer::init_params() {
    if (!cfg_.plain_seq2seq) init_extractor_params(params_, xcfg_, vocab_.size(), cfg_.seed);
    init_abstractor_params(params_, acfg_, vocab_.size(), cfg_.seed);
    if (!cfg_.init_checkpoint.empty()) warm_start(load_checkpoint(cfg_.init_checkpoint));
}

void Trainer::warm_start(const Checkpoint& init) {
    for (const auto& [name, t] : init.params) {
        auto it = params_.find(name);
        if (it == params_.end())
            throw std::invalid_argument("init checkpoint tensor " + name +
                                        " has no counterpart in this model");
        if (t.shape() != it->second.shape())
            throw std::invalid_argument(
                "shape mismatch for tensor " + name + ": checkpoint " +
                shape_to_string(t.shape()) + " vs model " + shape_to_string(it->second.shape()));
        it->second.values() = t.values();
    }
    for (const auto& [name, t] : params_)
        if (!init.params.count(name))
            throw std::invalid_argument("model parameter " + name +
                                        " is missing from the init checkpoint");
}

LossBundle Trainer::example_loss(size_t index) {
    const EncodedExample& enc = encoded_[index];
    const Index t = static_cast<Index>(enc.source_ids.size());

    const bool need_probs =
        !cfg_.plain_seq2seq && (cfg_.pi < 1.0 || cfg_.beta > 0.0 || cfg_.bce_weight > 0.0);
    MaskDistribution dist;
    if (need_probs) dist = score_units(params_, xcfg_, enc);

    Tensor mask;
    if (cfg_.plain_seq2seq || cfg_.pi >= 1.0)
        mask = Tensor::full({t, 1}, 1.0);
    else
        mask = soft_mask(dist, rng_, cfg_.tau);

    Tensor task = forward_nll(params_, acfg_, enc, mask, acfg_.mask_scheme);

    Tensor kl, lasso, bce;
    if (!cfg_.plain_seq2seq) {
        if (cfg_.beta > 0.0) kl = kl_sparsity(dist.unit_probs, cfg_.pi);
        if (cfg_.lasso_weight > 0.0) lasso = lasso_loss(mask);
        if (cfg_.bce_weight > 0.0) bce = supervision_bce(dist.unit_probs, unit_labels_[index]);
    }
    return combine(task, kl, lasso, bce, cfg_.beta, cfg_.lasso_weight, cfg_.bce_weight);
}

LossRow Trainer::train_step() {
    Tape tape;

    std::vector<size_t> batch(static_cast<size_t>(cfg_.batch_size));
    for (size_t& idx : batch)
        idx = static_cast<size_t>(next_below(rng_, static_cast<std::uint64_t>(encoded_.size())));

    LossRow row;
    row.step = step_;
    row.lr = lr_schedule(step_, cfg_.learning_rate, cfg_.warmup_steps, cfg_.total_steps);

    Tensor total_sum;
    for (size_t idx : batch) {
        LossBundle bundle = example_loss(idx);
        row.task += bundle.task.item();
        if (bundle.kl.defined()) row.kl += bundle.kl.item();
        if (bundle.lasso.defined()) row.lasso += bundle.lasso.item();
        if (bundle.bce.defined()) row.bce += bundle.bce.item();
        total_sum = total_sum.defined() ? add(total_sum, bundle.total) : bundle.total;
    }
    const double inv_b = 1.0 / static_cast<double>(cfg_.batch_size);
    Tensor mean_total = scale(total_sum, inv_b);
    row.task *= inv_b;
    row.kl *= inv_b;
    row.lasso *= inv_b;
    row.bce *= inv_b;
    row.total = mean_total.item();

    if (!std::isfinite(row.total) || !std::isfinite(row.task) || !std::isfinite(row.kl) ||
        !std::isfinite(row.lasso) || !std::isfinite(row.bce))
        throw std::runtime_error("train: non-finite loss at step " + std::to_string(step_) +
                                 " (task=" + fmt_double(row.task) + ", kl=" + fmt_double(row.kl) +
                                 ", lasso=" + fmt_double(row.lasso) +
                                 ", bce=" + fmt_double(row.bce) +
                                 ", total=" + fmt_double(row.total) + ")");

    std::map<std::string, Tensor> grads = tape.backward(mean_total, params_);
    adam_.step(params_, grads, row.lr);
    ++step_;
    return row;
}

void Trainer::run(std::int64_t until_step) {
    until_step = std::min(until_step, cfg_.total_steps);
    while (step_ < until_step) log_.push_back(train_step());
}

void Trainer::run() { run(cfg_.total_steps); }

Checkpoint Trainer::snapshot() const {
    Checkpoint ck;
    ck.config = cfg_;
    ck.params = clone_param_map(params_, true);
    ck.adam_m = clone_param_map(adam_.first_moments(), false);
    ck.adam_v = clone_param_map(adam_.second_moments(), false);
    ck.adam_step = adam_.steps_taken();
    ck.step = step_;
    ck.rng = rng_;
    return ck;
}

Vocabulary training_vocabulary(const TrainConfig& config) {
    if (config.train_data.empty())
        throw std::invalid_argument("vocabulary: config has no train_data path");
    std::vector<RawExample> raw = read_jsonl(config.train_data);
    std::vector<std::string> sources;
    sources.reserve(raw.size());
    for (const RawExample& ex : raw) sources.push_back(ex.source);
    return Vocabulary::build(sources, static_cast<size_t>(config.vocab_size));
}

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------

VariantScore mean_rouge(const std::vector<std::vector<std::string>>& candidates,
                        const std::vector<std::vector<std::string>>& references) {
    if (candidates.size() != references.size())
        throw std::invalid_argument("mean_rouge: candidate/reference count mismatch");
    if (candidates.empty()) throw std::invalid_argument("mean_rouge: no examples");
    VariantScore score;
    for (size_t i = 0; i < candidates.size(); ++i) {
        score.rouge1 += rouge_n(candidates[i], references[i], 1).f1;
        score.rouge2 += rouge_n(candidates[i], references[i], 2).f1;
        score.rougeL += rouge_l(candidates[i], references[i]).f1;
    }
    const double inv = 1.0 / static_cast<double>(candidates.size());
    score.rouge1 *= inv;
    score.rouge2 *= inv;
    score.rougeL *= inv;
    return score;
}

MetricsReport evaluate(const Checkpoint& checkpoint, const std::vector<RawExample>& data,
                       std::uint64_t report_seed) {
    const TrainConfig& cfg = checkpoint.config;
    validate(cfg);
    if (cfg.plain_seq2seq)
        throw std::invalid_argument(
            "evaluate: plain_seq2seq checkpoints have no extractor; evaluate a pi=1 run instead");
    if (data.empty()) throw std::invalid_argument("evaluate: dataset is empty");
    for (size_t i = 0; i < data.size(); ++i)
        if (!data[i].has_target)
            throw std::invalid_argument("evaluate: example " + std::to_string(i) +
                                        " has no target");

    const Vocabulary vocab = training_vocabulary(cfg);
    const ExtractorConfig xcfg = extractor_config(cfg);
    const AbstractorConfig acfg = abstractor_config(cfg);
    const bool sentence_level = cfg.level == EncodeLevel::sentence;

    NoGradGuard nograd;
    RngState rand3 = derive_stream(report_seed, "random3");

    std::vector<std::vector<std::string>> refs;
    std::map<std::string, std::vector<std::vector<std::string>>> cands;
    double kept = 0.0, total_tokens = 0.0, transitions = 0.0;
    std::int64_t tp = 0, pred_n = 0, gold_n = 0;

    for (const RawExample& ex : data) {
        const EncodedExample enc = encode(ex.source, ex.target, vocab, cfg.level);
        if (static_cast<Index>(enc.source_ids.size()) > cfg.max_positions)
            throw std::invalid_argument("evaluate: source longer than max_positions");
        const Document doc = make_document(ex.source);
        refs.push_back(tokenize(ex.target));

        const MaskDistribution dist = score_units(checkpoint.params, xcfg, enc);
        const Index n = dist.unit_probs.rows();
        const Index t = static_cast<Index>(enc.source_ids.size());

        const std::vector<int> top = hard_select_topk(dist, cfg.pi, cfg.min_sentences);
        const Tensor mask_top = flags_token_mask(top, enc);
        for (Index i = 0; i < t; ++i) kept += mask_top.values()[i];
        for (Index i = 0; i + 1 < t; ++i)
            transitions += std::abs(mask_top.values()[i] - mask_top.values()[i + 1]);
        total_tokens += static_cast<double>(t);

        auto gen_with = [&](const std::vector<int>& flags) {
            Tensor mask = flags_token_mask(flags, enc);
            return generation_tokens(
                generate(checkpoint.params, acfg, enc, mask, acfg.mask_scheme,
                         cfg.max_decode_len, 1),
                vocab);
        };
        cands["top_pi"].push_back(gen_with(top));
        if (sentence_level) {
            cands["top3"].push_back(gen_with(topk_flags(dist.unit_probs, 3)));
            cands["lead3"].push_back(gen_with(leadk_flags(n, 3)));
            cands["random3"].push_back(gen_with(random_k_flags(n, 3, rand3)));
        }

        std::vector<std::string> evidence;
        if (sentence_level) {
            for (Index j = 0; j < n; ++j)
                if (top[static_cast<size_t>(j)])
                    for (const std::string& tok : doc.sentences[static_cast<size_t>(j)])
                        evidence.push_back(tok);
        } else {
            const std::vector<std::string> flat = flatten_sentences(doc.sentences);
            for (Index j = 0; j < n; ++j)
                if (top[static_cast<size_t>(j)]) evidence.push_back(flat[static_cast<size_t>(j)]);
        }
        cands["extractive"].push_back(std::move(evidence));

        const OracleLabels gold = greedy_oracle(doc.sentences, refs.back());
        if (sentence_level) {
            for (Index j = 0; j < n; ++j) {
                const int p = top[static_cast<size_t>(j)];
                const int g = gold.labels[static_cast<size_t>(j)];
                tp += p & g;
                pred_n += p;
                gold_n += g;
            }
        } else {
            for (Index j = 0; j < t; ++j) {
                const int p = top[static_cast<size_t>(j)];
                const int g = gold.labels[static_cast<size_t>(enc.sentence_ids[static_cast<size_t>(j)])];
                tp += p & g;
                pred_n += p;
                gold_n += g;
            }
        }
    }

    MetricsReport report;
    for (const auto& [name, variant_cands] : cands)
        report.variants[name] = mean_rouge(variant_cands, refs);
    report.token_sparsity = kept / total_tokens;
    report.evidence_precision =
        pred_n > 0 ? static_cast<double>(tp) / static_cast<double>(pred_n) : 0.0;
    report.evidence_recall =
        gold_n > 0 ? static_cast<double>(tp) / static_cast<double>(gold_n) : 0.0;
    report.mean_transitions = transitions / static_cast<double>(data.size());
    report.num_examples = static_cast<std::int64_t>(data.size());
    report.report_seed = report_seed;
    return report;
}

std::string report_to_json(const MetricsReport& report) { return report_json(report).dump(2); }

std::vector<std::vector<int>> hard_selections(const Checkpoint& checkpoint,
                                              const std::vector<RawExample>& data, double pi) {
    const TrainConfig& cfg = checkpoint.config;
    validate(cfg);
    if (cfg.plain_seq2seq)
        throw std::invalid_argument("hard_selections: plain_seq2seq checkpoints have no extractor");
    const Vocabulary vocab = training_vocabulary(cfg);
    const ExtractorConfig xcfg = extractor_config(cfg);

    NoGradGuard nograd;
    std::vector<std::vector<int>> out;
    out.reserve(data.size());
    for (const RawExample& ex : data) {
        const EncodedExample enc = encode(ex.source, ex.target, vocab, cfg.level);
        const MaskDistribution dist = score_units(checkpoint.params, xcfg, enc);
        out.push_back(hard_select_topk(dist, pi, cfg.min_sentences));
    }
    return out;
}

// ---------------------------------------------------------------------------
// sparsity sweep
// ---------------------------------------------------------------------------

std::vector<SweepRow> sparsity_sweep(const TrainConfig& base, const std::vector<double>& pis,
                                     const std::vector<RawExample>& eval_data) {
    if (pis.empty()) throw std::invalid_argument("sweep: need at least one pi value");
    std::vector<SweepRow> rows;
    rows.reserve(pis.size());
    for (double pi : pis) {
        TrainConfig cfg = base;
        cfg.pi = pi;
        if (pi == 1.0) cfg.beta = 0.0;  // the KL prior degenerates at pi = 1
        validate(cfg);
        Trainer trainer(cfg);
        trainer.run();
        MetricsReport report = evaluate(trainer.snapshot(), eval_data, base.seed);
        report.loss_curve = trainer.log();
        rows.push_back({pi, std::move(report)});
    }
    return rows;
}

std::string sweep_to_json(const std::vector<SweepRow>& rows) {
    json j;
    j["rows"] = json::array();
    for (const SweepRow& row : rows)
        j["rows"].push_back(json{{"pi", row.pi}, {"report", report_json(row.report)}});
    return j.dump(2);
}

std::string sweep_table(const std::vector<SweepRow>& rows) {
    std::string out = "    pi   rouge1   rouge2   rougeL\n";
    for (const SweepRow& row : rows) {
        const VariantScore& top = row.report.variants.at("top_pi");
        char buf[80];
        std::snprintf(buf, sizeof(buf), "%6.2f %8.4f %8.4f %8.4f\n", row.pi, top.rouge1,
                      top.rouge2, top.rougeL);
        out += buf;
    }
    return out;
}

// ---------------------------------------------------------------------------
// single-document inference
// ---------------------------------------------------------------------------

SummaryResult summarize(const Checkpoint& checkpoint, const std::string& document, double pi) {
    const TrainConfig& cfg = checkpoint.config;
    validate(cfg);
    if (cfg.plain_seq2seq)
        throw std::invalid_argument("summarize: plain_seq2seq checkpoints have no extractor");
    if (tokenize(document).empty()) throw std::invalid_argument("summarize: empty document");
    if (!(pi > 0.0 && pi <= 1.0)) throw std::invalid_argument("summarize: pi must lie in (0,1]");

    const Vocabulary vocab = training_vocabulary(cfg);
    const ExtractorConfig xcfg = extractor_config(cfg);
    const AbstractorConfig acfg = abstractor_config(cfg);

    NoGradGuard nograd;
    const EncodedExample enc = encode(document, "", vocab, cfg.level);
    if (static_cast<Index>(enc.source_ids.size()) > cfg.max_positions)
        throw std::invalid_argument("summarize: document longer than max_positions");
    const MaskDistribution dist = score_units(checkpoint.params, xcfg, enc);
    const std::vector<int> flags = hard_select_topk(dist, pi, cfg.min_sentences);
    const Tensor mask = flags_token_mask(flags, enc);

    SummaryResult result;
    result.summary = join_tokens(generation_tokens(
        generate(checkpoint.params, acfg, enc, mask, acfg.mask_scheme, cfg.max_decode_len, 1),
        vocab));

    // unit -> character span, mirroring encode's dropped token-less sentences
    std::vector<Span> unit_spans;
    if (cfg.level == EncodeLevel::sentence) {
        for (const Span& span : segment_sentence_spans(document)) {
            const std::string sentence = document.substr(
                static_cast<size_t>(span.begin), static_cast<size_t>(span.end - span.begin));
            if (!tokenize(sentence).empty()) unit_spans.push_back(span);
        }
    } else {
        for (const auto& [tok, span] : tokenize_with_spans(document)) unit_spans.push_back(span);
    }
    if (unit_spans.size() != flags.size())
        throw std::logic_error("summarize: unit count disagrees with span bookkeeping");

    for (size_t j = 0; j < flags.size(); ++j)
        if (flags[j])
            result.evidence.push_back({static_cast<Index>(j), unit_spans[j],
                                       dist.unit_probs.values()[static_cast<Index>(j)]});
    return result;
}

std::string summary_to_json(const SummaryResult& result) {
    json j;
    j["summary"] = result.summary;
    j["evidence"] = json::array();
    for (const EvidenceSpan& ev : result.evidence)
        j["evidence"].push_back(json{{"unit", ev.unit},
                                     {"begin", ev.span.begin},
                                     {"end", ev.span.end},
                                     {"probability", ev.probability}});
    return j.dump(2);
}

// ---------------------------------------------------------------------------
// oracle label files
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> oracle_labels_for(const std::vector<RawExample>& data) {
    std::vector<std::vector<int>> out;
    out.reserve(data.size());
    for (size_t i = 0; i < data.size(); ++i) {
        if (!data[i].has_target)
            throw std::invalid_argument("oracle: example " + std::to_string(i) + " has no target");
        const Document doc = make_document(data[i].source);
        out.push_back(greedy_oracle(doc.sentences, tokenize(data[i].target)).labels);
    }
    return out;
}

void write_oracle_labels(const std::string& path, const std::vector<std::vector<int>>& labels) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("oracle labels: cannot open " + path);
    for (const std::vector<int>& row : labels) out << json{{"labels", row}}.dump() << "\n";
    if (!out) throw std::runtime_error("oracle labels: write failed for " + path);
}

std::vector<std::vector<int>> read_oracle_labels(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("oracle labels: cannot open " + path);
    std::vector<std::vector<int>> out;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where = path + ":" + std::to_string(line_no);
        json j = json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || j.size() != 1 || !j.contains("labels") ||
            !j["labels"].is_array())
            throw std::runtime_error(where + ": expected {\"labels\":[...]}");
        std::vector<int> row;
        for (const json& v : j["labels"]) {
            if (!v.is_number_integer() || (v.get<int>() != 0 && v.get<int>() != 1))
                throw std::runtime_error(where + ": labels must be 0 or 1");
            row.push_back(v.get<int>());
        }
        out.push_back(std::move(row));
    }
    return out;
}

}  // namespace ease
