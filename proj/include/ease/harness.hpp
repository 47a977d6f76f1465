#pragma once

#include "ease/checkpoint.hpp"
#include "ease/dataset.hpp"
#include "ease/objectives.hpp"
#include "ease/rouge.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace ease {

// ---------------------------------------------------------------------------
// step-wise loss log
// ---------------------------------------------------------------------------
/// One training update: batch means of the raw (unweighted) terms, the
/// weighted total, and the learning rate the update used.
struct LossRow {
    std::int64_t step = 0;
    double task = 0.0;
    double kl = 0.0;
    double lasso = 0.0;
    double bce = 0.0;
    double total = 0.0;
    double lr = 0.0;
};

inline constexpr const char* k_loss_csv_header = "step,task,kl,lasso,bce,total,lr";
std::string loss_csv_row(const LossRow& row);
void write_loss_csv(const std::string& path, const std::vector<LossRow>& rows);

// ---------------------------------------------------------------------------
// training
// ---------------------------------------------------------------------------
/// Owns one run: dataset, vocabulary, parameters, Adam state, RNG, step
/// counter. Runs are deterministic in the config seed, and a snapshot
/// resumed through the Checkpoint constructor continues bit-identically.
class Trainer {
public:
    /// Fresh run. Reads config.train_data, builds the vocabulary from the
    /// source texts, encodes, initializes parameters (warm-started from
    /// config.init_checkpoint when set).
    explicit Trainer(TrainConfig config);

    /// Resume. The dataset and vocabulary are rebuilt from the snapshot's
    /// config; parameters, moments, RNG and step are deep-copied in.
    explicit Trainer(const Checkpoint& snapshot);

    /// Advance to min(until_step, total_steps). Aborts with the step number
    /// and the term-wise loss breakdown if any batch loss goes non-finite.
    void run(std::int64_t until_step);
    void run();

    /// Deep copy of the full training state.
    Checkpoint snapshot() const;

    const TrainConfig& config() const { return cfg_; }
    std::int64_t step() const { return step_; }
    const std::vector<LossRow>& log() const { return log_; }
    const ParamMap& params() const { return params_; }
    const Vocabulary& vocab() const { return vocab_; }

private:
    void prepare_data();
    void init_params();
    void warm_start(const Checkpoint& init);
    LossBundle example_loss(size_t index);
    LossRow train_step();

    TrainConfig cfg_;
    ExtractorConfig xcfg_;
    AbstractorConfig acfg_;
    Vocabulary vocab_;
    std::vector<EncodedExample> encoded_;
    std::vector<std::vector<int>> unit_labels_;  // per example per unit, when bce_weight > 0
    ParamMap params_;
    Adam adam_;
    RngState rng_;
    std::int64_t step_ = 0;
    std::vector<LossRow> log_;
};

/// The vocabulary a checkpoint's parameters index: rebuilt from the source
/// texts of config.train_data, which therefore must still be readable.
Vocabulary training_vocabulary(const TrainConfig& config);

// ---------------------------------------------------------------------------
// evaluation
// ---------------------------------------------------------------------------
struct VariantScore {
    double rouge1 = 0.0;
    double rouge2 = 0.0;
    double rougeL = 0.0;
};

struct MetricsReport {
    std::map<std::string, VariantScore> variants;  // keyed by variant name
    double token_sparsity = 0.0;                   // kept fraction under the top-pi hard mask
    double evidence_precision = 0.0;               // vs greedy_oracle labels, micro-averaged
    double evidence_recall = 0.0;
    double mean_transitions = 0.0;  // adjacent flips of the top-pi hard token mask
    std::int64_t num_examples = 0;
    std::uint64_t report_seed = 0;
    std::vector<LossRow> loss_curve;  // attached by training flows; serialized as CSV, not JSON
};

/// Mean ROUGE-1/2/L F1 over aligned candidate/reference token sequences.
VariantScore mean_rouge(const std::vector<std::vector<std::string>>& candidates,
                        const std::vector<std::vector<std::string>>& references);

/// Greedy decoding under five masks — top-pi, top-3, lead-3, seeded
/// random-3, plus the concatenated evidence itself as an extractive
/// baseline — scored against the targets. The sentence-count variants
/// (top3/lead3/random3) require a sentence-level checkpoint and are
/// omitted at token level. Evidence precision/recall compare the top-pi
/// selection with greedy_oracle labels.
MetricsReport evaluate(const Checkpoint& checkpoint, const std::vector<RawExample>& data,
                       std::uint64_t report_seed);

std::string report_to_json(const MetricsReport& report);

/// Top-pi hard selection flags per document (per sentence at sentence
/// level, per token at token level).
std::vector<std::vector<int>> hard_selections(const Checkpoint& checkpoint,
                                              const std::vector<RawExample>& data, double pi);

// ---------------------------------------------------------------------------
// sparsity sweep
// ---------------------------------------------------------------------------
struct SweepRow {
    double pi = 0.0;
    MetricsReport report;
};

/// One fresh training run per pi (same seed and data), each evaluated on
/// eval_data. A pi of 1.0 forces beta to 0 — the KL prior degenerates there
/// and the row reduces to plain seq2seq training.
std::vector<SweepRow> sparsity_sweep(const TrainConfig& base, const std::vector<double>& pis,
                                     const std::vector<RawExample>& eval_data);

std::string sweep_to_json(const std::vector<SweepRow>& rows);
std::string sweep_table(const std::vector<SweepRow>& rows);

// ---------------------------------------------------------------------------
// single-document inference
// ---------------------------------------------------------------------------
struct EvidenceSpan {
    Index unit = 0;
    Span span;
    double probability = 0.0;
};

struct SummaryResult {
    std::string summary;
    std::vector<EvidenceSpan> evidence;  // selected units in position order
};

/// Hard-mask inference on one raw document: generated summary plus the
/// selected units with their source character spans and probabilities.
SummaryResult summarize(const Checkpoint& checkpoint, const std::string& document, double pi);

std::string summary_to_json(const SummaryResult& result);

// ---------------------------------------------------------------------------
// oracle label files ({"labels":[0,1,...]} per line, aligned with the
// dataset they were computed from)
// ---------------------------------------------------------------------------
std::vector<std::vector<int>> oracle_labels_for(const std::vector<RawExample>& data);
void write_oracle_labels(const std::string& path, const std::vector<std::vector<int>>& labels);
std::vector<std::vector<int>> read_oracle_labels(const std::string& path);

}  // namespace ease
