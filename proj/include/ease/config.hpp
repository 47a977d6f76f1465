#pragma once

#include "ease/abstractor.hpp"
#include "ease/extractor.hpp"
#include "ease/text.hpp"

#include <cstdint>
#include <string>

namespace ease {

/// Everything a run needs, mirrored 1:1 by the flat JSON config file.
/// Defaults are the paper's hyperparameters; desk_preset() swaps in the
/// small-scale values used by the experiment suite.
struct TrainConfig {
    // task
    EncodeLevel level = EncodeLevel::sentence;
    MaskScheme mask_scheme = MaskScheme::embed_mix;
    bool share_encoder = false;
    bool plain_seq2seq = false;  // abstractor-only baseline: all-ones mask, task loss only
    bool pretrain = false;       // reconstruction mode: target := source

    // objective
    double pi = 0.5;
    double beta = 5.0;
    double tau = 0.01;
    double lasso_weight = 0.0;
    double bce_weight = 0.0;

    // optimization
    double learning_rate = 3e-5;
    std::int64_t warmup_steps = 500;
    std::int64_t total_steps = 20000;
    std::int64_t batch_size = 16;
    std::uint64_t seed = 0;

    // model dims
    std::int64_t model_dim = 64;
    std::int64_t num_heads = 4;
    std::int64_t ffn_dim = 256;
    std::int64_t extractor_layers = 2;
    std::int64_t abstractor_layers = 2;  // encoder and decoder layers each
    std::int64_t max_positions = 512;
    std::int64_t vocab_size = 512;
    std::int64_t min_sentences = 3;
    std::int64_t max_decode_len = 48;

    // data paths
    std::string train_data;
    std::string eval_data;
    std::string train_labels;     // oracle labels JSONL, required when bce_weight > 0
    std::string init_checkpoint;  // warm-start parameters (e.g. from pretrain)
    std::string out_dir;
};

/// Rejects invalid combinations: warmup >= total, negative weights,
/// pi outside (0,1], beta > 0 at pi == 1 (the KL prior degenerates),
/// plain_seq2seq with extractor-side terms, bad dims.
void validate(const TrainConfig& config);

/// Small model + short schedule that trains in minutes on one core. The
/// learning rate and temperature are retuned for this scale; the paper
/// values they replace stay in the TrainConfig defaults.
TrainConfig desk_preset();

TrainConfig load_config(const std::string& path);
void save_config(const TrainConfig& config, const std::string& path);
std::string config_to_json_string(const TrainConfig& config);
TrainConfig config_from_json_string(const std::string& text);

/// One `--set key=value` override. Values parse as JSON scalars when they
/// can (0.4, true, 12) and as strings otherwise. Unknown keys and type
/// mismatches are errors naming the key.
void apply_override(TrainConfig& config, const std::string& assignment);

ExtractorConfig extractor_config(const TrainConfig& config);
AbstractorConfig abstractor_config(const TrainConfig& config);

}  // namespace ease
