#include "ease/extractor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace ease {

void validate(const ExtractorConfig& config) {
    if (config.num_layers < 1) throw std::invalid_argument("extractor: num_layers must be >= 1");
    if (config.model_dim < 1 || config.num_heads < 1 ||
        config.model_dim % config.num_heads != 0)
        throw std::invalid_argument("extractor: model_dim " + std::to_string(config.model_dim) +
                                    " not divisible by num_heads " +
                                    std::to_string(config.num_heads));
    if (!(config.tau > 0.0)) throw std::invalid_argument("extractor: tau must be positive");
    if (!(config.sparsity_pi > 0.0 && config.sparsity_pi <= 1.0))
        throw std::invalid_argument("extractor: sparsity_pi must lie in (0,1]");
    if (config.min_sentences < 1)
        throw std::invalid_argument("extractor: min_sentences must be >= 1");
}

void init_extractor_params(ParamMap& params, const ExtractorConfig& config, Index vocab_size,
                           std::uint64_t master_seed) {
    validate(config);
    init_normal_param(params, "extractor/embed/token", {vocab_size, config.model_dim},
                      master_seed);
    init_normal_param(params, "extractor/embed/pos", {config.max_positions, config.model_dim},
                      master_seed);
    init_normal_param(params, "extractor/embed/seg", {2, config.model_dim}, master_seed);
    init_encoder_stack_params(params, "extractor", config.num_layers, config.model_dim,
                              config.ffn_dim, master_seed);
    // zero head: an untrained extractor is exactly indifferent (p = 0.5)
    init_zero_param(params, "extractor/score/w", {config.model_dim, 1});
    init_zero_param(params, "extractor/score/b", {1, 1});
}

MaskDistribution score_units(const ParamMap& params, const ExtractorConfig& config,
                             const EncodedExample& encoded) {
    validate(config);
    if (encoded.level != config.level)
        throw std::invalid_argument("score_units: encoding level does not match extractor level");
    const Index t = static_cast<Index>(encoded.source_ids.size());
    if (t == 0) throw std::invalid_argument("score_units: empty source");
    if (t > config.max_positions)
        throw std::invalid_argument("score_units: sequence length " + std::to_string(t) +
                                    " exceeds max_positions " +
                                    std::to_string(config.max_positions));

    Tensor tok = embedding_lookup(params.at("extractor/embed/token"), encoded.source_ids);
    Tensor pos = slice(params.at("extractor/embed/pos"), 0, t);
    Tensor seg = embedding_lookup(params.at("extractor/embed/seg"), encoded.segment_ids);
    Tensor x = add(add(tok, pos), seg);
    Tensor h = encoder_stack(params, "extractor", x, config.num_layers, config.num_heads);

    Tensor units = config.level == EncodeLevel::sentence
                       ? embedding_lookup(h, encoded.cls_positions)
                       : h;
    Tensor logits =
        affine(units, params.at("extractor/score/w"), params.at("extractor/score/b"));
    MaskDistribution dist;
    dist.unit_probs = clamp(sigmoid(logits), 1e-6, 1.0 - 1e-6);
    dist.level = config.level;
    dist.sentence_ids = encoded.sentence_ids;
    return dist;
}

Tensor soft_mask_with_noise(const MaskDistribution& dist, const Tensor& g1, const Tensor& g0,
                            double tau) {
    if (!(tau > 0.0)) throw std::invalid_argument("soft_mask: tau must be positive");
    const Index n = dist.unit_probs.rows();
    if (g1.size() != n || g0.size() != n)
        throw std::invalid_argument("soft_mask: need one g1/g0 pair per unit");

    Tensor p1 = dist.unit_probs;
    Tensor p0 = subtract(Tensor::scalar(1.0), p1);
    Tensor noise = subtract(g1, g0);
    Tensor arg = scale(add(subtract(log(p1), log(p0)), noise), 1.0 / tau);
    Tensor z = sigmoid(arg);
    if (dist.level == EncodeLevel::sentence)
        return broadcast_sentence_mask(z, dist.sentence_ids);
    return z;
}

Tensor soft_mask(const MaskDistribution& dist, RngState& rng, double tau) {
    const Index n = dist.unit_probs.rows();
    Tensor g1 = gumbel_sample({n, 1}, rng);
    Tensor g0 = gumbel_sample({n, 1}, rng);
    return soft_mask_with_noise(dist, g1, g0, tau);
}

std::vector<int> hard_select_topk(const MaskDistribution& dist, double pi, Index min_sentences) {
    if (!(pi > 0.0 && pi <= 1.0))
        throw std::invalid_argument("hard_mask: pi must lie in (0,1]");
    const Index n = dist.unit_probs.rows();
    const Index floor_units = dist.level == EncodeLevel::sentence ? min_sentences : 1;
    // tiny slack so exact-integer products never round up an extra unit
    Index k = static_cast<Index>(std::ceil(pi * static_cast<double>(n) - 1e-9));
    k = std::max(k, floor_units);
    k = std::min(std::max(k, Index{1}), n);

    std::vector<Index> order(static_cast<size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    const Array& p = dist.unit_probs.values();
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return p[a] > p[b]; });

    std::vector<int> selected(static_cast<size_t>(n), 0);
    for (Index i = 0; i < k; ++i) selected[static_cast<size_t>(order[static_cast<size_t>(i)])] = 1;
    return selected;
}

Tensor hard_mask_topk(const MaskDistribution& dist, double pi, Index min_sentences) {
    std::vector<int> selected = hard_select_topk(dist, pi, min_sentences);
    const Index n = static_cast<Index>(selected.size());
    Tensor unit_mask = Tensor::zeros({n, 1});
    for (Index i = 0; i < n; ++i)
        unit_mask.values()[i] = static_cast<double>(selected[static_cast<size_t>(i)]);
    if (dist.level == EncodeLevel::sentence)
        return broadcast_sentence_mask(unit_mask, dist.sentence_ids);
    return unit_mask;
}

Tensor broadcast_sentence_mask(const Tensor& sentence_mask,
                               const std::vector<Index>& sentence_ids) {
    if (sentence_mask.cols() != 1)
        throw std::invalid_argument("broadcast_sentence_mask: mask must be a column");
    return embedding_lookup(sentence_mask, sentence_ids);
}

}  // namespace ease
