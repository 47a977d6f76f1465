#pragma once

#include "ease/text.hpp"
#include "ease/transformer.hpp"

#include <cstdint>
#include <vector>

namespace ease {

struct ExtractorConfig {
    Index num_layers = 2;
    Index model_dim = 64;
    Index num_heads = 4;
    Index ffn_dim = 256;
    Index max_positions = 512;
    EncodeLevel level = EncodeLevel::sentence;
    double tau = 0.01;
    double sparsity_pi = 0.5;
    Index min_sentences = 3;
};

/// Throws unless model_dim % num_heads == 0, tau > 0, 0 < sparsity_pi <= 1,
/// min_sentences >= 1.
void validate(const ExtractorConfig& config);

/// Bernoulli selection probabilities, one per maskable unit (token or
/// sentence). Probabilities are clamped strictly inside (0,1).
struct MaskDistribution {
    Tensor unit_probs;                // [num_units, 1]
    EncodeLevel level = EncodeLevel::sentence;
    std::vector<Index> sentence_ids;  // per source token, for broadcasting
};

/// Token/position/segment embeddings, encoder stack, scoring head.
/// Params live under "extractor/...". The scoring head starts at zero so an
/// untrained extractor scores every unit exactly 0.5.
void init_extractor_params(ParamMap& params, const ExtractorConfig& config, Index vocab_size,
                           std::uint64_t master_seed);

/// Run the encoder and the sigmoid scoring head: per token at token level,
/// per CLS representation at sentence level. Rejects sequences longer than
/// max_positions and encodings whose level disagrees with the config.
MaskDistribution score_units(const ParamMap& params, const ExtractorConfig& config,
                             const EncodedExample& encoded);

/// Two-class Gumbel-Softmax relaxation at temperature tau: per unit
///   z* = sigmoid((log p1 - log p0 + g1 - g0) / tau),
/// noise drawn from rng (g1 for the whole batch of units, then g0).
/// Sentence-level values broadcast to member tokens; result is a [T,1] mask
/// with gradient flowing to unit_probs.
Tensor soft_mask(const MaskDistribution& dist, RngState& rng, double tau);

/// soft_mask with caller-supplied noise, one g1/g0 pair per unit.
Tensor soft_mask_with_noise(const MaskDistribution& dist, const Tensor& g1, const Tensor& g0,
                            double tau);

/// Deterministic top-k selection: k = max(ceil(pi * num_units), floor) with
/// floor = min_sentences at sentence level and 1 at token level, capped at
/// num_units. Ties broken by earlier position. Returns a {0,1} token mask.
Tensor hard_mask_topk(const MaskDistribution& dist, double pi, Index min_sentences);

/// Per-unit selection flags of hard_mask_topk before broadcasting.
std::vector<int> hard_select_topk(const MaskDistribution& dist, double pi, Index min_sentences);

/// Token j receives sentence_mask[sentence_ids[j]]; gradient scatters back
/// to the sentence entries. Rejects out-of-range ids.
Tensor broadcast_sentence_mask(const Tensor& sentence_mask, const std::vector<Index>& sentence_ids);

}  // namespace ease
