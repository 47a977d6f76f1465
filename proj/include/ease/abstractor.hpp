#pragma once

#include "ease/text.hpp"
#include "ease/transformer.hpp"

#include <cstdint>
#include <vector>

namespace ease {

enum class MaskScheme { embed_mix, attention_block };

struct AbstractorConfig {
    Index num_layers = 2;  // encoder and decoder layers each
    Index model_dim = 64;
    Index num_heads = 4;
    Index ffn_dim = 256;
    Index max_positions = 512;
    MaskScheme mask_scheme = MaskScheme::embed_mix;
    bool share_encoder = false;
};

void validate(const AbstractorConfig& config);

/// Token/position embeddings, encoder stack (omitted when share_encoder —
/// the extractor's stack weights are reused), decoder stack, untied output
/// projection. Params live under "abstractor/...".
void init_abstractor_params(ParamMap& params, const AbstractorConfig& config, Index vocab_size,
                            std::uint64_t master_seed);

/// Exact convex combination z_j = m_j * x_j + (1 - m_j) * x_mask per
/// position. mask is [T,1], mask_embedding a [1,d] row. Gradient flows to
/// all three inputs. Rejects a mask whose length differs from the sequence.
Tensor apply_mask_embedding(const Tensor& token_embeddings, const Tensor& token_mask,
                            const Tensor& mask_embedding);

/// Additive attention key bias from a [T,1] mask, returned as a [1,T] row:
/// log(m + 1e-9) for soft values, with m == 1 pinned to an exact zero bias
/// (all-ones masking is bit-for-bit a no-op) and m == 0 pinned to -1e30
/// (the softmax weight underflows to an exact zero, so hard-masked keys are
/// unattendable). Rejects values outside [0,1].
Tensor apply_mask_attention(const Tensor& token_mask);

/// Encode the masked source — independently of the extractor's encoder
/// activations — under the given scheme. Returns [T,d] memory for the
/// decoder; cross-attention must additionally apply `memory_bias` (defined
/// only under attention-block).
struct Seq2SeqState {
    Tensor memory;       // encoder output over the masked source
    Tensor memory_bias;  // [1,T] cross-attention key bias, or undefined
};

Seq2SeqState encode_masked(const ParamMap& params, const AbstractorConfig& config,
                           const std::vector<Index>& source_ids, const Tensor& token_mask,
                           MaskScheme scheme);

/// Teacher-forced mean negative log-likelihood per target token of
/// q(y | m ⊙ x). Rejects missing targets and sequences beyond max_positions.
Tensor forward_nll(const ParamMap& params, const AbstractorConfig& config,
                   const EncodedExample& encoded, const Tensor& token_mask, MaskScheme scheme);

/// Deterministic decoding: beam == 1 is greedy argmax, beam > 1 standard
/// length-normalized beam search. Stops at EOS or after max_len emitted
/// tokens; the returned sequence excludes BOS and includes EOS if produced.
std::vector<Index> generate(const ParamMap& params, const AbstractorConfig& config,
                            const EncodedExample& encoded, const Tensor& token_mask,
                            MaskScheme scheme, Index max_len, Index beam);

}  // namespace ease
