#include "ease/abstractor.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

namespace ease {

void validate(const AbstractorConfig& config) {
    if (config.num_layers < 1) throw std::invalid_argument("abstractor: num_layers must be >= 1");
    if (config.model_dim < 1 || config.num_heads < 1 ||
        config.model_dim % config.num_heads != 0)
        throw std::invalid_argument("abstractor: model_dim " + std::to_string(config.model_dim) +
                                    " not divisible by num_heads " +
                                    std::to_string(config.num_heads));
}

void init_abstractor_params(ParamMap& params, const AbstractorConfig& config, Index vocab_size,
                            std::uint64_t master_seed) {
    validate(config);
    init_normal_param(params, "abstractor/embed/token", {vocab_size, config.model_dim},
                      master_seed);
    init_normal_param(params, "abstractor/embed/pos", {config.max_positions, config.model_dim},
                      master_seed);
    if (!config.share_encoder)
        init_encoder_stack_params(params, "abstractor", config.num_layers, config.model_dim,
                                  config.ffn_dim, master_seed);
    init_decoder_stack_params(params, "abstractor", config.num_layers, config.model_dim,
                              config.ffn_dim, master_seed);
    init_normal_param(params, "abstractor/out/w", {config.model_dim, vocab_size}, master_seed);
    init_zero_param(params, "abstractor/out/b", {1, vocab_size});
}

Tensor apply_mask_embedding(const Tensor& token_embeddings, const Tensor& token_mask,
                            const Tensor& mask_embedding) {
    if (token_mask.rows() != token_embeddings.rows() || token_mask.cols() != 1)
        throw std::invalid_argument("apply_mask_embedding: mask length " +
                                    std::to_string(token_mask.size()) + " vs sequence length " +
                                    std::to_string(token_embeddings.rows()));
    if (mask_embedding.rows() != 1 || mask_embedding.cols() != token_embeddings.cols())
        throw std::invalid_argument("apply_mask_embedding: mask embedding must be a [1,d] row");
    Tensor kept = multiply(token_embeddings, token_mask);
    Tensor dropped = matmul(subtract(Tensor::scalar(1.0), token_mask), mask_embedding);
    return add(kept, dropped);
}

Tensor apply_mask_attention(const Tensor& token_mask) {
    if (token_mask.cols() != 1)
        throw std::invalid_argument("apply_mask_attention: mask must be a [T,1] column");
    if ((token_mask.values() < 0.0).any() || (token_mask.values() > 1.0).any())
        throw std::invalid_argument("apply_mask_attention: mask values must lie in [0,1]");

    const Shape shape = token_mask.shape();
    Tensor at_one = Tensor::zeros(shape);
    Tensor at_zero = Tensor::zeros(shape);
    at_one.values() = (token_mask.values() == 1.0).cast<double>();
    at_zero.values() = (token_mask.values() == 0.0).cast<double>();

    Tensor soft = log(add_scalar(token_mask, 1e-9));
    Tensor pinned = where_mask(at_one, Tensor::zeros(shape),
                               where_mask(at_zero, Tensor::full(shape, k_neg_inf_bias), soft));
    return transpose(pinned);
}

Seq2SeqState encode_masked(const ParamMap& params, const AbstractorConfig& config,
                           const std::vector<Index>& source_ids, const Tensor& token_mask,
                           MaskScheme scheme) {
    validate(config);
    const Index t = static_cast<Index>(source_ids.size());
    if (t == 0) throw std::invalid_argument("encode_masked: empty source");
    if (t > config.max_positions)
        throw std::invalid_argument("encode_masked: sequence length " + std::to_string(t) +
                                    " exceeds max_positions " +
                                    std::to_string(config.max_positions));
    if (token_mask.rows() != t || token_mask.cols() != 1)
        throw std::invalid_argument("encode_masked: mask shape does not match source length " +
                                    std::to_string(t));

    const Tensor& token_table = params.at("abstractor/embed/token");
    Tensor tok = embedding_lookup(token_table, source_ids);

    Seq2SeqState state;
    if (scheme == MaskScheme::embed_mix) {
        if (token_table.rows() <= k_mask_id)
            throw std::invalid_argument(
                "encode_masked: embed-mix needs the reserved <mask> embedding at row " +
                std::to_string(k_mask_id));
        Tensor x_mask = slice(token_table, k_mask_id, k_mask_id + 1);
        tok = apply_mask_embedding(tok, token_mask, x_mask);
    } else {
        state.memory_bias = apply_mask_attention(token_mask);
    }

    Tensor x = add(tok, slice(params.at("abstractor/embed/pos"), 0, t));
    const std::string prefix = config.share_encoder ? "extractor" : "abstractor";
    state.memory = encoder_stack(params, prefix, x, config.num_layers, config.num_heads,
                                 state.memory_bias);
    return state;
}

namespace {

/// Decoder forward over the whole prefix; [steps,V] log-probabilities.
Tensor decode_log_probs(const ParamMap& params, const AbstractorConfig& config,
                        const std::vector<Index>& prefix_ids, const Seq2SeqState& state) {
    const Index steps = static_cast<Index>(prefix_ids.size());
    Tensor emb = add(embedding_lookup(params.at("abstractor/embed/token"), prefix_ids),
                     slice(params.at("abstractor/embed/pos"), 0, steps));
    Tensor dec = decoder_stack(params, "abstractor", emb, state.memory, config.num_layers,
                               config.num_heads, state.memory_bias);
    Tensor logits = affine(dec, params.at("abstractor/out/w"), params.at("abstractor/out/b"));
    return log_softmax_rows(logits);
}

}  // namespace

Tensor forward_nll(const ParamMap& params, const AbstractorConfig& config,
                   const EncodedExample& encoded, const Tensor& token_mask, MaskScheme scheme) {
    const auto& target = encoded.target_ids;
    if (target.size() < 2)
        throw std::invalid_argument("forward_nll: target must hold BOS, content, EOS");
    if (static_cast<Index>(target.size()) > config.max_positions)
        throw std::invalid_argument("forward_nll: target length " +
                                    std::to_string(target.size()) + " exceeds max_positions " +
                                    std::to_string(config.max_positions));

    Seq2SeqState state = encode_masked(params, config, encoded.source_ids, token_mask, scheme);

    const Index steps = static_cast<Index>(target.size()) - 1;
    std::vector<Index> dec_in(target.begin(), target.end() - 1);
    Tensor logp = decode_log_probs(params, config, dec_in, state);

    // pick the gold log-prob per row with a one-hot constant
    Tensor onehot = Tensor::zeros(logp.shape());
    const Index vocab = logp.cols();
    for (Index i = 0; i < steps; ++i) {
        Index gold = target[static_cast<size_t>(i + 1)];
        if (gold < 0 || gold >= vocab)
            throw std::invalid_argument("forward_nll: target id " + std::to_string(gold) +
                                        " outside vocabulary of " + std::to_string(vocab));
        onehot.values()[i * vocab + gold] = 1.0;
    }
    return scale(sum(multiply(logp, onehot)), -1.0 / static_cast<double>(steps));
}

std::vector<Index> generate(const ParamMap& params, const AbstractorConfig& config,
                            const EncodedExample& encoded, const Tensor& token_mask,
                            MaskScheme scheme, Index max_len, Index beam) {
    if (beam < 1) throw std::invalid_argument("generate: beam must be >= 1");
    if (max_len < 1) throw std::invalid_argument("generate: max_len must be >= 1");

    NoGradGuard guard;
    Seq2SeqState state = encode_masked(params, config, encoded.source_ids, token_mask, scheme);
    // the decoder prefix may not outgrow the positional table
    const Index len_cap =
        std::min(max_len, static_cast<Index>(config.max_positions) - 1);

    auto last_row = [&](const std::vector<Index>& prefix_ids) {
        Tensor logp = decode_log_probs(params, config, prefix_ids, state);
        const Index vocab = logp.cols();
        const Index last = logp.rows() - 1;
        std::vector<double> row(static_cast<size_t>(vocab));
        for (Index v = 0; v < vocab; ++v) row[static_cast<size_t>(v)] = logp.values()[last * vocab + v];
        return row;
    };

    if (beam == 1) {
        std::vector<Index> seq{k_bos_id};
        while (static_cast<Index>(seq.size()) - 1 < len_cap) {
            std::vector<double> row = last_row(seq);
            Index best = 0;
            for (Index v = 1; v < static_cast<Index>(row.size()); ++v)
                if (row[static_cast<size_t>(v)] > row[static_cast<size_t>(best)]) best = v;
            seq.push_back(best);
            if (best == k_eos_id) break;
        }
        return {seq.begin() + 1, seq.end()};
    }

    struct Hypothesis {
        std::vector<Index> seq;  // starts with BOS
        double logp_sum = 0.0;
        bool finished = false;
    };
    auto norm_score = [](const Hypothesis& h) {
        return h.logp_sum / static_cast<double>(h.seq.size() - 1);
    };

    std::vector<Hypothesis> live{{{k_bos_id}, 0.0, false}};
    std::vector<Hypothesis> done;
    while (!live.empty()) {
        std::vector<Hypothesis> candidates;
        for (const Hypothesis& h : live) {
            std::vector<double> row = last_row(h.seq);
            // top `beam` continuations of this hypothesis, ties to lower ids
            std::vector<Index> ids(row.size());
            std::iota(ids.begin(), ids.end(), Index{0});
            std::stable_sort(ids.begin(), ids.end(), [&](Index a, Index b) {
                return row[static_cast<size_t>(a)] > row[static_cast<size_t>(b)];
            });
            const Index take = std::min<Index>(beam, static_cast<Index>(ids.size()));
            for (Index i = 0; i < take; ++i) {
                Hypothesis next = h;
                next.seq.push_back(ids[static_cast<size_t>(i)]);
                next.logp_sum += row[static_cast<size_t>(ids[static_cast<size_t>(i)])];
                next.finished = ids[static_cast<size_t>(i)] == k_eos_id ||
                                static_cast<Index>(next.seq.size()) - 1 >= len_cap;
                candidates.push_back(std::move(next));
            }
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [](const Hypothesis& a, const Hypothesis& b) {
                             return a.logp_sum > b.logp_sum;
                         });
        if (static_cast<Index>(candidates.size()) > beam) candidates.resize(static_cast<size_t>(beam));
        live.clear();
        for (Hypothesis& c : candidates)
            (c.finished ? done : live).push_back(std::move(c));
    }

    const Hypothesis* best = nullptr;
    for (const Hypothesis& h : done)
        if (!best || norm_score(h) > norm_score(*best)) best = &h;
    return {best->seq.begin() + 1, best->seq.end()};
}

}  // namespace ease
