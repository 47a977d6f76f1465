#include "ease/transformer.hpp"

#include <cmath>
#include <stdexcept>

namespace ease {

Tensor init_normal_param(ParamMap& params, const std::string& name, const Shape& shape,
                         std::uint64_t master_seed, double stddev) {
    if (params.count(name))
        throw std::invalid_argument("init param: duplicate name " + name);
    RngState stream = derive_stream(master_seed, name);
    Tensor t = normal_sample(shape, stddev, stream);
    t.set_requires_grad(true);
    params.emplace(name, t);
    return t;
}

Tensor init_zero_param(ParamMap& params, const std::string& name, const Shape& shape) {
    if (params.count(name))
        throw std::invalid_argument("init param: duplicate name " + name);
    Tensor t = Tensor::zeros(shape);
    t.set_requires_grad(true);
    params.emplace(name, t);
    return t;
}

void init_attention_params(ParamMap& params, const std::string& prefix, Index model_dim,
                           std::uint64_t master_seed) {
    for (const char* w : {"wq", "wk", "wv", "wo"})
        init_normal_param(params, prefix + "/" + w, {model_dim, model_dim}, master_seed);
    for (const char* b : {"bq", "bk", "bv", "bo"})
        init_zero_param(params, prefix + "/" + b, {1, model_dim});
}

void init_ffn_params(ParamMap& params, const std::string& prefix, Index model_dim,
                     Index ffn_dim, std::uint64_t master_seed) {
    init_normal_param(params, prefix + "/w1", {model_dim, ffn_dim}, master_seed);
    init_zero_param(params, prefix + "/b1", {1, ffn_dim});
    init_normal_param(params, prefix + "/w2", {ffn_dim, model_dim}, master_seed);
    init_zero_param(params, prefix + "/b2", {1, model_dim});
}

void init_encoder_stack_params(ParamMap& params, const std::string& prefix, Index num_layers,
                               Index model_dim, Index ffn_dim, std::uint64_t master_seed) {
    for (Index i = 0; i < num_layers; ++i) {
        const std::string layer = prefix + "/enc" + std::to_string(i);
        init_attention_params(params, layer + "/attn", model_dim, master_seed);
        init_ffn_params(params, layer + "/ffn", model_dim, ffn_dim, master_seed);
    }
}

void init_decoder_stack_params(ParamMap& params, const std::string& prefix, Index num_layers,
                               Index model_dim, Index ffn_dim, std::uint64_t master_seed) {
    for (Index i = 0; i < num_layers; ++i) {
        const std::string layer = prefix + "/dec" + std::to_string(i);
        init_attention_params(params, layer + "/self", model_dim, master_seed);
        init_attention_params(params, layer + "/cross", model_dim, master_seed);
        init_ffn_params(params, layer + "/ffn", model_dim, ffn_dim, master_seed);
    }
}

Tensor causal_bias(Index t) {
    Tensor bias = Tensor::zeros({t, t});
    for (Index i = 0; i < t; ++i)
        for (Index j = i + 1; j < t; ++j) bias.values()[i * t + j] = k_neg_inf_bias;
    return bias;
}

namespace {

const Tensor& named(const ParamMap& params, const std::string& name) {
    auto it = params.find(name);
    if (it == params.end()) throw std::invalid_argument("missing parameter " + name);
    return it->second;
}

}  // namespace

Tensor multi_head_attention(const ParamMap& params, const std::string& prefix,
                            const Tensor& queries, const Tensor& keys_values, Index num_heads,
                            const Tensor& key_bias, bool causal) {
    const Index d = queries.cols();
    if (d % num_heads != 0)
        throw std::invalid_argument("multi_head_attention: model_dim " + std::to_string(d) +
                                    " not divisible by " + std::to_string(num_heads) + " heads");
    const Index dh = d / num_heads;
    const Index tq = queries.rows();
    const Index tk = keys_values.rows();
    if (causal && tq != tk)
        throw std::invalid_argument("multi_head_attention: causal attention needs square scores");

    Tensor q = affine(queries, named(params, prefix + "/wq"), named(params, prefix + "/bq"));
    Tensor k = affine(keys_values, named(params, prefix + "/wk"), named(params, prefix + "/bk"));
    Tensor v = affine(keys_values, named(params, prefix + "/wv"), named(params, prefix + "/bv"));

    Tensor future;
    if (causal) future = causal_bias(tq);

    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));
    std::vector<Tensor> heads;
    heads.reserve(static_cast<size_t>(num_heads));
    for (Index h = 0; h < num_heads; ++h) {
        Tensor qh = slice(q, 0, tq, h * dh, (h + 1) * dh);
        Tensor kh = slice(k, 0, tk, h * dh, (h + 1) * dh);
        Tensor vh = slice(v, 0, tk, h * dh, (h + 1) * dh);
        Tensor scores = scale(matmul(qh, transpose(kh)), inv_sqrt);
        if (key_bias.defined()) scores = add(scores, key_bias);
        if (causal) scores = add(scores, future);
        heads.push_back(matmul(softmax_rows(scores), vh));
    }
    Tensor ctx = concat(heads, 1);
    return affine(ctx, named(params, prefix + "/wo"), named(params, prefix + "/bo"));
}

Tensor ffn(const ParamMap& params, const std::string& prefix, const Tensor& x) {
    Tensor hidden = relu(affine(x, named(params, prefix + "/w1"), named(params, prefix + "/b1")));
    return affine(hidden, named(params, prefix + "/w2"), named(params, prefix + "/b2"));
}

Tensor encoder_stack(const ParamMap& params, const std::string& prefix, Tensor x,
                     Index num_layers, Index num_heads, const Tensor& key_bias) {
    for (Index i = 0; i < num_layers; ++i) {
        const std::string layer = prefix + "/enc" + std::to_string(i);
        Tensor h = layer_norm(x);
        x = add(x, multi_head_attention(params, layer + "/attn", h, h, num_heads, key_bias));
        x = add(x, ffn(params, layer + "/ffn", layer_norm(x)));
    }
    return layer_norm(x);
}

Tensor decoder_stack(const ParamMap& params, const std::string& prefix, Tensor x,
                     const Tensor& memory, Index num_layers, Index num_heads,
                     const Tensor& memory_key_bias) {
    for (Index i = 0; i < num_layers; ++i) {
        const std::string layer = prefix + "/dec" + std::to_string(i);
        Tensor h = layer_norm(x);
        x = add(x, multi_head_attention(params, layer + "/self", h, h, num_heads, {}, true));
        x = add(x, multi_head_attention(params, layer + "/cross", layer_norm(x), memory,
                                        num_heads, memory_key_bias));
        x = add(x, ffn(params, layer + "/ffn", layer_norm(x)));
    }
    return layer_norm(x);
}

}  // namespace ease
