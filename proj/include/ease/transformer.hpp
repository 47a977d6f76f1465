#pragma once

#include "ease/autodiff.hpp"
#include "ease/rng.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ease {

/// All learnable tensors keyed by slash-separated names, e.g.
/// "extractor/enc0/attn/wq". std::map ordering doubles as the canonical
/// checkpoint order.
using ParamMap = std::map<std::string, Tensor>;

/// Create a parameter initialized N(0, stddev) from the stream derived from
/// (master_seed, name) — the same seed reproduces the same parameter no
/// matter what order parameters are created in.
Tensor init_normal_param(ParamMap& params, const std::string& name, const Shape& shape,
                         std::uint64_t master_seed, double stddev = 0.02);

/// Create a zero-initialized parameter (biases, scoring head).
Tensor init_zero_param(ParamMap& params, const std::string& name, const Shape& shape);

/// Attention block params under prefix: wq,bq,wk,bk,wv,bv,wo,bo.
void init_attention_params(ParamMap& params, const std::string& prefix, Index model_dim,
                           std::uint64_t master_seed);

/// Feed-forward params under prefix: w1,b1,w2,b2.
void init_ffn_params(ParamMap& params, const std::string& prefix, Index model_dim,
                     Index ffn_dim, std::uint64_t master_seed);

/// Encoder layers prefix/enc{i}/{attn,ffn}/..., i in [0,num_layers).
void init_encoder_stack_params(ParamMap& params, const std::string& prefix, Index num_layers,
                               Index model_dim, Index ffn_dim, std::uint64_t master_seed);

/// Decoder layers prefix/dec{i}/{self,cross,ffn}/...
void init_decoder_stack_params(ParamMap& params, const std::string& prefix, Index num_layers,
                               Index model_dim, Index ffn_dim, std::uint64_t master_seed);

/// Constant [t,t] additive bias: 0 at or below the diagonal, -1e30 above
/// (future positions unattendable). Not recorded on the tape.
Tensor causal_bias(Index t);

/// Large negative constant standing in for -inf in attention scores; finite
/// so that "-1e30 minus a finite row max" stays well-defined and exp
/// underflows to an exact zero weight.
inline constexpr double k_neg_inf_bias = -1e30;

/// Multi-head attention with params at prefix/{wq,...}. queries [Tq,d] and
/// keys_values [Tk,d] may differ (cross-attention). key_bias, when defined,
/// is a [1,Tk] row added to every query's scores; causal additionally blocks
/// j > i (requires Tq == Tk).
Tensor multi_head_attention(const ParamMap& params, const std::string& prefix,
                            const Tensor& queries, const Tensor& keys_values, Index num_heads,
                            const Tensor& key_bias = {}, bool causal = false);

/// Position-wise two-layer ReLU network with params at prefix/{w1,b1,w2,b2}.
Tensor ffn(const ParamMap& params, const std::string& prefix, const Tensor& x);

/// Pre-LN encoder: per layer x += attn(ln(x)); x += ffn(ln(x)); final ln.
/// key_bias (optional [1,T] row) masks self-attention keys.
Tensor encoder_stack(const ParamMap& params, const std::string& prefix, Tensor x,
                     Index num_layers, Index num_heads, const Tensor& key_bias = {});

/// Pre-LN decoder: causal self-attention, cross-attention over memory
/// (optionally with memory_key_bias), feed-forward; final ln.
Tensor decoder_stack(const ParamMap& params, const std::string& prefix, Tensor x,
                     const Tensor& memory, Index num_layers, Index num_heads,
                     const Tensor& memory_key_bias = {});

}  // namespace ease
