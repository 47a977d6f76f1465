#pragma once

#include "ease/tensor.hpp"

#include <cmath>
#include <cstdint>
#include <string_view>

namespace ease {

/// Counter-based deterministic RNG: every draw is a pure function of
/// (seed, counter), so sample streams replay identically regardless of
/// evaluation order and survive checkpointing as two integers.
struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t counter = 0;
};

namespace detail {
inline std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}
}  // namespace detail

inline std::uint64_t rng_hash(std::uint64_t seed, std::uint64_t counter) {
    return detail::mix64(seed + counter * 0x9E3779B97F4A7C15ull);
}

inline std::uint64_t next_u64(RngState& rng) {
    return rng_hash(rng.seed, rng.counter++);
}

/// Uniform draw from the open interval (0,1): 53 mantissa bits shifted by
/// half an ulp, so 0 and 1 are unreachable by construction.
inline double next_uniform(RngState& rng) {
    return (static_cast<double>(next_u64(rng) >> 11) + 0.5) * 0x1.0p-53;
}

/// Uniform integer in [0, n). Multiply-shift; bias is < 2^-53 for desk-scale n.
inline std::uint64_t next_below(RngState& rng, std::uint64_t n) {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64(rng)) * n) >> 64);
}

inline double gumbel_from_uniform(double u) {
    return -std::log(-std::log(u));
}

inline double next_gumbel(RngState& rng) {
    return gumbel_from_uniform(next_uniform(rng));
}

/// Standard normal via Box-Muller, cosine branch only: exactly two uniform
/// draws per sample keeps the counter advance input-independent.
inline double next_normal(RngState& rng) {
    const double u1 = next_uniform(rng);
    const double u2 = next_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

inline Tensor gumbel_sample(Shape shape, RngState& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t.values()[i] = next_gumbel(rng);
    return t;
}

inline Tensor normal_sample(Shape shape, double stddev, RngState& rng) {
    Tensor t = Tensor::zeros(std::move(shape));
    for (Index i = 0; i < t.size(); ++i) t.values()[i] = stddev * next_normal(rng);
    return t;
}

/// Independent named substream of a master seed (parameter init, eval
/// baselines, ...). Streams differ unless names collide.
inline RngState derive_stream(std::uint64_t master_seed, std::string_view name) {
    std::uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a
    for (char c : name) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return RngState{detail::mix64(master_seed ^ h), 0};
}

}  // namespace ease
