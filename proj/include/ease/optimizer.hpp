#pragma once

#include "ease/transformer.hpp"

#include <cstdint>
#include <map>
#include <string>

namespace ease {

/// Linear warmup 0 -> learning_rate over warmup_steps, then polynomial
/// (power 1) decay to 0 at total_steps. `step` counts completed updates,
/// so the first update runs at the bottom of the warmup ramp.
double lr_schedule(std::int64_t step, double learning_rate, std::int64_t warmup_steps,
                   std::int64_t total_steps);

/// Adam with bias correction. Moments are keyed by parameter name and
/// created lazily, so a fresh optimizer serializes to nothing until the
/// first step.
class Adam {
public:
    static constexpr double k_beta1 = 0.9;
    static constexpr double k_beta2 = 0.999;
    static constexpr double k_eps = 1e-8;

    /// One update over every named parameter. `grads` must hold an entry
    /// per parameter (backward(loss, params) guarantees this, with zeros
    /// for parameters the loss does not reach).
    void step(ParamMap& params, const std::map<std::string, Tensor>& grads, double lr);

    std::int64_t steps_taken() const { return t_; }
    const std::map<std::string, Tensor>& first_moments() const { return m_; }
    const std::map<std::string, Tensor>& second_moments() const { return v_; }

    /// Adopt checkpointed state. Tensors are taken as-is (callers clone).
    void restore(std::map<std::string, Tensor> m, std::map<std::string, Tensor> v,
                 std::int64_t steps);

private:
    std::map<std::string, Tensor> m_;
    std::map<std::string, Tensor> v_;
    std::int64_t t_ = 0;
};

}  // namespace ease
