#include "ease/optimizer.hpp"

#include <cmath>
#include <stdexcept>

namespace ease {

double lr_schedule(std::int64_t step, double learning_rate, std::int64_t warmup_steps,
                   std::int64_t total_steps) {
    if (step < 0) step = 0;
    if (step >= total_steps) return 0.0;
    // ratio first, so the warmup boundary lands on exactly learning_rate
    if (warmup_steps > 0 && step < warmup_steps)
        return learning_rate * (static_cast<double>(step) / static_cast<double>(warmup_steps));
    return learning_rate * (static_cast<double>(total_steps - step) /
                            static_cast<double>(total_steps - warmup_steps));
}

void Adam::step(ParamMap& params, const std::map<std::string, Tensor>& grads, double lr) {
    ++t_;
    const double bc1 = 1.0 - std::pow(k_beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(k_beta2, static_cast<double>(t_));

    for (auto& [name, param] : params) {
        auto git = grads.find(name);
        if (git == grads.end())
            throw std::invalid_argument("adam: no gradient for parameter " + name);
        const Tensor& grad = git->second;
        if (grad.shape() != param.shape())
            throw std::invalid_argument("adam: gradient shape mismatch for " + name);

        Tensor& m = m_.try_emplace(name, Tensor::zeros(param.shape())).first->second;
        Tensor& v = v_.try_emplace(name, Tensor::zeros(param.shape())).first->second;

        m.values() = k_beta1 * m.values() + (1.0 - k_beta1) * grad.values();
        v.values() = k_beta2 * v.values() + (1.0 - k_beta2) * grad.values().square();

        param.values() -=
            lr * (m.values() / bc1) / ((v.values() / bc2).sqrt() + k_eps);
    }
}

void Adam::restore(std::map<std::string, Tensor> m, std::map<std::string, Tensor> v,
                   std::int64_t steps) {
    m_ = std::move(m);
    v_ = std::move(v);
    t_ = steps;
}

}  // namespace ease
