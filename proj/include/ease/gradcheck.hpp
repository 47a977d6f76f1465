#pragma once

#include "ease/autodiff.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>

namespace ease {

/// Central-difference check of reverse-mode gradients. `f` must rebuild the
/// scalar loss from the current parameter values on every call and be
/// deterministic (freeze any noise outside). Returns the worst relative error
///   |analytic - numeric| / max(|analytic|, |numeric|, floor)
/// over every coordinate of every parameter; throws on non-finite values,
/// naming the offending coordinate. Raise `floor` for large composites: a
/// coordinate whose true gradient sits near the fd noise level
/// (roughly |loss| * 1e-16 / eps) cannot be certified by any ratio, and the
/// floor turns those into an absolute-agreement test instead.
inline double finite_difference_check(const std::function<Tensor()>& f,
                                      const std::map<std::string, Tensor>& params,
                                      double eps = 1e-5, double floor = 1e-8) {
    std::map<std::string, Tensor> analytic;
    {
        Tape tape;
        Tensor loss = f();
        if (!std::isfinite(loss.item()))
            throw std::runtime_error("finite_difference_check: non-finite loss");
        analytic = tape.backward(loss, params);
    }

    auto eval = [&]() {
        NoGradGuard guard;
        return f().item();
    };

    double worst = 0.0;
    for (const auto& [name, handle] : params) {
        Tensor param = handle;
        const Tensor& a = analytic.at(name);
        for (Index i = 0; i < param.size(); ++i) {
            const double saved = param.values()[i];
            param.values()[i] = saved + eps;
            const double up = eval();
            param.values()[i] = saved - eps;
            const double down = eval();
            param.values()[i] = saved;

            const double numeric = (up - down) / (2.0 * eps);
            const double exact = a.values()[i];
            if (!std::isfinite(numeric) || !std::isfinite(exact))
                throw std::runtime_error("finite_difference_check: non-finite gradient at " +
                                         name + "[" + std::to_string(i) + "]");
            const double rel = std::abs(exact - numeric) /
                               std::max({std::abs(exact), std::abs(numeric), 1e-8});
            worst = std::max(worst, rel);
        }
    }
    return worst;
}

}  // namespace ease
