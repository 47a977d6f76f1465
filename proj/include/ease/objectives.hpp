#pragma once

#include "ease/autodiff.hpp"

#include <vector>

namespace ease {

/// Everything Eq. 4 adds up, kept as tensors so gradients flow through the
/// enabled terms. total = task + beta*kl + lasso_weight*lasso + bce_weight*bce.
struct LossBundle {
    Tensor task;
    Tensor kl;
    Tensor lasso;
    Tensor bce;
    Tensor total;
    double beta = 5.0;
    double lasso_weight = 0.0;
    double bce_weight = 0.0;
};

/// KL(Bernoulli(p_j) || Bernoulli(pi)) summed over units (Eq. 3).
/// Probabilities must lie strictly in (0,1); pi in (0,1).
Tensor kl_sparsity(const Tensor& unit_probs, double pi);

/// Fused-lasso transition penalty: sum_i |m_i - m_{i+1}| down the token mask.
Tensor lasso_loss(const Tensor& token_mask);

/// Mean binary cross entropy of unit probabilities against 0/1 oracle labels.
Tensor supervision_bce(const Tensor& unit_probs, const std::vector<int>& labels);

/// Weighted combination per the LossBundle invariant. Disabled terms
/// (weight 0 or undefined tensor) contribute nothing to the graph.
LossBundle combine(const Tensor& task, const Tensor& kl, const Tensor& lasso, const Tensor& bce,
                   double beta, double lasso_weight, double bce_weight);

}  // namespace ease
