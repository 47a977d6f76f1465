#include "ease/objectives.hpp"

#include <cmath>
#include <stdexcept>

namespace ease {

Tensor kl_sparsity(const Tensor& unit_probs, double pi) {
    if (!(pi > 0.0 && pi < 1.0))
        throw std::invalid_argument("kl_sparsity: pi must lie strictly in (0,1), got " +
                                    std::to_string(pi));
    if ((unit_probs.values() <= 0.0).any() || (unit_probs.values() >= 1.0).any())
        throw std::invalid_argument("kl_sparsity: probabilities must lie strictly in (0,1)");

    Tensor one_minus = subtract(Tensor::scalar(1.0), unit_probs);
    Tensor keep = multiply(unit_probs, subtract(log(unit_probs), Tensor::scalar(std::log(pi))));
    Tensor drop =
        multiply(one_minus, subtract(log(one_minus), Tensor::scalar(std::log(1.0 - pi))));
    return sum(add(keep, drop));
}

Tensor lasso_loss(const Tensor& token_mask) {
    if (token_mask.size() < 1) throw std::invalid_argument("lasso_loss: empty mask");
    if (token_mask.size() == 1) return Tensor::scalar(0.0);
    // masks are [T,1] columns; adjacent rows differ
    Index t = token_mask.rows();
    Tensor head = slice(token_mask, 0, t - 1);
    Tensor tail = slice(token_mask, 1, t);
    return sum(abs(subtract(head, tail)));
}

Tensor supervision_bce(const Tensor& unit_probs, const std::vector<int>& labels) {
    if (static_cast<size_t>(unit_probs.size()) != labels.size())
        throw std::invalid_argument("supervision_bce: " + std::to_string(unit_probs.size()) +
                                    " probabilities vs " + std::to_string(labels.size()) +
                                    " labels");
    for (int l : labels)
        if (l != 0 && l != 1)
            throw std::invalid_argument("supervision_bce: labels must be 0/1");

    Tensor lab = Tensor::zeros(unit_probs.shape());
    for (size_t i = 0; i < labels.size(); ++i)
        lab.values()[static_cast<Index>(i)] = static_cast<double>(labels[i]);

    Tensor one_minus_l = subtract(Tensor::scalar(1.0), lab);
    Tensor one_minus_p = subtract(Tensor::scalar(1.0), unit_probs);
    Tensor ll = add(multiply(lab, log(unit_probs)), multiply(one_minus_l, log(one_minus_p)));
    return scale(mean(ll), -1.0);
}

LossBundle combine(const Tensor& task, const Tensor& kl, const Tensor& lasso, const Tensor& bce,
                   double beta, double lasso_weight, double bce_weight) {
    if (beta < 0.0 || lasso_weight < 0.0 || bce_weight < 0.0)
        throw std::invalid_argument("combine: loss weights must be non-negative");

    LossBundle bundle;
    bundle.task = task;
    bundle.kl = kl;
    bundle.lasso = lasso;
    bundle.bce = bce;
    bundle.beta = beta;
    bundle.lasso_weight = lasso_weight;
    bundle.bce_weight = bce_weight;

    Tensor total = task;
    if (kl.defined() && beta > 0.0) total = add(total, scale(kl, beta));
    if (lasso.defined() && lasso_weight > 0.0) total = add(total, scale(lasso, lasso_weight));
    if (bce.defined() && bce_weight > 0.0) total = add(total, scale(bce, bce_weight));
    bundle.total = total;
    return bundle;
}

}  // namespace ease
