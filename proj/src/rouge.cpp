#include "ease/rouge.hpp"

#include <algorithm>
#include <cstdint>
#include <map>

namespace ease {

namespace {

RougeScore make_score(double overlap, double cand_total, double ref_total) {
    RougeScore s;
    if (cand_total > 0.0) s.precision = overlap / cand_total;
    if (ref_total > 0.0) s.recall = overlap / ref_total;
    if (s.precision + s.recall > 0.0)
        s.f1 = 2.0 * s.precision * s.recall / (s.precision + s.recall);
    return s;
}

std::map<std::string, std::int64_t> ngram_counts(const std::vector<std::string>& tokens, int n) {
    std::map<std::string, std::int64_t> counts;
    if (static_cast<int>(tokens.size()) < n) return counts;
    for (size_t i = 0; i + static_cast<size_t>(n) <= tokens.size(); ++i) {
        std::string key = tokens[i];
        for (int k = 1; k < n; ++k) {
            key.push_back('\x1f');  // unit separator, cannot appear in a token
            key += tokens[i + static_cast<size_t>(k)];
        }
        counts[key]++;
    }
    return counts;
}

}  // namespace

RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n) {
    auto cand = ngram_counts(candidate, n);
    auto ref = ngram_counts(reference, n);

    std::int64_t overlap = 0, cand_total = 0, ref_total = 0;
    for (const auto& [gram, count] : cand) {
        cand_total += count;
        auto it = ref.find(gram);
        if (it != ref.end()) overlap += std::min(count, it->second);  // clipped
    }
    for (const auto& [gram, count] : ref) ref_total += count;

    return make_score(static_cast<double>(overlap), static_cast<double>(cand_total),
                      static_cast<double>(ref_total));
}

RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference) {
    const size_t m = candidate.size(), n = reference.size();
    if (m == 0 || n == 0) return {};

    // one-row LCS table
    std::vector<std::int64_t> prev(n + 1, 0), cur(n + 1, 0);
    for (size_t i = 1; i <= m; ++i) {
        for (size_t j = 1; j <= n; ++j) {
            if (candidate[i - 1] == reference[j - 1])
                cur[j] = prev[j - 1] + 1;
            else
                cur[j] = std::max(prev[j], cur[j - 1]);
        }
        std::swap(prev, cur);
    }
    return make_score(static_cast<double>(prev[n]), static_cast<double>(m),
                      static_cast<double>(n));
}

double oracle_objective(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference) {
    return 0.5 * (rouge_n(candidate, reference, 1).f1 + rouge_n(candidate, reference, 2).f1);
}

OracleLabels greedy_oracle(const std::vector<std::vector<std::string>>& sentences,
                           const std::vector<std::string>& reference) {
    constexpr double k_gain_floor = 1e-12;  // "strictly positive" under fp noise

    OracleLabels out;
    out.labels.assign(sentences.size(), 0);

    double current = 0.0;
    for (size_t step = 0; step < sentences.size(); ++step) {
        int best = -1;
        double best_score = current;
        for (size_t s = 0; s < sentences.size(); ++s) {
            if (out.labels[s]) continue;
            std::vector<std::string> joined;
            for (size_t t = 0; t < sentences.size(); ++t)
                if (out.labels[t] || t == s)  // concatenate in source order
                    joined.insert(joined.end(), sentences[t].begin(), sentences[t].end());
            double score = oracle_objective(joined, reference);
            if (score > best_score + k_gain_floor) {  // strict gain; ties keep lowest index
                best_score = score;
                best = static_cast<int>(s);
            }
        }
        if (best < 0) break;
        out.labels[static_cast<size_t>(best)] = 1;
        out.score_trace.push_back(best_score);
        current = best_score;
    }
    return out;
}

}  // namespace ease
