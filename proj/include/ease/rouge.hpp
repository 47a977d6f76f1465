#pragma once

#include <string>
#include <vector>

namespace ease {

struct RougeScore {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// Clipped n-gram overlap F1, n in {1,2}. Empty n-gram sets score zero.
RougeScore rouge_n(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference, int n);

/// Longest-common-subsequence F1.
RougeScore rouge_l(const std::vector<std::string>& candidate,
                   const std::vector<std::string>& reference);

struct OracleLabels {
    std::vector<int> labels;          // 0/1 per source sentence
    std::vector<double> score_trace;  // achieved objective after each greedy step
};

/// Greedy evidence labeling: repeatedly add the sentence whose inclusion
/// most increases mean(ROUGE-1 F1, ROUGE-2 F1) of the selected set —
/// concatenated in source order — against the reference. Stops when no
/// sentence gives a strictly positive gain; ties go to the lowest index.
OracleLabels greedy_oracle(const std::vector<std::vector<std::string>>& sentences,
                           const std::vector<std::string>& reference);

/// The greedy objective on an arbitrary candidate token sequence.
double oracle_objective(const std::vector<std::string>& candidate,
                        const std::vector<std::string>& reference);

}  // namespace ease
