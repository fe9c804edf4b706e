#ifndef OODKIT_METRICS_HPP
#define OODKIT_METRICS_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace oodkit::metrics {

struct EvalOutcome {
    double auroc = 0.0;
    double fpr95 = 0.0;
    std::size_t n_id = 0;
    std::size_t n_ood = 0;
};

// Mann-Whitney AUROC with 0.5 credit per tie; OOD is the positive class and
// scores are oriented higher = more OOD. Equals the O(n*m) pairwise count
// exactly (both reduce to the same integer tally).
double auroc(std::span<const double> id_scores, std::span<const double> ood_scores);

// FPR at the largest threshold t (drawn from the observed OOD score values)
// with TPR(t) = |{ood >= t}|/m >= tpr_target; FPR(t) = |{id >= t}|/n.
// Step-function ROC, no interpolation.
double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double tpr_target);

EvalOutcome evaluate(std::span<const double> id_scores, std::span<const double> ood_scores);

struct CalibrationResult {
    double threshold = 0.0;
    double eta = 95.0;
};

// T = nearest-rank eta percentile of the calibration scores.
CalibrationResult calibrate(std::span<const double> cal_scores, double eta);

// Outlier flags: score > T, strict.
std::vector<std::uint8_t> detect(std::span<const double> test_scores,
                                 const CalibrationResult& calibration);

}  // namespace oodkit::metrics

#endif
