#include "oodkit/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "oodkit/error.hpp"
#include "oodkit/numerics.hpp"

namespace oodkit::metrics {

double auroc(std::span<const double> id_scores, std::span<const double> ood_scores) {
    if (id_scores.empty() || ood_scores.empty()) {
        throw ValidationError("auroc: both score sets must be non-empty");
    }
    std::vector<double> id(id_scores.begin(), id_scores.end());
    std::vector<double> ood(ood_scores.begin(), ood_scores.end());
    std::sort(id.begin(), id.end());
    std::sort(ood.begin(), ood.end());

    // Twice the Mann-Whitney count, kept integral: 2 per (ood > id) pair,
    // 1 per tie.
    std::uint64_t twice_wins = 0;
    std::size_t below = 0;  // id values strictly below the current group
    std::size_t oi = 0;
    std::size_t ii = 0;
    while (oi < ood.size()) {
        const double value = ood[oi];
        while (ii < id.size() && id[ii] < value) {
            ++ii;
            ++below;
        }
        std::size_t tied_id = 0;
        std::size_t probe = ii;
        while (probe < id.size() && id[probe] == value) {
            ++tied_id;
            ++probe;
        }
        std::size_t group = 0;
        while (oi < ood.size() && ood[oi] == value) {
            ++group;
            ++oi;
        }
        twice_wins += static_cast<std::uint64_t>(group) * (2 * below + tied_id);
    }
    return static_cast<double>(twice_wins) /
           (2.0 * static_cast<double>(id.size()) * static_cast<double>(ood.size()));
}

double fpr_at_tpr(std::span<const double> id_scores, std::span<const double> ood_scores,
                  double tpr_target) {
    if (id_scores.empty() || ood_scores.empty()) {
        throw ValidationError("fpr_at_tpr: both score sets must be non-empty");
    }
    if (!(tpr_target > 0.0 && tpr_target <= 1.0)) {
        throw ValidationError("fpr_at_tpr: target must be in (0, 1]");
    }
    const std::size_t m = ood_scores.size();
    // Smallest k with k/m >= target; the threshold is then the k-th largest
    // OOD score, the largest observed value still catching k samples.
    const long double need = static_cast<long double>(tpr_target) * static_cast<long double>(m);
    auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(need)));
    while (k > 1 && static_cast<long double>(k - 1) >= need) --k;
    while (static_cast<long double>(k) < need) ++k;
    k = std::min(std::max<std::size_t>(k, 1), m);

    std::vector<double> ood(ood_scores.begin(), ood_scores.end());
    std::nth_element(ood.begin(), ood.begin() + (k - 1), ood.end(), std::greater<double>());
    const double threshold = ood[k - 1];

    std::size_t fp = 0;
    for (double s : id_scores) {
        if (s >= threshold) ++fp;
    }
    return static_cast<double>(fp) / static_cast<double>(id_scores.size());
}

EvalOutcome evaluate(std::span<const double> id_scores, std::span<const double> ood_scores) {
    EvalOutcome out;
    out.auroc = auroc(id_scores, ood_scores);
    out.fpr95 = fpr_at_tpr(id_scores, ood_scores, 0.95);
    out.n_id = id_scores.size();
    out.n_ood = ood_scores.size();
    return out;
}

CalibrationResult calibrate(std::span<const double> cal_scores, double eta) {
    if (cal_scores.empty()) throw ValidationError("calibrate: empty calibration set");
    if (!(eta > 0.0 && eta <= 100.0)) {
        throw ValidationError("calibrate: eta must be in (0, 100]");
    }
    CalibrationResult out;
    out.eta = eta;
    out.threshold = numerics::nearest_rank_percentile(cal_scores, eta);
    return out;
}

std::vector<std::uint8_t> detect(std::span<const double> test_scores,
                                 const CalibrationResult& calibration) {
    if (!std::isfinite(calibration.threshold)) {
        throw ValidationError("detect: calibration threshold is not finite");
    }
    std::vector<std::uint8_t> flags(test_scores.size());
    for (std::size_t i = 0; i < test_scores.size(); ++i) {
        flags[i] = test_scores[i] > calibration.threshold ? 1 : 0;
    }
    return flags;
}

}  // namespace oodkit::metrics
