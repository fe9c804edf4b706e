#ifndef OODKIT_SCORES_HPP
#define OODKIT_SCORES_HPP

#include <string>
#include <string_view>
#include <vector>

#include "oodkit/fitstats.hpp"
#include "oodkit/matrix.hpp"

namespace oodkit::scores {

// Per-sample scores. Orientation is fixed for every function: higher means
// more out-of-distribution, so one calibration and one metric path serve all.
struct OodScores {
    std::vector<double> values;
    std::string score_name;
};

OodScores score_msp(const Matrix& logits);
OodScores score_maxlogit(const Matrix& logits);
OodScores score_energy(const Matrix& logits);
OodScores score_kl_matching(const Matrix& logits, const fitstats::KlTemplates& templates);
OodScores score_mahalanobis(const Matrix& features, const fitstats::ClassStats& stats);
OodScores score_residual(const Matrix& features, const fitstats::PrincipalSubspace& subspace);
OodScores score_react(const Matrix& features, const fitstats::LinearHead& head,
                      const fitstats::ReactParams& react);
OodScores score_vim(const Matrix& features, const Matrix& logits,
                    const fitstats::VimParams& vim,
                    const fitstats::PrincipalSubspace& subspace);

const std::vector<std::string>& score_names();
bool is_score_name(std::string_view name);

// Dispatch by name. features/logits may be null when the score does not use
// them; a needed-but-missing input raises a ValidationError naming it.
OodScores score_batch(std::string_view name, const Matrix* features,
                      const Matrix* logits, const fitstats::IdStats& stats);

}  // namespace oodkit::scores

#endif
