#include "oodkit/scores.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"
#include "oodkit/numerics.hpp"

namespace oodkit::scores {

namespace {

constexpr double kTemplateFloor = 1e-12;

// Stable logistic, exact complement of itself under negation.
double logistic(double z) {
    if (z >= 0.0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

Matrix head_logits(const Matrix& features, const fitstats::LinearHead& head) {
    Matrix logits = kernels::par::matmul_nt(features, head.weights);
    kernels::par::add_row_vector(logits, head.bias);
    return logits;
}

}  // namespace

OodScores score_msp(const Matrix& logits) {
    if (logits.cols < 2) {
        throw ValidationError("score_msp: needs at least 2 classes");
    }
    OodScores out{std::vector<double>(logits.rows), "msp"};
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const std::vector<double> p = numerics::softmax(logits.row(i));
        double mx = p[0];
        for (double v : p) mx = std::max(mx, v);
        out.values[i] = -mx;
    }
    return out;
}

OodScores score_maxlogit(const Matrix& logits) {
    if (logits.cols < 1) throw ValidationError("score_maxlogit: needs at least 1 class");
    OodScores out{std::vector<double>(logits.rows), "maxlogit"};
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < logits.rows; ++i) {
        auto row = logits.row(i);
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        out.values[i] = -mx;
    }
    return out;
}

OodScores score_energy(const Matrix& logits) {
    if (logits.cols < 1) throw ValidationError("score_energy: needs at least 1 class");
    OodScores out{std::vector<double>(logits.rows), "energy"};
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < logits.rows; ++i) {
        out.values[i] = -numerics::logsumexp(logits.row(i));
    }
    return out;
}

OodScores score_kl_matching(const Matrix& logits, const fitstats::KlTemplates& templates) {
    if (templates.class_dists.cols != logits.cols) {
        throw ValidationError("score_kl_matching: template width does not match logits");
    }
    const std::size_t num_templates = templates.class_dists.rows;
    OodScores out{std::vector<double>(logits.rows), "kl_matching"};
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < logits.rows; ++i) {
        const std::vector<double> p = numerics::softmax(logits.row(i));
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < num_templates; ++k) {
            double kl = 0.0;
            for (std::size_t j = 0; j < p.size(); ++j) {
                if (p[j] > 0.0) {
                    const double q = std::max(templates.class_dists(k, j), kTemplateFloor);
                    kl += p[j] * std::log(p[j] / q);
                }
            }
            best = std::min(best, kl);
        }
        out.values[i] = best;
    }
    return out;
}

OodScores score_mahalanobis(const Matrix& features, const fitstats::ClassStats& stats) {
    const std::size_t d = features.cols;
    if (stats.centroids.cols != d || stats.shared_precision.rows != d) {
        throw ValidationError("score_mahalanobis: dimension mismatch with fitted stats");
    }
    const std::size_t num_classes = stats.centroids.rows;
    OodScores out{std::vector<double>(features.rows), "mahalanobis"};
#pragma omp parallel
    {
        std::vector<double> dev(d);
#pragma omp for schedule(static)
        for (std::size_t i = 0; i < features.rows; ++i) {
            const double* x = features.data.data() + i * d;
            double best = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < num_classes; ++k) {
                const double* mu = stats.centroids.data.data() + k * d;
                for (std::size_t j = 0; j < d; ++j) dev[j] = x[j] - mu[j];
                double q = 0.0;
                for (std::size_t r = 0; r < d; ++r) {
                    const double* prow = stats.shared_precision.data.data() + r * d;
                    double acc = 0.0;
                    for (std::size_t c = 0; c < d; ++c) acc += prow[c] * dev[c];
                    q += dev[r] * acc;
                }
                best = std::min(best, q);
            }
            out.values[i] = best;
        }
    }
    return out;
}

OodScores score_residual(const Matrix& features, const fitstats::PrincipalSubspace& subspace) {
    if (subspace.origin.size() != features.cols) {
        throw ValidationError("score_residual: dimension mismatch with fitted subspace");
    }
    OodScores out{kernels::par::residual_norms(features, subspace.origin,
                                               subspace.residual_basis),
                  "residual"};
    return out;
}

OodScores score_react(const Matrix& features, const fitstats::LinearHead& head,
                      const fitstats::ReactParams& react) {
    if (!head.present) {
        throw ValidationError("score_react: ReAct requires head weights to recompute logits");
    }
    if (head.weights.cols != features.cols) {
        throw ValidationError("score_react: head width does not match features");
    }
    const Matrix clipped = kernels::par::clip_upper(features, react.clip_value);
    const Matrix logits = head_logits(clipped, head);
    OodScores out = score_energy(logits);
    out.score_name = "react";
    return out;
}

OodScores score_vim(const Matrix& features, const Matrix& logits,
                    const fitstats::VimParams& vim,
                    const fitstats::PrincipalSubspace& subspace) {
    if (features.rows != logits.rows) {
        throw ValidationError("score_vim: feature and logit row counts differ");
    }
    if (subspace.origin.size() != features.cols) {
        throw ValidationError("score_vim: dimension mismatch with fitted subspace");
    }
    const std::vector<double> norms =
        kernels::par::residual_norms(features, subspace.origin, subspace.residual_basis);
    OodScores out{std::vector<double>(features.rows), "vim"};
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < features.rows; ++i) {
        // e^{a r} / (sum_i e^{l_i} + e^{a r}) evaluated as a logistic in
        // a r - logsumexp(l), which cannot overflow.
        const double z = vim.alpha * norms[i] - numerics::logsumexp(logits.row(i));
        out.values[i] = logistic(z);
    }
    return out;
}

const std::vector<std::string>& score_names() {
    static const std::vector<std::string> names = {
        "msp", "maxlogit", "energy", "kl_matching",
        "mahalanobis", "residual", "react", "vim"};
    return names;
}

bool is_score_name(std::string_view name) {
    for (const auto& n : score_names()) {
        if (n == name) return true;
    }
    return false;
}

OodScores score_batch(std::string_view name, const Matrix* features,
                      const Matrix* logits, const fitstats::IdStats& stats) {
    auto need_features = [&]() -> const Matrix& {
        if (!features) {
            throw ValidationError("score '" + std::string(name) + "' requires features");
        }
        return *features;
    };
    auto need_logits = [&]() -> const Matrix& {
        if (!logits) {
            throw ValidationError("score '" + std::string(name) + "' requires logits");
        }
        return *logits;
    };

    if (name == "msp") return score_msp(need_logits());
    if (name == "maxlogit") return score_maxlogit(need_logits());
    if (name == "energy") return score_energy(need_logits());
    if (name == "kl_matching") return score_kl_matching(need_logits(), stats.kl);
    if (name == "mahalanobis") return score_mahalanobis(need_features(), stats.class_stats);
    if (name == "residual") return score_residual(need_features(), stats.subspace);
    if (name == "react") return score_react(need_features(), stats.head, stats.react);
    if (name == "vim") return score_vim(need_features(), need_logits(), stats.vim, stats.subspace);

    std::string valid;
    for (const auto& n : score_names()) {
        if (!valid.empty()) valid += ", ";
        valid += n;
    }
    if (name == "odin") {
        throw ValidationError(
            "score 'odin' is unsupported (needs input-gradient perturbation through a live "
            "network); valid names: " + valid);
    }
    throw ValidationError("unknown score '" + std::string(name) +
                          "'; valid names: " + valid);
}

}  // namespace oodkit::scores
