#include "oodkit/fitstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"
#include "oodkit/numerics.hpp"

namespace oodkit::fitstats {

namespace {

void check_labels(std::span<const int> labels, std::size_t num_classes, std::size_t n_rows) {
    if (labels.size() != n_rows) {
        throw ValidationError("labels: count " + std::to_string(labels.size()) +
                              " does not match row count " + std::to_string(n_rows));
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= num_classes) {
            throw ValidationError("labels: row " + std::to_string(i) + " has label " +
                                  std::to_string(labels[i]) + " outside [0, " +
                                  std::to_string(num_classes) + ")");
        }
    }
}

bool row_less(const Matrix& m, std::size_t a, std::size_t b) {
    const double* ra = m.data.data() + a * m.cols;
    const double* rb = m.data.data() + b * m.cols;
    for (std::size_t j = 0; j < m.cols; ++j) {
        if (ra[j] < rb[j]) return true;
        if (ra[j] > rb[j]) return false;
    }
    return a < b;
}

}  // namespace

std::vector<std::vector<std::size_t>> class_members_canonical(
    const Matrix& values, std::span<const int> labels, std::size_t num_classes) {
    check_labels(labels, num_classes, values.rows);
    std::vector<std::vector<std::size_t>> members(num_classes);
    for (std::size_t i = 0; i < labels.size(); ++i) {
        members[static_cast<std::size_t>(labels[i])].push_back(i);
    }
    for (auto& m : members) {
        std::sort(m.begin(), m.end(),
                  [&](std::size_t a, std::size_t b) { return row_less(values, a, b); });
    }
    return members;
}

ClassStats fit_class_stats(const Matrix& features, std::span<const int> labels,
                           std::size_t num_classes, double shrink) {
    if (num_classes == 0) throw ValidationError("fit_class_stats: num_classes must be >= 1");
    if (features.rows < num_classes) {
        throw ValidationError("fit_class_stats: fewer samples than classes");
    }
    require_finite(features, "fit_class_stats");
    const std::size_t d = features.cols;
    const std::size_t n = features.rows;

    auto members = class_members_canonical(features, labels, num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (members[k].empty()) {
            throw ValidationError("fit_class_stats: class " + std::to_string(k) +
                                  " has no samples");
        }
    }

    ClassStats out;
    out.centroids = Matrix(num_classes, d);
    out.class_counts.resize(num_classes);
    for (std::size_t k = 0; k < num_classes; ++k) {
        out.class_counts[k] = members[k].size();
        for (std::size_t idx : members[k]) {
            const double* r = features.data.data() + idx * d;
            for (std::size_t j = 0; j < d; ++j) out.centroids(k, j) += r[j];
        }
        const double inv = 1.0 / static_cast<double>(members[k].size());
        for (std::size_t j = 0; j < d; ++j) out.centroids(k, j) *= inv;
    }

    Matrix cov(d, d);
    for (std::size_t k = 0; k < num_classes; ++k) {
        Matrix part = kernels::par::scatter(features, members[k], out.centroids.row(k));
        for (std::size_t i = 0; i < d * d; ++i) cov.data[i] += part.data[i];
    }
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : cov.data) v *= inv_n;

    out.shared_precision = numerics::regularized_precision(cov, shrink);
    return out;
}

PrincipalSubspace fit_subspace(const Matrix& features, const LinearHead& head,
                               std::size_t principal_dim) {
    const std::size_t d = features.cols;
    const std::size_t n = features.rows;
    if (n < 2) throw ValidationError("fit_subspace: needs at least 2 samples");
    if (principal_dim > d) {
        throw ValidationError("fit_subspace: principal dim " + std::to_string(principal_dim) +
                              " exceeds feature dim " + std::to_string(d));
    }
    require_finite(features, "fit_subspace");

    PrincipalSubspace out;
    out.principal_dim = principal_dim;
    out.origin.assign(d, 0.0);

    if (head.present) {
        if (head.weights.cols != d) {
            throw ValidationError("fit_subspace: head width does not match feature dim");
        }
        // u = -pinv(W) b, pinv through the eigensystem of W^T W.
        const Matrix wtw = kernels::par::matmul(transpose(head.weights), head.weights);
        numerics::SymEig eig = numerics::sym_eig(wtw);
        const double cutoff = 1e-12 * std::max(eig.eigenvalues.empty() ? 0.0 : eig.eigenvalues[0], 0.0);
        std::vector<double> wtb(d, 0.0);  // W^T b
        for (std::size_t k = 0; k < head.weights.rows; ++k) {
            for (std::size_t j = 0; j < d; ++j) {
                wtb[j] += head.weights(k, j) * head.bias[k];
            }
        }
        for (std::size_t k = 0; k < d; ++k) {
            const double lam = eig.eigenvalues[k];
            if (lam <= cutoff) continue;
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) proj += eig.eigenvectors(j, k) * wtb[j];
            const double coef = -proj / lam;
            for (std::size_t j = 0; j < d; ++j) out.origin[j] += coef * eig.eigenvectors(j, k);
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) {
            const double* r = features.data.data() + i * d;
            for (std::size_t j = 0; j < d; ++j) out.origin[j] += r[j];
        }
        for (double& v : out.origin) v /= static_cast<double>(n);
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Matrix cov = kernels::par::scatter(features, order, out.origin);
    const double inv_n = 1.0 / static_cast<double>(n);
    for (double& v : cov.data) v *= inv_n;

    numerics::SymEig eig = numerics::sym_eig(cov);
    out.residual_basis = Matrix(d, d - principal_dim);
    for (std::size_t c = principal_dim; c < d; ++c) {
        for (std::size_t r = 0; r < d; ++r) {
            out.residual_basis(r, c - principal_dim) = eig.eigenvectors(r, c);
        }
    }
    return out;
}

VimParams fit_alpha(const Matrix& features, const Matrix& logits,
                    const PrincipalSubspace& subspace) {
    if (features.rows != logits.rows) {
        throw ValidationError("fit_alpha: feature and logit row counts differ");
    }
    if (features.rows == 0) throw ValidationError("fit_alpha: empty input");

    const std::vector<double> norms =
        kernels::par::residual_norms(features, subspace.origin, subspace.residual_basis);
    double num = 0.0;
    double den = 0.0;
    for (std::size_t i = 0; i < logits.rows; ++i) {
        auto row = logits.row(i);
        double mx = row[0];
        for (double v : row) mx = std::max(mx, v);
        num += mx;
        den += norms[i];
    }
    VimParams out;
    out.alpha = den == 0.0 ? 1.0 : num / den;
    return out;
}

KlTemplates fit_kl_templates(const Matrix& logits, std::span<const int> labels,
                             std::size_t num_classes) {
    if (num_classes == 0) throw ValidationError("fit_kl_templates: num_classes must be >= 1");
    require_finite(logits, "fit_kl_templates");
    const std::size_t c_logit = logits.cols;
    auto members = class_members_canonical(logits, labels, num_classes);

    KlTemplates out;
    out.class_dists = Matrix(num_classes, c_logit);
    for (std::size_t k = 0; k < num_classes; ++k) {
        if (members[k].empty()) {
            throw ValidationError("fit_kl_templates: class " + std::to_string(k) +
                                  " has no samples");
        }
        for (std::size_t idx : members[k]) {
            const std::vector<double> p = numerics::softmax(logits.row(idx));
            for (std::size_t j = 0; j < c_logit; ++j) out.class_dists(k, j) += p[j];
        }
        double sum = 0.0;
        for (std::size_t j = 0; j < c_logit; ++j) sum += out.class_dists(k, j);
        for (std::size_t j = 0; j < c_logit; ++j) out.class_dists(k, j) /= sum;
        for (std::size_t j = 0; j < c_logit; ++j) {
            if (out.class_dists(k, j) <= 0.0) {
                throw ValidationError("fit_kl_templates: class " + std::to_string(k) +
                                      " template has a zero probability at column " +
                                      std::to_string(j));
            }
        }
    }
    return out;
}

ReactParams fit_react(const Matrix& features, double p) {
    if (features.data.empty()) throw ValidationError("fit_react: empty features");
    require_finite(features, "fit_react");
    ReactParams out;
    out.percentile = p;
    out.clip_value = numerics::nearest_rank_percentile(features.data, p);
    return out;
}

void validate_head(const Matrix& features, const Matrix& logits,
                   const LinearHead& head, double tol) {
    if (!head.present) return;
    if (head.weights.cols != features.cols || head.weights.rows != logits.cols ||
        head.bias.size() != logits.cols) {
        throw ValidationError("head: weight/bias shape does not match features and logits");
    }
    // Evenly spread sample of rows.
    const std::size_t n = features.rows;
    const std::size_t take = std::min<std::size_t>(n, 64);
    for (std::size_t s = 0; s < take; ++s) {
        const std::size_t i = s * n / take;
        for (std::size_t k = 0; k < head.weights.rows; ++k) {
            double l = head.bias[k];
            for (std::size_t j = 0; j < features.cols; ++j) {
                l += head.weights(k, j) * features(i, j);
            }
            if (std::fabs(l - logits(i, k)) > tol) {
                throw ValidationError(
                    "head: W x + b deviates from supplied logits at row " + std::to_string(i) +
                    ", class " + std::to_string(k) + " by " +
                    std::to_string(std::fabs(l - logits(i, k))));
            }
        }
    }
}

IdStats fit_all(const Matrix& features, const Matrix& logits,
                std::span<const int> labels, const LinearHead& head,
                const FitConfig& config) {
    if (features.rows != logits.rows) {
        throw ValidationError("fit_all: feature and logit row counts differ");
    }
    int max_label = -1;
    for (int l : labels) max_label = std::max(max_label, l);
    if (max_label < 0) throw ValidationError("fit_all: no labels");
    const auto num_classes = static_cast<std::size_t>(max_label) + 1;
    const std::size_t d = features.cols;

    std::size_t principal_dim =
        config.principal_dim_set ? config.principal_dim : std::min<std::size_t>(d, 512);

    auto stage = [](const char* name, auto&& fn) {
        try {
            return fn();
        } catch (const ValidationError& e) {
            throw ValidationError(std::string(name) + ": " + e.what());
        }
    };

    IdStats out;
    out.num_classes = num_classes;
    out.logit_dim = logits.cols;
    out.feature_dim = d;
    out.default_eta = config.eta;
    out.head = head;
    if (head.present) {
        stage("validate_head", [&] { validate_head(features, logits, head); return 0; });
    }
    out.class_stats = stage("fit_class_stats", [&] {
        return fit_class_stats(features, labels, num_classes, config.shrink);
    });
    out.subspace = stage("fit_subspace", [&] {
        return fit_subspace(features, head, principal_dim);
    });
    out.vim = stage("fit_alpha", [&] { return fit_alpha(features, logits, out.subspace); });
    out.kl = stage("fit_kl_templates", [&] {
        return fit_kl_templates(logits, labels, num_classes);
    });
    out.react = stage("fit_react", [&] { return fit_react(features, config.react_p); });
    return out;
}

}  // namespace oodkit::fitstats
