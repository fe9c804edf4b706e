#ifndef OODKIT_FITSTATS_HPP
#define OODKIT_FITSTATS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "oodkit/matrix.hpp"

namespace oodkit::fitstats {

// Per-class centroids with a shared regularized precision.
struct ClassStats {
    Matrix centroids;          // C x d
    Matrix shared_precision;   // d x d
    std::vector<std::size_t> class_counts;
};

// Orthonormal basis of the residual space: eigenvectors D+1..d of the
// covariance of (x - origin), in descending eigenvalue order.
struct PrincipalSubspace {
    std::vector<double> origin;  // d
    Matrix residual_basis;       // d x (d - D)
    std::size_t principal_dim = 0;
};

// Scale constant matching the virtual logit to the real ones:
// mean max-logit over mean residual norm.
struct VimParams {
    double alpha = 1.0;
};

struct KlTemplates {
    Matrix class_dists;  // fitted classes x logit dim, rows sum to 1
};

struct ReactParams {
    double clip_value = 0.0;
    double percentile = 90.0;
};

struct LinearHead {
    Matrix weights;            // C x d, logits(x) = W x + b
    std::vector<double> bias;  // C
    bool present = false;
};

struct FitConfig {
    std::size_t principal_dim = 0;  // 0 = unset -> min(d, 512)
    bool principal_dim_set = false;
    double shrink = 1e-6;
    double react_p = 90.0;
    double eta = 95.0;
};

struct IdStats {
    ClassStats class_stats;
    PrincipalSubspace subspace;
    VimParams vim;
    KlTemplates kl;
    ReactParams react;
    LinearHead head;
    std::size_t num_classes = 0;  // fitted classes (centroid / template rows)
    std::size_t logit_dim = 0;    // logit width (template columns)
    std::size_t feature_dim = 0;
    double default_eta = 95.0;
};

ClassStats fit_class_stats(const Matrix& features, std::span<const int> labels,
                           std::size_t num_classes, double shrink);

PrincipalSubspace fit_subspace(const Matrix& features, const LinearHead& head,
                               std::size_t principal_dim);

VimParams fit_alpha(const Matrix& features, const Matrix& logits,
                    const PrincipalSubspace& subspace);

KlTemplates fit_kl_templates(const Matrix& logits, std::span<const int> labels,
                             std::size_t num_classes);

ReactParams fit_react(const Matrix& features, double p);

IdStats fit_all(const Matrix& features, const Matrix& logits,
                std::span<const int> labels, const LinearHead& head,
                const FitConfig& config);

// Checks W x + b against supplied logits on a deterministic row sample;
// throws when the head does not reproduce them within tol.
void validate_head(const Matrix& features, const Matrix& logits,
                   const LinearHead& head, double tol = 1e-4);

// Class member indices in a value-canonical order (rows compared
// lexicographically), which makes the fitted sums invariant under any
// permutation of the input rows, bit for bit.
std::vector<std::vector<std::size_t>> class_members_canonical(
    const Matrix& values, std::span<const int> labels, std::size_t num_classes);

}  // namespace oodkit::fitstats

#endif
