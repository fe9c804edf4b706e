#include "oodkit/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"

namespace oodkit::datagen {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t x) {
    x += kGolden;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

enum Stream : std::uint64_t {
    kTrain = 1,
    kTest = 2,
    kShifted = 3,
    kOffSubspace = 4,
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(mix64(seed) ^ mix64(stream * kGolden + 1)) {}

double CounterRng::uniform01(std::uint64_t index) const {
    const std::uint64_t bits = mix64(key_ + index * kGolden);
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal(std::uint64_t index) const {
    const double u1 = uniform01(2 * index);
    const double u2 = uniform01(2 * index + 1);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

namespace {

Matrix make_centroids(const SynthSpec& spec) {
    Matrix centroids(spec.num_classes, spec.feature_dim);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        const std::size_t axis = k % spec.intrinsic_dim;
        const double lane = 1.0 + static_cast<double>(k / spec.intrinsic_dim);
        centroids(k, axis) = spec.separation * lane;
    }
    return centroids;
}

// Per-class displacement for the shifted OOD set: ood_shift along the unit
// direction from the class centroid toward the mean of the other centroids,
// so real logits drop while the residual stays in-distribution.
std::vector<double> shift_vector(const Matrix& centroids, std::size_t k,
                                 std::size_t intrinsic_dim, double ood_shift) {
    const std::size_t d = centroids.cols;
    std::vector<double> dir(d, 0.0);
    if (centroids.rows > 1) {
        for (std::size_t o = 0; o < centroids.rows; ++o) {
            if (o == k) continue;
            for (std::size_t j = 0; j < d; ++j) dir[j] += centroids(o, j);
        }
        const double inv = 1.0 / static_cast<double>(centroids.rows - 1);
        for (std::size_t j = 0; j < d; ++j) dir[j] = dir[j] * inv - centroids(k, j);
    } else {
        for (std::size_t j = 0; j < d; ++j) dir[j] = -centroids(k, j);
    }
    double norm = 0.0;
    for (double v : dir) norm += v * v;
    norm = std::sqrt(norm);
    if (norm < 1e-12) {
        std::fill(dir.begin(), dir.end(), 0.0);
        dir[k % intrinsic_dim] = 1.0;
        norm = 1.0;
    }
    for (double& v : dir) v = v / norm * ood_shift;
    return dir;
}

Matrix sample_features(const SynthSpec& spec, const Matrix& centroids,
                       std::uint64_t stream, bool shifted, double off_sigma) {
    const std::size_t n = spec.num_classes * spec.per_class;
    const std::size_t d = spec.feature_dim;
    const CounterRng rng(spec.seed, stream);
    Matrix x(n, d);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        std::vector<double> base(centroids.row(k).begin(), centroids.row(k).end());
        if (shifted) {
            const auto shift = shift_vector(centroids, k, spec.intrinsic_dim, spec.ood_shift);
            for (std::size_t j = 0; j < d; ++j) base[j] += shift[j];
        }
        for (std::size_t s = 0; s < spec.per_class; ++s) {
            const std::size_t row = k * spec.per_class + s;
            for (std::size_t j = 0; j < d; ++j) {
                const double g = rng.normal(row * d + j);
                const double sigma = j < spec.intrinsic_dim ? 1.0 : off_sigma;
                x(row, j) = base[j] + sigma * g;
            }
        }
    }
    return x;
}

Matrix logits_of(const Matrix& features, const fitstats::LinearHead& head) {
    Matrix logits = kernels::par::matmul_nt(features, head.weights);
    kernels::par::add_row_vector(logits, head.bias);
    return logits;
}

std::vector<int> class_major_labels(const SynthSpec& spec) {
    std::vector<int> labels(spec.num_classes * spec.per_class);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        for (std::size_t s = 0; s < spec.per_class; ++s) {
            labels[k * spec.per_class + s] = static_cast<int>(k);
        }
    }
    return labels;
}

}  // namespace

SynthDataset synth_dataset(const SynthSpec& spec) {
    if (spec.num_classes == 0 || spec.per_class == 0) {
        throw ValidationError("synth_dataset: num_classes and per_class must be >= 1");
    }
    if (spec.intrinsic_dim == 0 || spec.intrinsic_dim > spec.feature_dim) {
        throw ValidationError("synth_dataset: intrinsic_dim must be in [1, feature_dim]");
    }
    if (spec.separation < 0.0 || spec.off_subspace_noise < 0.0 || spec.ood_shift < 0.0) {
        throw ValidationError("synth_dataset: separation, noise and shift must be >= 0");
    }

    const Matrix centroids = make_centroids(spec);

    // Gaussian-Bayes linear head over the class centroids; the temperature
    // keeps softmax away from full saturation at large separations.
    const double tau = std::max(1.0, spec.separation / 2.0);
    SynthDataset out;
    out.head.present = true;
    out.head.weights = Matrix(spec.num_classes, spec.feature_dim);
    out.head.bias.resize(spec.num_classes);
    for (std::size_t k = 0; k < spec.num_classes; ++k) {
        double sq = 0.0;
        for (std::size_t j = 0; j < spec.feature_dim; ++j) {
            out.head.weights(k, j) = centroids(k, j) / tau;
            sq += centroids(k, j) * centroids(k, j);
        }
        out.head.bias[k] = -0.5 * sq / tau;
    }

    const double off_ood = spec.off_subspace_noise * std::max(1.0, spec.ood_shift);

    out.id_train.features =
        sample_features(spec, centroids, kTrain, false, spec.off_subspace_noise);
    out.id_train.logits = logits_of(out.id_train.features, out.head);
    out.id_train.labels = class_major_labels(spec);

    out.id_test.features =
        sample_features(spec, centroids, kTest, false, spec.off_subspace_noise);
    out.id_test.logits = logits_of(out.id_test.features, out.head);
    out.id_test.labels = class_major_labels(spec);

    UnlabeledSplit shifted;
    shifted.features = sample_features(spec, centroids, kShifted, true, spec.off_subspace_noise);
    shifted.logits = logits_of(shifted.features, out.head);
    out.ood_sets.emplace_back("shifted", std::move(shifted));

    UnlabeledSplit off;
    off.features = sample_features(spec, centroids, kOffSubspace, false, off_ood);
    off.logits = logits_of(off.features, out.head);
    out.ood_sets.emplace_back("off_subspace", std::move(off));

    return out;
}

OneClassTask one_class_split(std::span<const int> labels, int id_class) {
    OneClassTask task;
    task.id_class = id_class;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == id_class) {
            task.id_rows.push_back(i);
        } else {
            task.ood_rows.push_back(i);
        }
    }
    if (task.id_rows.empty()) {
        throw ValidationError("one_class_split: class " + std::to_string(id_class) +
                              " is absent from the labels");
    }
    return task;
}

}  // namespace oodkit::datagen
