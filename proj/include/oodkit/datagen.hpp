#ifndef OODKIT_DATAGEN_HPP
#define OODKIT_DATAGEN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "oodkit/fitstats.hpp"
#include "oodkit/matrix.hpp"

namespace oodkit::datagen {

// Counter-based deterministic stream (SplitMix64 mix of seed, stream, index).
// Every drawn value is a pure function of its position, so generation order
// never matters and outputs are byte-stable across platforms and runs.
class CounterRng {
  public:
    CounterRng(std::uint64_t seed, std::uint64_t stream);
    double uniform01(std::uint64_t index) const;  // in (0, 1)
    double normal(std::uint64_t index) const;     // Box-Muller, cosine branch

  private:
    std::uint64_t key_;
};

struct SynthSpec {
    std::size_t num_classes = 3;
    std::size_t feature_dim = 16;
    std::size_t intrinsic_dim = 4;
    std::size_t per_class = 200;     // per class, per split
    double separation = 10.0;
    double off_subspace_noise = 0.5;
    double ood_shift = 10.0;
    std::uint64_t seed = 1;
};

struct LabeledSplit {
    Matrix features;
    Matrix logits;
    std::vector<int> labels;
};

struct UnlabeledSplit {
    Matrix features;
    Matrix logits;
};

struct SynthDataset {
    LabeledSplit id_train;
    LabeledSplit id_test;
    std::vector<std::pair<std::string, UnlabeledSplit>> ood_sets;  // shifted, off_subspace
    fitstats::LinearHead head;
};

// Class centroids live on the first intrinsic_dim axes; in-subspace noise is
// unit Gaussian and the orthogonal component is scaled by off_subspace_noise.
// Logits come from a generated linear head. OOD sets: "shifted" displaces
// every class centroid by ood_shift within the subspace, "off_subspace"
// scales the orthogonal noise by max(1, ood_shift).
SynthDataset synth_dataset(const SynthSpec& spec);

struct OneClassTask {
    int id_class = 0;
    std::vector<std::size_t> id_rows;
    std::vector<std::size_t> ood_rows;
    bool degenerate() const { return id_rows.empty() || ood_rows.empty(); }
};

OneClassTask one_class_split(std::span<const int> labels, int id_class);

}  // namespace oodkit::datagen

#endif
