#ifndef OODKIT_NUMERICS_HPP
#define OODKIT_NUMERICS_HPP

#include <span>
#include <vector>

#include "oodkit/matrix.hpp"

namespace oodkit::numerics {

// Eigenvalues sorted descending; eigenvector column i pairs with eigenvalue i.
// Sign convention: the largest-magnitude component of each column is >= 0.
struct SymEig {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;
};

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Deterministic:
// fixed sweep order, fixed summation order, sign and tie conventions pinned.
// Converges when the off-diagonal Frobenius norm drops below 1e-12 * ||A||_F;
// throws NumericError after 100 sweeps without convergence.
SymEig sym_eig(const Matrix& a);

// log(sum_i exp(v_i)) via max shift; overflow-free for entries up to +-1e4.
double logsumexp(std::span<const double> v);

// Max-shifted softmax; entries positive, sum 1 within 1e-12.
std::vector<double> softmax(std::span<const double> v);

// Inverse of a symmetric PSD matrix through sym_eig, with every eigenvalue
// clamped below at floor_ratio * (trace/d) before inversion.
Matrix regularized_precision(const Matrix& cov, double floor_ratio);

// Nearest-rank percentile: ascending order statistic at ceil(p/100 * n),
// 1-based. p in (0, 100].
double nearest_rank_percentile(std::span<const double> values, double p);

}  // namespace oodkit::numerics

#endif
