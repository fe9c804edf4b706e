#ifndef OODKIT_KERNELS_HPP
#define OODKIT_KERNELS_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "oodkit/matrix.hpp"

// Hot inner loops, in two variants with identical signatures: a plain serial
// reference and an OpenMP version. Both accumulate each output element over
// the same index sequence, so they agree bit-for-bit at any thread count.
// The library always calls the par:: variants; serial:: exists for the
// equivalence tests and the benchmark.

namespace oodkit::kernels {

namespace serial {

// C = A * B, (n x k)(k x m).
Matrix matmul(const Matrix& a, const Matrix& b);

// C = A * B^T, (n x k)(m x k) -> n x m.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Sum of (x_s - center)(x_s - center)^T over the rows listed in `order`,
// visited in list order. Result is d x d.
Matrix scatter(const Matrix& x, std::span<const std::size_t> order,
               std::span<const double> center);

// Per-row ||basis^T (x - origin)||_2; basis is d x m (m may be 0).
std::vector<double> residual_norms(const Matrix& x, std::span<const double> origin,
                                   const Matrix& basis);

// Element-wise min(x, cap).
Matrix clip_upper(const Matrix& x, double cap);

// rows of m += v
void add_row_vector(Matrix& m, std::span<const double> v);

}  // namespace serial

namespace par {

Matrix matmul(const Matrix& a, const Matrix& b);
Matrix matmul_nt(const Matrix& a, const Matrix& b);
Matrix scatter(const Matrix& x, std::span<const std::size_t> order,
               std::span<const double> center);
std::vector<double> residual_norms(const Matrix& x, std::span<const double> origin,
                                   const Matrix& basis);
Matrix clip_upper(const Matrix& x, double cap);
void add_row_vector(Matrix& m, std::span<const double> v);

}  // namespace par

}  // namespace oodkit::kernels

#endif
