#ifndef OODKIT_MATRIX_HPP
#define OODKIT_MATRIX_HPP

#include <cstddef>
#include <span>
#include <vector>

#include "oodkit/error.hpp"

namespace oodkit {

// Dense row-major matrix of 64-bit floats. Values read from 32-bit files are
// promoted on load; all arithmetic stays in double.
struct Matrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(std::size_t r, std::size_t c, double fill = 0.0)
        : rows(r), cols(c), data(r * c, fill) {}

    double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

    std::span<const double> row(std::size_t i) const {
        return {data.data() + i * cols, cols};
    }
    std::span<double> row(std::size_t i) {
        return {data.data() + i * cols, cols};
    }

    bool empty() const { return rows == 0 || cols == 0; }
    bool all_finite() const;

    bool operator==(const Matrix& other) const = default;
};

Matrix transpose(const Matrix& m);

// Frobenius norm, summed in fixed index order.
double frobenius_norm(const Matrix& m);

// Largest |a_ij - a_ji|; 0 for perfectly symmetric input.
double symmetry_gap(const Matrix& m);

void require_finite(const Matrix& m, const char* what);

}  // namespace oodkit

#endif
