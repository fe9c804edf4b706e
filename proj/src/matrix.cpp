#include "oodkit/matrix.hpp"

#include <cmath>
#include <string>

namespace oodkit {

bool Matrix::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

Matrix transpose(const Matrix& m) {
    Matrix t(m.cols, m.rows);
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = 0; j < m.cols; ++j) {
            t(j, i) = m(i, j);
        }
    }
    return t;
}

double frobenius_norm(const Matrix& m) {
    double sum = 0.0;
    for (double v : m.data) sum += v * v;
    return std::sqrt(sum);
}

double symmetry_gap(const Matrix& m) {
    double gap = 0.0;
    for (std::size_t i = 0; i < m.rows; ++i) {
        for (std::size_t j = i + 1; j < m.cols; ++j) {
            double d = std::fabs(m(i, j) - m(j, i));
            if (d > gap) gap = d;
        }
    }
    return gap;
}

void require_finite(const Matrix& m, const char* what) {
    if (!m.all_finite()) {
        throw ValidationError(std::string(what) + ": non-finite entry");
    }
}

}  // namespace oodkit
