#include <cmath>

#include "oodkit/error.hpp"
#include "oodkit/kernels.hpp"

namespace oodkit::kernels::serial {

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols != b.rows) throw ValidationError("matmul: inner dimensions differ");
    Matrix c(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        double* ci = c.data.data() + i * c.cols;
        for (std::size_t k = 0; k < a.cols; ++k) {
            const double aik = a(i, k);
            const double* bk = b.data.data() + k * b.cols;
            for (std::size_t j = 0; j < b.cols; ++j) {
                ci[j] += aik * bk[j];
            }
        }
    }
    return c;
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
    if (a.cols != b.cols) throw ValidationError("matmul_nt: inner dimensions differ");
    Matrix c(a.rows, b.rows);
    for (std::size_t i = 0; i < a.rows; ++i) {
        const double* ai = a.data.data() + i * a.cols;
        for (std::size_t j = 0; j < b.rows; ++j) {
            const double* bj = b.data.data() + j * b.cols;
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols; ++k) {
                sum += ai[k] * bj[k];
            }
            c(i, j) = sum;
        }
    }
    return c;
}

Matrix scatter(const Matrix& x, std::span<const std::size_t> order,
               std::span<const double> center) {
    const std::size_t d = x.cols;
    if (center.size() != d) throw ValidationError("scatter: center length != cols");
    Matrix s(d, d);
    // j1-major so the per-(j1,j2) addition sequence matches par::scatter.
    for (std::size_t j1 = 0; j1 < d; ++j1) {
        double* row = s.data.data() + j1 * d;
        for (std::size_t idx : order) {
            const double* xr = x.data.data() + idx * d;
            const double c1 = xr[j1] - center[j1];
            for (std::size_t j2 = 0; j2 < d; ++j2) {
                row[j2] += c1 * (xr[j2] - center[j2]);
            }
        }
    }
    return s;
}

std::vector<double> residual_norms(const Matrix& x, std::span<const double> origin,
                                   const Matrix& basis) {
    const std::size_t d = x.cols;
    if (origin.size() != d || basis.rows != d) {
        throw ValidationError("residual_norms: dimension mismatch");
    }
    const std::size_t m = basis.cols;
    std::vector<double> out(x.rows, 0.0);
    std::vector<double> dev(d);
    for (std::size_t i = 0; i < x.rows; ++i) {
        const double* xi = x.data.data() + i * d;
        for (std::size_t j = 0; j < d; ++j) dev[j] = xi[j] - origin[j];
        double sq = 0.0;
        for (std::size_t c = 0; c < m; ++c) {
            double proj = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                proj += basis(j, c) * dev[j];
            }
            sq += proj * proj;
        }
        out[i] = std::sqrt(sq);
    }
    return out;
}

Matrix clip_upper(const Matrix& x, double cap) {
    Matrix out = x;
    for (double& v : out.data) {
        if (v > cap) v = cap;
    }
    return out;
}

void add_row_vector(Matrix& m, std::span<const double> v) {
    if (v.size() != m.cols) throw ValidationError("add_row_vector: length mismatch");
    for (std::size_t i = 0; i < m.rows; ++i) {
        double* ri = m.data.data() + i * m.cols;
        for (std::size_t j = 0; j < m.cols; ++j) ri[j] += v[j];
    }
}

}  // namespace oodkit::kernels::serial
