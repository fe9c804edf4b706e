#include "oodkit/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "oodkit/error.hpp"

namespace oodkit::numerics {

namespace {

double offdiag_norm(const Matrix& a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) {
            if (i != j) sum += a(i, j) * a(i, j);
        }
    }
    return std::sqrt(sum);
}

}  // namespace

SymEig sym_eig(const Matrix& a) {
    if (a.rows != a.cols || a.rows == 0) {
        throw ValidationError("sym_eig: matrix must be square and non-empty");
    }
    require_finite(a, "sym_eig");
    const std::size_t d = a.rows;

    double max_abs = 0.0;
    for (double v : a.data) max_abs = std::max(max_abs, std::fabs(v));
    if (symmetry_gap(a) > 1e-10 * std::max(1.0, max_abs)) {
        throw ValidationError("sym_eig: input violates symmetry tolerance");
    }

    Matrix w = a;
    // Enforce exact symmetry so rotations see one consistent value per pair.
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double m = 0.5 * (w(i, j) + w(j, i));
            w(i, j) = m;
            w(j, i) = m;
        }
    }

    Matrix v(d, d);
    for (std::size_t i = 0; i < d; ++i) v(i, i) = 1.0;

    const double norm_a = frobenius_norm(w);
    const double stop = 1e-12 * norm_a;
    const int max_sweeps = 100;

    bool converged = (offdiag_norm(w) <= stop) || d == 1;
    for (int sweep = 0; sweep < max_sweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < d; ++p) {
            for (std::size_t q = p + 1; q < d; ++q) {
                const double apq = w(p, q);
                if (std::fabs(apq) <= 1e-300) continue;
                const double app = w(p, p);
                const double aqq = w(q, q);
                const double theta = (aqq - app) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const double tau = s / (1.0 + c);

                w(p, p) = app - t * apq;
                w(q, q) = aqq + t * apq;
                w(p, q) = 0.0;
                w(q, p) = 0.0;
                // Each rotation is O(d); too fine-grained to thread. The
                // solver stays sequential and trivially deterministic.
                for (std::size_t r = 0; r < d; ++r) {
                    if (r != p && r != q) {
                        const double arp = w(r, p);
                        const double arq = w(r, q);
                        w(r, p) = arp - s * (arq + tau * arp);
                        w(p, r) = w(r, p);
                        w(r, q) = arq + s * (arp - tau * arq);
                        w(q, r) = w(r, q);
                    }
                    const double vrp = v(r, p);
                    const double vrq = v(r, q);
                    v(r, p) = vrp - s * (vrq + tau * vrp);
                    v(r, q) = vrq + s * (vrp - tau * vrq);
                }
            }
        }
        converged = offdiag_norm(w) <= stop;
    }
    if (!converged) {
        throw NumericError("sym_eig: no convergence after 100 sweeps");
    }

    // Sort descending; ties keep original index order.
    std::vector<std::size_t> idx(d);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) {
        return w(x, x) > w(y, y);
    });

    SymEig out;
    out.eigenvalues.resize(d);
    out.eigenvectors = Matrix(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t src = idx[k];
        out.eigenvalues[k] = w(src, src);
        // Column sign: first largest-magnitude component made non-negative.
        std::size_t arg = 0;
        double best = -1.0;
        for (std::size_t r = 0; r < d; ++r) {
            const double m = std::fabs(v(r, src));
            if (m > best) {
                best = m;
                arg = r;
            }
        }
        const double sign = v(arg, src) < 0.0 ? -1.0 : 1.0;
        for (std::size_t r = 0; r < d; ++r) {
            out.eigenvectors(r, k) = sign * v(r, src);
        }
    }
    return out;
}

double logsumexp(std::span<const double> v) {
    if (v.empty()) throw ValidationError("logsumexp: empty vector");
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - mx);
    return mx + std::log(sum);
}

std::vector<double> softmax(std::span<const double> v) {
    if (v.empty()) throw ValidationError("softmax: empty vector");
    double mx = v[0];
    for (double x : v) mx = std::max(mx, x);
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::exp(v[i] - mx);
        sum += out[i];
    }
    for (double& x : out) x /= sum;
    return out;
}

Matrix regularized_precision(const Matrix& cov, double floor_ratio) {
    if (floor_ratio <= 0.0) throw ValidationError("regularized_precision: floor_ratio must be > 0");
    require_finite(cov, "regularized_precision");
    SymEig eig = sym_eig(cov);
    const std::size_t d = cov.rows;

    double trace = 0.0;
    for (std::size_t i = 0; i < d; ++i) trace += cov(i, i);
    double scale = trace / static_cast<double>(d);
    if (scale <= 0.0) scale = 1.0;  // zero matrix: fall back to an absolute floor
    const double floor = floor_ratio * scale;

    // P = Q diag(1/max(lambda, floor)) Q^T
    Matrix p(d, d);
    for (std::size_t k = 0; k < d; ++k) {
        const double inv = 1.0 / std::max(eig.eigenvalues[k], floor);
        for (std::size_t i = 0; i < d; ++i) {
            const double qik = eig.eigenvectors(i, k) * inv;
            for (std::size_t j = 0; j < d; ++j) {
                p(i, j) += qik * eig.eigenvectors(j, k);
            }
        }
    }
    // Symmetrize away rounding skew.
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            double m = 0.5 * (p(i, j) + p(j, i));
            p(i, j) = m;
            p(j, i) = m;
        }
    }
    return p;
}

double nearest_rank_percentile(std::span<const double> values, double p) {
    if (values.empty()) throw ValidationError("nearest_rank_percentile: empty input");
    if (!(p > 0.0 && p <= 100.0)) {
        throw ValidationError("nearest_rank_percentile: p must be in (0, 100]");
    }
    const std::size_t n = values.size();
    // k = ceil(p/100 * n), guarded against rounding at exact-integer products.
    const long double target = static_cast<long double>(p) * static_cast<long double>(n);
    auto k = static_cast<std::size_t>(std::ceil(static_cast<double>(target / 100.0L)));
    while (k > 1 && static_cast<long double>(k - 1) * 100.0L >= target) --k;
    while (static_cast<long double>(k) * 100.0L < target) ++k;
    k = std::min(std::max<std::size_t>(k, 1), n);

    std::vector<double> copy(values.begin(), values.end());
    std::nth_element(copy.begin(), copy.begin() + (k - 1), copy.end());
    return copy[k - 1];
}

}  // namespace oodkit::numerics
