// Times the serial reference kernels against the OpenMP variants on
// synthetic matrices and reports the largest absolute difference, which
// must be exactly zero: both variants add in the same order per element.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "oodkit/datagen.hpp"
#include "oodkit/kernels.hpp"

using namespace oodkit;

namespace {

double seconds(std::chrono::steady_clock::time_point a,
               std::chrono::steady_clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t stream) {
    const datagen::CounterRng rng(42, stream);
    Matrix m(rows, cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) m.data[i] = rng.normal(i);
    return m;
}

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::fabs(a[i] - b[i]));
    }
    return m;
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto t0 = std::chrono::steady_clock::now();
        f();
        const auto t1 = std::chrono::steady_clock::now();
        best = std::min(best, seconds(t0, t1));
    }
    return best;
}

void report(const char* name, double t_serial, double t_par, double diff) {
    std::printf("%-16s serial %8.4fs  omp %8.4fs  speedup %5.2fx  max|diff| %g\n", name,
                t_serial, t_par, t_serial / t_par, diff);
}

}  // namespace

int main() {
#ifdef _OPENMP
    std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
    std::printf("built without openmp; both columns run serial code\n");
#endif

    const std::size_t n = 20000;
    const std::size_t d = 128;
    const std::size_t c = 64;
    const Matrix x = random_matrix(n, d, 1);
    const Matrix w = random_matrix(c, d, 2);
    const Matrix basis = random_matrix(d, d / 2, 3);
    std::vector<double> center(d, 0.25);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});

    {
        Matrix rs, rp;
        const double ts = time_best_of(3, [&] { rs = kernels::serial::matmul_nt(x, w); });
        const double tp = time_best_of(3, [&] { rp = kernels::par::matmul_nt(x, w); });
        report("matmul_nt", ts, tp, max_abs_diff(rs.data, rp.data));
    }
    {
        Matrix rs, rp;
        const double ts = time_best_of(3, [&] { rs = kernels::serial::scatter(x, order, center); });
        const double tp = time_best_of(3, [&] { rp = kernels::par::scatter(x, order, center); });
        report("scatter", ts, tp, max_abs_diff(rs.data, rp.data));
    }
    {
        std::vector<double> rs, rp;
        const double ts =
            time_best_of(3, [&] { rs = kernels::serial::residual_norms(x, center, basis); });
        const double tp =
            time_best_of(3, [&] { rp = kernels::par::residual_norms(x, center, basis); });
        report("residual_norms", ts, tp, max_abs_diff(rs, rp));
    }
    {
        const Matrix a = random_matrix(512, 512, 4);
        const Matrix b = random_matrix(512, 512, 5);
        Matrix rs, rp;
        const double ts = time_best_of(3, [&] { rs = kernels::serial::matmul(a, b); });
        const double tp = time_best_of(3, [&] { rp = kernels::par::matmul(a, b); });
        report("matmul", ts, tp, max_abs_diff(rs.data, rp.data));
    }
    return 0;
}
