// Timing comparison of the OpenMP kernels against their serial reference
// implementations, plus a check that the two agree exactly.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <vector>

#include "lsqcert/kernels.hpp"
#include "lsqcert/random.hpp"

namespace {

using lsqcert::DenseMatrix;
namespace kernels = lsqcert::kernels;

double time_ms(const std::function<void()>& body, int reps) {
    body();  // warm up
    const auto t0 = std::chrono::steady_clock::now();
    for (int r = 0; r < reps; ++r) body();
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(t1 - t0).count() / reps;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        worst = std::max(worst, std::abs(a.entries()[i] - b.entries()[i]));
    }
    return worst;
}

void bench_size(std::size_t n, int reps) {
    lsqcert::SeededRng rng(n);
    const DenseMatrix a = rng.gaussian_matrix(n, n);
    const DenseMatrix b = rng.gaussian_matrix(n, n);

    DenseMatrix c_par, c_ser;
    const double mul_par = time_ms([&] { c_par = kernels::multiply(a, b); }, reps);
    const double mul_ser =
        time_ms([&] { c_ser = kernels::serial::multiply(a, b); }, reps);
    std::printf("%6zu  multiply        %9.3f ms  %9.3f ms  %5.2fx  max|d|=%g\n", n,
                mul_ser, mul_par, mul_ser / mul_par, max_abs_diff(c_par, c_ser));

    const double atb_par = time_ms([&] { c_par = kernels::multiply_at_b(a, b); }, reps);
    const double atb_ser =
        time_ms([&] { c_ser = kernels::serial::multiply_at_b(a, b); }, reps);
    std::printf("%6zu  multiply_at_b   %9.3f ms  %9.3f ms  %5.2fx  max|d|=%g\n", n,
                atb_ser, atb_par, atb_ser / atb_par, max_abs_diff(c_par, c_ser));

    DenseMatrix r_par = a;
    DenseMatrix r_ser = a;
    const double c = std::sqrt(0.5), s = std::sqrt(0.5);
    const double rot_par = time_ms(
        [&] {
            for (std::size_t j = 0; j + 1 < n; j += 2) {
                kernels::rotate_columns(r_par, j, j + 1, c, s);
            }
        },
        reps);
    const double rot_ser = time_ms(
        [&] {
            for (std::size_t j = 0; j + 1 < n; j += 2) {
                kernels::serial::rotate_columns(r_ser, j, j + 1, c, s);
            }
        },
        reps);
    std::printf("%6zu  rotate_columns  %9.3f ms  %9.3f ms  %5.2fx  max|d|=%g\n", n,
                rot_ser, rot_par, rot_ser / rot_par, max_abs_diff(r_par, r_ser));
}

}  // namespace

int main(int argc, char** argv) {
    std::vector<std::size_t> sizes = {64, 128, 256, 384};
    if (argc > 1) {
        sizes.clear();
        for (int i = 1; i < argc; ++i) {
            sizes.push_back(static_cast<std::size_t>(std::atoll(argv[i])));
        }
    }
    std::printf("%6s  %-15s %12s %12s %7s\n", "n", "kernel", "serial", "openmp",
                "speedup");
    for (std::size_t n : sizes) {
        const int reps = n <= 128 ? 20 : 5;
        bench_size(n, reps);
    }
    return 0;
}
