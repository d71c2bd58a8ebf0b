#include "shelab/simd/kernels.hpp"

#include <cmath>

namespace shelab::simd {

namespace {

void euler_update(const double* u, const double* drift, const double* diffusion, const double* dw,
                  double* out, std::size_t begin, std::size_t end, StencilParams p) {
    for (std::size_t j = begin; j < end; ++j) {
        const double lap = (u[j + 1] - 2.0 * u[j]) + u[j - 1];
        double r = u[j] + p.lambda * lap;
        r = r + p.dt * drift[j];
        r = r + (diffusion[j] * dw[j]) * p.inv_dx;
        out[j] = r;
    }
}

void clamp(const double* in, double* out, std::size_t n, double lo, double hi) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = in[i] > lo ? in[i] : lo;
        out[i] = v < hi ? v : hi;
    }
}

double max_abs(const double* in, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = std::fabs(in[i]);
        best = a > best ? a : best;
    }
    return best;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        best = d > best ? d : best;
    }
    return best;
}

std::size_t first_non_finite(const double* in, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
        if (!std::isfinite(in[i])) return i;
    }
    return n;
}

constexpr KernelTable kTable{Backend::Scalar, euler_update, clamp, max_abs, max_abs_diff, first_non_finite};

} // namespace

const KernelTable& scalar_kernels() noexcept { return kTable; }

} // namespace shelab::simd
