// NEON variants for aarch64, two doubles per register.

#include "shelab/simd/kernels.hpp"

#include <arm_neon.h>

#include <cmath>

namespace shelab::simd::detail {

namespace {

constexpr std::size_t kWidth = 2;

void euler_update(const double* u, const double* drift, const double* diffusion, const double* dw,
                  double* out, std::size_t begin, std::size_t end, StencilParams p) {
    const float64x2_t lambda = vdupq_n_f64(p.lambda);
    const float64x2_t dt = vdupq_n_f64(p.dt);
    const float64x2_t inv_dx = vdupq_n_f64(p.inv_dx);
    const float64x2_t two = vdupq_n_f64(2.0);

    std::size_t j = begin;
    for (; j + kWidth <= end; j += kWidth) {
        const float64x2_t left = vld1q_f64(u + j - 1);
        const float64x2_t mid = vld1q_f64(u + j);
        const float64x2_t right = vld1q_f64(u + j + 1);
        const float64x2_t lap = vaddq_f64(vsubq_f64(right, vmulq_f64(two, mid)), left);
        float64x2_t r = vaddq_f64(mid, vmulq_f64(lambda, lap));
        r = vaddq_f64(r, vmulq_f64(dt, vld1q_f64(drift + j)));
        const float64x2_t kick = vmulq_f64(vld1q_f64(diffusion + j), vld1q_f64(dw + j));
        r = vaddq_f64(r, vmulq_f64(kick, inv_dx));
        vst1q_f64(out + j, r);
    }
    for (; j < end; ++j) {
        const double lap = (u[j + 1] - 2.0 * u[j]) + u[j - 1];
        double r = u[j] + p.lambda * lap;
        r = r + p.dt * drift[j];
        r = r + (diffusion[j] * dw[j]) * p.inv_dx;
        out[j] = r;
    }
}

void clamp(const double* in, double* out, std::size_t n, double lo, double hi) {
    const float64x2_t vlo = vdupq_n_f64(lo);
    const float64x2_t vhi = vdupq_n_f64(hi);
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        const float64x2_t v = vld1q_f64(in + i);
        // Select-based to match the scalar comparison order exactly.
        const float64x2_t lower = vbslq_f64(vcgtq_f64(v, vlo), v, vlo);
        vst1q_f64(out + i, vbslq_f64(vcltq_f64(lower, vhi), lower, vhi));
    }
    for (; i < n; ++i) {
        const double v = in[i] > lo ? in[i] : lo;
        out[i] = v < hi ? v : hi;
    }
}

double max_abs(const double* in, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) acc = vmaxq_f64(vabsq_f64(vld1q_f64(in + i)), acc);
    double best = vmaxvq_f64(acc);
    for (; i < n; ++i) {
        const double a = std::fabs(in[i]);
        best = a > best ? a : best;
    }
    return best;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        acc = vmaxq_f64(vabsq_f64(vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i))), acc);
    }
    double best = vmaxvq_f64(acc);
    for (; i < n; ++i) {
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

constexpr KernelTable kTable{Backend::Neon, euler_update, clamp, max_abs, max_abs_diff, first_non_finite};

} // namespace

const KernelTable& neon_kernels() noexcept { return kTable; }

} // namespace shelab::simd::detail
