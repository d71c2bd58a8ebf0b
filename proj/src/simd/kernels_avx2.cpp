// AVX2 variants. This translation unit is compiled with -mavx2 (and without
// -mfma); nothing here may run before the dispatcher has checked the CPU.

#include "shelab/simd/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace shelab::simd::detail {

namespace {

constexpr std::size_t kWidth = 4;

void euler_update(const double* u, const double* drift, const double* diffusion, const double* dw,
                  double* out, std::size_t begin, std::size_t end, StencilParams p) {
    const __m256d lambda = _mm256_set1_pd(p.lambda);
    const __m256d dt = _mm256_set1_pd(p.dt);
    const __m256d inv_dx = _mm256_set1_pd(p.inv_dx);
    const __m256d two = _mm256_set1_pd(2.0);

    std::size_t j = begin;
    for (; j + kWidth <= end; j += kWidth) {
        const __m256d left = _mm256_loadu_pd(u + j - 1);
        const __m256d mid = _mm256_loadu_pd(u + j);
        const __m256d right = _mm256_loadu_pd(u + j + 1);
        const __m256d lap = _mm256_add_pd(_mm256_sub_pd(right, _mm256_mul_pd(two, mid)), left);
        __m256d r = _mm256_add_pd(mid, _mm256_mul_pd(lambda, lap));
        r = _mm256_add_pd(r, _mm256_mul_pd(dt, _mm256_loadu_pd(drift + j)));
        const __m256d kick = _mm256_mul_pd(_mm256_loadu_pd(diffusion + j), _mm256_loadu_pd(dw + j));
        r = _mm256_add_pd(r, _mm256_mul_pd(kick, inv_dx));
        _mm256_storeu_pd(out + j, r);
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
    const __m256d vlo = _mm256_set1_pd(lo);
    const __m256d vhi = _mm256_set1_pd(hi);
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        const __m256d v = _mm256_max_pd(_mm256_loadu_pd(in + i), vlo);
        _mm256_storeu_pd(out + i, _mm256_min_pd(v, vhi));
    }
    for (; i < n; ++i) {
        const double v = in[i] > lo ? in[i] : lo;
        out[i] = v < hi ? v : hi;
    }
}

inline __m256d abs_pd(__m256d v) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), v); }

double horizontal_max(__m256d v) {
    alignas(32) double lanes[kWidth];
    _mm256_store_pd(lanes, v);
    double best = lanes[0];
    for (std::size_t k = 1; k < kWidth; ++k) best = lanes[k] > best ? lanes[k] : best;
    return best;
}

double max_abs(const double* in, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) acc = _mm256_max_pd(abs_pd(_mm256_loadu_pd(in + i)), acc);
    double best = horizontal_max(acc);
    for (; i < n; ++i) {
        const double a = std::fabs(in[i]);
        best = a > best ? a : best;
    }
    return best;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i));
        acc = _mm256_max_pd(abs_pd(d), acc);
    }
    double best = horizontal_max(acc);
    for (; i < n; ++i) {
        const double d = std::fabs(a[i] - b[i]);
        best = d > best ? d : best;
    }
    return best;
}

std::size_t first_non_finite(const double* in, std::size_t n) {
    const __m256d zero = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + kWidth <= n; i += kWidth) {
        const __m256d v = _mm256_loadu_pd(in + i);
        // v - v is 0 for finite v and NaN otherwise.
        const __m256d bad = _mm256_cmp_pd(_mm256_sub_pd(v, v), zero, _CMP_NEQ_UQ);
        const int mask = _mm256_movemask_pd(bad);
        if (mask != 0) return i + static_cast<std::size_t>(__builtin_ctz(static_cast<unsigned>(mask)));
    }
    for (; i < n; ++i) {
        if (!std::isfinite(in[i])) return i;
    }
    return n;
}

constexpr KernelTable kTable{Backend::Avx2, euler_update, clamp, max_abs, max_abs_diff, first_non_finite};

} // namespace

const KernelTable& avx2_kernels() noexcept { return kTable; }

} // namespace shelab::simd::detail
