#pragma once

// Data-parallel inner loops of the explicit scheme. Every backend performs the
// same IEEE operations in the same order (no FMA contraction), so results are
// bit-identical across backends; the equivalence tests enforce this.

#include <cstddef>
#include <string_view>
#include <vector>

namespace shelab::simd {

enum class Backend { Scalar, Avx2, Neon };

std::string_view to_string(Backend b);

struct StencilParams {
    double lambda = 0.0;  // dt / (2 dx^2)
    double dt = 0.0;
    double inv_dx = 0.0;
};

// For j in [begin, end):
//   out[j] = u[j] + lambda * ((u[j+1] - 2 u[j]) + u[j-1])
//                 + dt * drift[j] + (diffusion[j] * dw[j]) * inv_dx
// Requires 1 <= begin and end + 1 <= length of u.
using EulerUpdateFn = void (*)(const double* u, const double* drift, const double* diffusion,
                               const double* dw, double* out, std::size_t begin, std::size_t end,
                               StencilParams p);
// out[i] = min(max(in[i], lo), hi); in and out may alias.
using ClampFn = void (*)(const double* in, double* out, std::size_t n, double lo, double hi);
// max |in[i]| (0 for n == 0). Inputs must be finite.
using MaxAbsFn = double (*)(const double* in, std::size_t n);
// max |a[i] - b[i]|.
using MaxAbsDiffFn = double (*)(const double* a, const double* b, std::size_t n);
// Index of the first non-finite element, or n.
using FirstNonFiniteFn = std::size_t (*)(const double* in, std::size_t n);

struct KernelTable {
    Backend backend;
    EulerUpdateFn euler_update;
    ClampFn clamp;
    MaxAbsFn max_abs;
    MaxAbsDiffFn max_abs_diff;
    FirstNonFiniteFn first_non_finite;
};

// Reference implementations; always available.
const KernelTable& scalar_kernels() noexcept;

// Backends compiled into this binary and supported by the running CPU.
std::vector<Backend> available_backends();

// Table for `b`; throws DomainError if unavailable.
const KernelTable& kernels_for(Backend b);

// Table used by the solver: the widest available backend unless overridden.
const KernelTable& active_kernels() noexcept;
void select_backend(Backend b);

namespace detail {
#if defined(SHELAB_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif
#if defined(SHELAB_HAVE_NEON)
const KernelTable& neon_kernels() noexcept;
#endif
} // namespace detail

} // namespace shelab::simd
