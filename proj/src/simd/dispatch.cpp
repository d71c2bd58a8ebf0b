#include "shelab/error.hpp"
#include "shelab/simd/kernels.hpp"

#include <atomic>

namespace shelab::simd {

namespace {

bool cpu_supports(Backend b) {
    switch (b) {
    case Backend::Scalar: return true;
    case Backend::Avx2:
#if defined(SHELAB_HAVE_AVX2)
        return __builtin_cpu_supports("avx2") != 0;
#else
        return false;
#endif
    case Backend::Neon:
#if defined(SHELAB_HAVE_NEON)
        return true;
#else
        return false;
#endif
    }
    return false;
}

const KernelTable* table_for(Backend b) {
    switch (b) {
    case Backend::Scalar: return &scalar_kernels();
#if defined(SHELAB_HAVE_AVX2)
    case Backend::Avx2: return &detail::avx2_kernels();
#endif
#if defined(SHELAB_HAVE_NEON)
    case Backend::Neon: return &detail::neon_kernels();
#endif
    default: return nullptr;
    }
}

const KernelTable* best_table() {
    for (Backend b : {Backend::Avx2, Backend::Neon}) {
        if (cpu_supports(b)) {
            if (const KernelTable* t = table_for(b)) return t;
        }
    }
    return &scalar_kernels();
}

std::atomic<const KernelTable*>& active_slot() {
    static std::atomic<const KernelTable*> slot{best_table()};
    return slot;
}

} // namespace

std::string_view to_string(Backend b) {
    switch (b) {
    case Backend::Scalar: return "scalar";
    case Backend::Avx2: return "avx2";
    case Backend::Neon: return "neon";
    }
    return "?";
}

std::vector<Backend> available_backends() {
    std::vector<Backend> out;
    for (Backend b : {Backend::Scalar, Backend::Avx2, Backend::Neon}) {
        if (cpu_supports(b) && table_for(b) != nullptr) out.push_back(b);
    }
    return out;
}

const KernelTable& kernels_for(Backend b) {
    const KernelTable* t = cpu_supports(b) ? table_for(b) : nullptr;
    if (t == nullptr) throw DomainError("SIMD backend '" + std::string(to_string(b)) + "' is unavailable");
    return *t;
}

const KernelTable& active_kernels() noexcept { return *active_slot().load(std::memory_order_acquire); }

void select_backend(Backend b) { active_slot().store(&kernels_for(b), std::memory_order_release); }

} // namespace shelab::simd
