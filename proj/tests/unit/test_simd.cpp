#include "shelab/error.hpp"
#include "shelab/simd/kernels.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

using namespace shelab;
using namespace shelab::simd;

namespace {

bool same(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::bit_cast<std::uint64_t>(a[i]) != std::bit_cast<std::uint64_t>(b[i])) return false;
    }
    return true;
}

std::vector<double> random_row(std::mt19937_64& g, std::size_t n, double scale) {
    std::vector<double> v(n);
    for (auto& x : v) x = testing::uniform(g, -scale, scale);
    return v;
}

} // namespace

TEST_CASE("scalar backend is always available") {
    const auto backends = available_backends();
    CHECK(std::find(backends.begin(), backends.end(), Backend::Scalar) != backends.end());
    CHECK(kernels_for(Backend::Scalar).backend == Backend::Scalar);
    for (Backend b : {Backend::Avx2, Backend::Neon}) {
        if (std::find(backends.begin(), backends.end(), b) == backends.end()) {
            CHECK_THROWS_AS(kernels_for(b), DomainError);
        }
    }
}

TEST_CASE("every backend matches the scalar reference bit for bit") {
    const KernelTable& ref = scalar_kernels();
    auto g = testing::rng_for(424242);
    for (Backend b : available_backends()) {
        const KernelTable& k = kernels_for(b);
        CAPTURE(to_string(b));
        for (std::size_t n = 3; n < 70; ++n) {
            for (int rep = 0; rep < 5; ++rep) {
                const double scale = rep == 0 ? 1e-3 : (rep == 1 ? 1e6 : 3.0);
                const auto u = random_row(g, n, scale);
                const auto drift = random_row(g, n, scale);
                const auto diff = random_row(g, n, scale);
                const auto dw = random_row(g, n, 0.01);
                const StencilParams p{testing::uniform(g, 0.0, 0.5), 1e-3, 20.0};
                std::vector<double> out_ref(n, -7.0);
                std::vector<double> out(n, -7.0);
                const std::size_t begin = 1 + (rep % 2);
                const std::size_t end = n - 1 - (rep % 3 == 0 ? 1 : 0);
                if (begin >= end) continue;
                ref.euler_update(u.data(), drift.data(), diff.data(), dw.data(), out_ref.data(), begin, end, p);
                k.euler_update(u.data(), drift.data(), diff.data(), dw.data(), out.data(), begin, end, p);
                CHECK(same(out, out_ref));

                std::vector<double> c_ref(n);
                std::vector<double> c(u);
                ref.clamp(u.data(), c_ref.data(), n, -0.5 * scale, 0.25 * scale);
                k.clamp(c.data(), c.data(), n, -0.5 * scale, 0.25 * scale);  // aliased
                CHECK(same(c, c_ref));

                CHECK(k.max_abs(u.data(), n) == ref.max_abs(u.data(), n));
                CHECK(k.max_abs_diff(u.data(), drift.data(), n) == ref.max_abs_diff(u.data(), drift.data(), n));
                CHECK(k.first_non_finite(u.data(), n) == n);
            }
        }
    }
}

TEST_CASE("reference kernels compute the documented formulas") {
    const KernelTable& k = scalar_kernels();
    const std::vector<double> u{1, 2, 4, 8, 16};
    const std::vector<double> drift{1, 1, 1, 1, 1};
    const std::vector<double> diff{2, 2, 2, 2, 2};
    const std::vector<double> dw{0.5, 0.5, 0.5, 0.5, 0.5};
    std::vector<double> out(5, 0.0);
    k.euler_update(u.data(), drift.data(), diff.data(), dw.data(), out.data(), 1, 4, {0.25, 0.1, 10.0});
    // 2 + 0.25 * ((4 - 4) + 1) + 0.1 + 1 * 10
    CHECK(out[1] == 2.0 + 0.25 + 0.1 + 10.0);
    CHECK(out[0] == 0.0);
    CHECK(out[4] == 0.0);
    std::vector<double> c{-3, -1, 0, 1, 3};
    k.clamp(c.data(), c.data(), 5, -2, 2);
    CHECK(c == std::vector<double>{-2, -1, 0, 1, 2});
    CHECK(k.max_abs(u.data(), 0) == 0.0);
    CHECK(k.max_abs(c.data(), 5) == 2.0);
}

TEST_CASE("non-finite scan finds the first bad element in every backend") {
    for (Backend b : available_backends()) {
        const KernelTable& k = kernels_for(b);
        CAPTURE(to_string(b));
        for (std::size_t n = 1; n < 40; ++n) {
            for (std::size_t pos = 0; pos < n; ++pos) {
                for (double bad : {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::infinity(),
                                   -std::numeric_limits<double>::infinity()}) {
                    std::vector<double> v(n, 1.0);
                    v[pos] = bad;
                    if (pos + 2 < n) v[pos + 2] = bad;
                    CHECK(k.first_non_finite(v.data(), n) == pos);
                }
            }
        }
    }
}

TEST_CASE("backend selection") {
    const Backend before = active_kernels().backend;
    select_backend(Backend::Scalar);
    CHECK(active_kernels().backend == Backend::Scalar);
    select_backend(before);
    CHECK(active_kernels().backend == before);
    CHECK(before == available_backends().back());
}
