#include "shelab/bounds/bounds.hpp"
#include "shelab/error.hpp"

#include "support.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace shelab;
using namespace shelab::bounds;

namespace {

ProblemConstants unbounded(double L_sigma, double u0, double L_b = 0.0) {
    ProblemConstants c;
    c.L_sigma = L_sigma;
    c.u0_norm = u0;
    c.L_b = L_b;
    return c;
}

ProblemConstants bounded(double sigma_sup, double u0, double L_b = 0.0) {
    ProblemConstants c;
    c.sigma_sup = sigma_sup;
    c.u0_norm = u0;
    c.L_b = L_b;
    return c;
}

void exact(double got, double want) {
    CHECK(std::fabs(got - want) <= 1e-12 * std::fabs(want));
}

} // namespace

TEST_CASE("moment bound with unbounded sigma") {
    const auto a = moment_bound_unbounded_sigma(2, 0, unbounded(1, 0));
    REQUIRE(a.bound.value);
    exact(*a.bound.value, 16.0);
    CHECK(a.validity.holds);

    const auto b = moment_bound_unbounded_sigma(3, 0, unbounded(1, 1));
    exact(*b.bound.value, 512.0);

    const auto c = moment_bound_unbounded_sigma(2, 1, unbounded(1, 0));
    exact(c.bound.log, std::log(16.0) + 1024.0);
    CHECK_FALSE(c.bound.value);

    // k must reach sqrt(L_b) / L_sigma^2.
    const auto d = moment_bound_unbounded_sigma(2, 0.1, unbounded(1, 0, 9));
    CHECK_FALSE(d.validity.holds);
    CHECK(d.validity.threshold == 3.0);
    CHECK_FALSE(d.validity.clause.empty());
    CHECK(moment_bound_unbounded_sigma(3, 0.1, unbounded(1, 0, 9)).validity.holds);
    CHECK_FALSE(moment_bound_unbounded_sigma(1.5, 0.1, unbounded(1, 0)).validity.holds);
    CHECK_FALSE(moment_bound_unbounded_sigma(2, 0.1, unbounded(0, 0)).validity.holds);
    CHECK_THROWS_AS(moment_bound_unbounded_sigma(2, -1, unbounded(1, 0)), DomainError);
}

TEST_CASE("moment bound with bounded sigma") {
    exact(*moment_bound_bounded_sigma(2, 0, bounded(1, 0)).bound.value, 32.0);
    exact(*moment_bound_bounded_sigma(2, 1, bounded(1, 0)).bound.value, 128.0);
    exact(*moment_bound_bounded_sigma(4, 0, bounded(0, 0)).bound.value, 4096.0);
    CHECK_FALSE(moment_bound_bounded_sigma(1, 0, bounded(1, 0)).validity.holds);
    CHECK_THROWS_AS(moment_bound_bounded_sigma(2, 0, unbounded(1, 0)), DomainError);
    // Dispatch follows the regime.
    exact(*moment_bound(2, 0, bounded(1, 0)).bound.value, 32.0);
    exact(*moment_bound(2, 0, unbounded(1, 0)).bound.value, 16.0);
}

TEST_CASE("tail bound with unbounded sigma") {
    const auto a = tail_bound_unbounded_sigma(16, 0.01, unbounded(1, 0));
    exact(a.bound, std::exp(-10.0));
    CHECK(a.bound == doctest::Approx(4.5400e-5).epsilon(1e-4));
    CHECK(a.validity.holds);
    exact(a.validity.threshold, 10.24);

    const auto b = tail_bound_unbounded_sigma(8, 0.01, unbounded(1, 0, 1));
    CHECK_FALSE(b.validity.holds);
    CHECK(compare(b.log_bound, b.validity, 0.5).verdict == Outcome::NotApplicable);

    // Small u0 term loses to the time term; large u0 wins.
    exact(tail_bound_unbounded_sigma(16, 1e-4, unbounded(1, 10)).validity.threshold, 4 * std::log(44.0));

    CHECK(tail_bound_unbounded_sigma(16, 0.005, unbounded(1, 0)).bound <
          tail_bound_unbounded_sigma(16, 0.01, unbounded(1, 0)).bound);
    CHECK_THROWS_AS(tail_bound_unbounded_sigma(16, 0, unbounded(1, 0)), DomainError);
}

TEST_CASE("tail bound with bounded sigma") {
    const auto a = tail_bound_bounded_sigma(3, 0, bounded(1, 0, 5));
    exact(a.log_bound, -std::exp(6.0) / (32 * std::numbers::e));
    CHECK(a.bound == doctest::Approx(9.68e-3).epsilon(2e-3));
    CHECK(a.validity.holds);
    CHECK(a.validity.threshold == doctest::Approx(2.233).epsilon(1e-3));
    CHECK_FALSE(tail_bound_bounded_sigma(2, 0, bounded(1, 0)).validity.holds);
    double prev = 1.0;
    for (double N = 2.5; N < 6; N += 0.5) {
        const double v = tail_bound_bounded_sigma(N, 0.2, bounded(1, 0, 1)).bound;
        CHECK(v < prev);
        prev = v;
    }
    CHECK(tail_bound(3, 0, bounded(1, 0)).log_bound == a.log_bound);
}

TEST_CASE("tail validity matches a direct transcription") {
    auto g = testing::rng_for(31);
    for (int i = 0; i < 2000; ++i) {
        const double L_b = testing::uniform(g, 0, 4);
        const double L_s = testing::uniform(g, 0.1, 2);
        const double u0 = testing::uniform(g, 0, 5);
        const double s = testing::uniform(g, 0, 3);
        const double t = testing::uniform(g, 1e-4, 0.1);
        const double N = testing::uniform(g, 0.1, 40);
        const bool unb = N >= std::max(4 * std::log(4 * (u0 + 1)), 256 * t * std::max(4 * std::pow(L_s, 4), L_b));
        const double inner = u0 + s * std::pow(t, 0.25) + 1;
        const bool bdd = N >= 0.5 * std::log(32.0) + 2 * L_b * t + 0.5 + std::log(inner);
        CAPTURE(i);
        CHECK(tail_bound_unbounded_sigma(N, t, unbounded(L_s, u0, L_b)).validity.holds == unb);
        CHECK(tail_bound_bounded_sigma(N, t, bounded(s, u0, L_b)).validity.holds == bdd);
    }
}

TEST_CASE("log and linear values agree and grow with t") {
    auto g = testing::rng_for(8);
    for (int i = 0; i < 500; ++i) {
        const double k = testing::uniform(g, 2, 6);
        const double t = testing::uniform(g, 0, 0.5);
        const double L = testing::uniform(g, 0.1, 1.2);
        const double u0 = testing::uniform(g, 0, 3);
        for (const auto& m : {moment_bound_unbounded_sigma(k, t, unbounded(L, u0)),
                              moment_bound_bounded_sigma(k, t, bounded(L, u0, L))}) {
            if (m.bound.value) {
                CHECK(std::fabs(std::exp(m.bound.log) - *m.bound.value) <= 1e-12 * *m.bound.value);
            }
        }
        const double later = t + testing::uniform(g, 0, 0.5);
        CHECK(moment_bound_unbounded_sigma(k, later, unbounded(L, u0)).bound.log >=
              moment_bound_unbounded_sigma(k, t, unbounded(L, u0)).bound.log);
        CHECK(moment_bound_bounded_sigma(k, later, bounded(L, u0, L)).bound.log >=
              moment_bound_bounded_sigma(k, t, bounded(L, u0, L)).bound.log);
        if (t > 0) {
            CHECK(tail_bound_unbounded_sigma(k, later, unbounded(L, u0)).log_bound >=
                  tail_bound_unbounded_sigma(k, t, unbounded(L, u0)).log_bound);
        }
    }
    const auto huge = LogValue::from_log(2000.0);
    CHECK_FALSE(huge.value);
    CHECK(*LogValue::from_log(1.0).value == doctest::Approx(std::numbers::e).epsilon(1e-15));
}

TEST_CASE("beta and A0") {
    exact(beta_for_moments(2, 1), 512.0);
    exact(beta_for_moments(2, 2), 8192.0);
    exact(beta_for_moments(8, 1.3) / beta_for_moments(2, 1.3), 16.0);
    CHECK_THROWS_AS(beta_for_moments(1, 1), DomainError);
    exact(a0(1), 4.0);
    exact(a0(2), std::sqrt(8.0) * 16);
    CHECK(a0(2) == doctest::Approx(45.25).epsilon(1e-3));
    exact(beta_for_convergence(1, 1, 1), 4096.0);
    CHECK(beta_for_convergence(2, 1, 1) > beta_for_convergence(1, 1, 1));
    CHECK(beta_for_convergence(1, 2, 1) > beta_for_convergence(1, 1, 1));
    CHECK(beta_for_convergence(1, 1, 2) > beta_for_convergence(1, 1, 1));
    CHECK_THROWS_AS(beta_for_convergence(1, 0, 1), DomainError);
}

TEST_CASE("convergence thresholds") {
    ProblemConstants c = unbounded(1, 0, 1);
    const auto a = convergence_thresholds(1, c);
    exact(a.c_T, 1024.0);
    exact(a.N_T, 256.0 * std::pow(2.0, 16.0 / 3.0) * 4.0);
    CHECK(a.N_T == doctest::Approx(4.128e4).epsilon(1e-3));
    exact(convergence_thresholds(2, c).N_T, 2 * a.N_T);
    CHECK_FALSE(a.N0);
    CHECK_FALSE(a.note.empty());

    const auto b = convergence_thresholds(1, c, {0.5, 1.0, 3.0, 2.0, 4.0}, {5.0, 5.0, 2.0, 0.5, 1.0});
    REQUIRE(b.N0);
    CHECK(*b.N0 == 3.0);
    CHECK_THROWS_AS(convergence_thresholds(1, c, {1.0}, {}), DomainError);
    c.c = 1.0;
    CHECK_THROWS_AS(convergence_thresholds(1, c), DomainError);

    // sigma(x) = x^2 has Lipschitz constant 2 e^N on the truncated range.
    const auto drift = coeff::Coefficient::from_source("0");
    const auto diff = coeff::Coefficient::from_source("x^2");
    const auto e = convergence_thresholds(1, unbounded(1, 0), drift, diff, {0.5, 1.0, 2.0, 3.0}, 1e-2);
    REQUIRE(e.N0);
    CHECK(*e.N0 == 2.0);
}

TEST_CASE("inflated L_sigma") {
    ProblemConstants c = unbounded(0, 1, 0);
    c.inflate_sigma = true;
    CHECK(c.effective_L_sigma() == 1.0);
    c.L_b = 16;
    CHECK(c.effective_L_sigma() == doctest::Approx(std::sqrt(2.0)));
    CHECK(moment_bound_unbounded_sigma(2, 0.1, c).validity.holds);
    c.L_sigma = 3;
    CHECK(c.effective_L_sigma() == 3.0);
    // sigma = 0, b = 0, u0 = 1, k = 2: the bound at t = 0 is 4^2 (1 + 1)^2.
    ProblemConstants zero = unbounded(0, 1, 0);
    zero.inflate_sigma = true;
    const auto m = moment_bound_unbounded_sigma(2, 0.0, zero);
    exact(*m.bound.value, 64.0);
    CHECK(compare(m.bound.log, m.validity, 1.0).verdict == Outcome::Dominates);
}

TEST_CASE("sup transfer") {
    std::vector<std::pair<double, double>> ones;
    std::vector<double> grid;
    for (int i = 1; i <= 100; ++i) {
        ones.emplace_back(i / 100.0, 1.0);
        grid.push_back(i / 100.0);
    }
    const auto a = sup_transfer_check(ones, [](double) { return 2.0; }, 0.1, grid);
    CHECK(a.hypothesis_holds);
    CHECK(a.conclusion_verified);

    // f(t) = g e^{-beta (T0 - t)}: the hypothesis is tight at T0.
    const double beta = 3.0, T0 = 1.0;
    std::vector<std::pair<double, double>> tight;
    for (double t : grid) tight.emplace_back(t, 5.0 * std::exp(-beta * (T0 - t)));
    const auto b = sup_transfer_check(tight, [](double) { return 5.0 * (1 + 1e-12); }, beta, grid);
    CHECK(b.hypothesis_holds);
    CHECK(b.conclusion_verified);

    // Large beta breaks the hypothesis for flat f.
    const auto c = sup_transfer_check(ones, [](double) { return 2.0; }, 50.0, grid);
    CHECK_FALSE(c.hypothesis_holds);
    REQUIRE(c.failing_T);
    // e^{-50 * 0.01} > 2 e^{-50 T} once T > (log 2 + 0.5) / 50.
    CHECK(*c.failing_T == doctest::Approx(0.03));

    // Random inputs never reach the hypothesis without the conclusion.
    auto g = testing::rng_for(12);
    for (int i = 0; i < 300; ++i) {
        std::vector<std::pair<double, double>> f;
        for (double t : grid) f.emplace_back(t, testing::uniform(g, 0.01, 2.0));
        const double slope = testing::uniform(g, 0, 5);
        const auto r = sup_transfer_check(f, [&](double T) { return 1.0 + slope * T; }, testing::uniform(g, 0, 2), grid);
        if (r.hypothesis_holds) CHECK(r.conclusion_verified);
    }

    CHECK_THROWS_AS(sup_transfer_check(ones, [](double T) { return 2.0 - T; }, 0.1, grid), DomainError);
    CHECK_THROWS_AS(sup_transfer_check(ones, [](double) { return 2.0; }, 0.1, {0.5, 0.2}), DomainError);
    CHECK_THROWS_AS(sup_transfer_check(ones, [](double) { return 2.0; }, 0.1, {}), DomainError);
}

TEST_CASE("verdicts") {
    const Validity ok{};
    CHECK(compare(std::log(2.0), ok, 1.0).verdict == Outcome::Dominates);
    CHECK(compare(std::log(2.0), ok, 3.0).verdict == Outcome::Violated);
    CHECK(compare(std::log(2.0), ok, 0.0).verdict == Outcome::Dominates);
    CHECK(compare(std::log(2.0), ok, 1.0).log_margin() == doctest::Approx(std::log(2.0)));
    CHECK_THROWS_AS(compare(0.0, ok, -1.0), DomainError);
    for (Outcome o : {Outcome::Dominates, Outcome::Violated, Outcome::NotApplicable}) {
        CHECK(outcome_from_string(to_string(o)) == o);
    }
    CHECK_THROWS_AS(outcome_from_string("maybe"), Error);
    ProblemConstants bad;
    bad.L_b = -1;
    CHECK_THROWS_AS(bad.validate(), DomainError);
}
