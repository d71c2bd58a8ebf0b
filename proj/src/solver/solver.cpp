#include "shelab/solver/solver.hpp"

#include "shelab/error.hpp"
#include "shelab/simd/kernels.hpp"

#include <cmath>

namespace shelab::solver {

namespace {

// Same operation order as the euler_update kernels.
double update_cell(double left, double mid, double right, double drift, double diffusion, double dw,
                   const simd::StencilParams& p) {
    const double lap = (right - 2.0 * mid) + left;
    double r = mid + p.lambda * lap;
    r = r + p.dt * drift;
    r = r + (diffusion * dw) * p.inv_dx;
    return r;
}

} // namespace

FieldTrajectory::FieldTrajectory(Provenance provenance, std::vector<double> values)
    : provenance_(std::move(provenance)), values_(std::move(values)) {
    if (values_.size() != rows() * cells()) throw DomainError("trajectory size does not match its grid");
}

Solver::Solver(Problem problem) : problem_(std::move(problem)) { problem_.grid.validate(); }

noise::NoiseSpec Solver::noise_spec(std::uint64_t seed, std::uint64_t replication) const {
    return {seed, replication, problem_.grid.lattice()};
}

std::vector<double> Solver::initial_row() const {
    const GridSpec& g = problem_.grid;
    std::vector<double> row(g.cells());
    for (std::size_t j = 0; j < row.size(); ++j) {
        row[j] = problem_.u0(g.x(j));
        if (!(std::fabs(row[j]) <= problem_.u0.bound())) {
            throw DomainError("initial condition exceeds its declared bound at x=" + std::to_string(g.x(j)));
        }
    }
    return row;
}

void Solver::step_explicit(std::span<const double> state, std::size_t m, std::span<const double> noise_row,
                           const coeff::TruncationLevel& level, std::span<double> next, Workspace& ws) const {
    const GridSpec& g = problem_.grid;
    const std::size_t n = g.cells();
    if (state.size() != n || next.size() != n || noise_row.size() != n) {
        throw DomainError("step_explicit: row length does not match the grid");
    }
    const simd::KernelTable& k = simd::active_kernels();
    const double t = g.t(m);

    k.clamp(state.data(), ws.clamped.data(), n, -level.bound(), level.bound());
    problem_.drift.evaluate_row(t, ws.clamped, ws.drift);
    problem_.diffusion.evaluate_row(t, ws.clamped, ws.diffusion);

    const simd::StencilParams p{g.dt / (2.0 * g.dx * g.dx), g.dt, 1.0 / g.dx};
    k.euler_update(state.data(), ws.drift.data(), ws.diffusion.data(), noise_row.data(), next.data(), 1,
                   n - 1, p);
    if (g.boundary == Boundary::DirichletFrozen) {
        next[0] = state[0];
        next[n - 1] = state[n - 1];
    } else {
        next[0] = update_cell(state[n - 1], state[0], state[1], ws.drift[0], ws.diffusion[0], noise_row[0], p);
        next[n - 1] = update_cell(state[n - 2], state[n - 1], state[0], ws.drift[n - 1], ws.diffusion[n - 1],
                                  noise_row[n - 1], p);
    }

    const std::size_t bad = k.first_non_finite(next.data(), n);
    if (bad != n) throw NonFiniteError(m + 1, bad);
}

Provenance Solver::provenance(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec) const {
    return {spec,
            level.n(),
            problem_.drift.description(),
            problem_.diffusion.description(),
            problem_.u0.describe(),
            problem_.grid};
}

void Solver::run(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec,
                 const RowObserver& observe) const {
    const GridSpec& g = problem_.grid;
    if (!(spec.shape.time_steps == g.time_steps() && spec.shape.cells == g.cells())) {
        throw DomainError("noise lattice does not match the grid");
    }
    const std::size_t n = g.cells();
    Workspace ws(n);
    std::vector<double> cur = initial_row();
    std::vector<double> nxt(n);
    observe(0, cur);
    for (std::size_t m = 0; m < g.time_steps(); ++m) {
        noise::fill_row(spec, m, ws.noise);
        step_explicit(cur, m, ws.noise, level, nxt, ws);
        cur.swap(nxt);
        observe(m + 1, cur);
    }
}

void Solver::run_pair(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec,
                      const PairObserver& observe) const {
    const GridSpec& g = problem_.grid;
    if (!(spec.shape.time_steps == g.time_steps() && spec.shape.cells == g.cells())) {
        throw DomainError("noise lattice does not match the grid");
    }
    const coeff::TruncationLevel upper = level.next();
    const std::size_t n = g.cells();
    Workspace ws(n);
    std::vector<double> lo = initial_row();
    std::vector<double> hi = lo;
    std::vector<double> lo_next(n);
    std::vector<double> hi_next(n);
    observe(0, lo, hi);
    for (std::size_t m = 0; m < g.time_steps(); ++m) {
        noise::fill_row(spec, m, ws.noise);
        step_explicit(lo, m, ws.noise, level, lo_next, ws);
        step_explicit(hi, m, ws.noise, upper, hi_next, ws);
        lo.swap(lo_next);
        hi.swap(hi_next);
        observe(m + 1, lo, hi);
    }
}

FieldTrajectory Solver::solve_truncated(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec) const {
    std::vector<double> values;
    values.reserve((grid().time_steps() + 1) * grid().cells());
    run(level, spec, [&](std::size_t, std::span<const double> row) { values.insert(values.end(), row.begin(), row.end()); });
    return FieldTrajectory(provenance(level, spec), std::move(values));
}

std::pair<FieldTrajectory, FieldTrajectory> Solver::solve_pair_coupled(const coeff::TruncationLevel& level,
                                                                       const noise::NoiseSpec& spec) const {
    const auto [lower_noise, upper_noise] = noise::stream_for_level_pair(spec);
    const coeff::TruncationLevel upper = level.next();
    const GridSpec& g = problem_.grid;
    const std::size_t n = g.cells();

    auto integrate = [&](const coeff::TruncationLevel& lvl, const noise::NoiseView& view) {
        Workspace ws(n);
        std::vector<double> values;
        values.reserve((g.time_steps() + 1) * n);
        std::vector<double> cur = initial_row();
        std::vector<double> nxt(n);
        values.insert(values.end(), cur.begin(), cur.end());
        for (std::size_t m = 0; m < g.time_steps(); ++m) {
            step_explicit(cur, m, view.row(m), lvl, nxt, ws);
            cur.swap(nxt);
            values.insert(values.end(), cur.begin(), cur.end());
        }
        return FieldTrajectory(provenance(lvl, view.spec()), std::move(values));
    };
    return {integrate(level, lower_noise), integrate(upper, upper_noise)};
}

} // namespace shelab::solver
