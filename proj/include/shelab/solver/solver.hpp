#pragma once

#include "shelab/coeff/coefficient.hpp"
#include "shelab/kernel/heat_kernel.hpp"
#include "shelab/noise/noise.hpp"
#include "shelab/solver/grid.hpp"

#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace shelab::solver {

// Everything that determines a trajectory except the level and the noise.
struct Problem {
    coeff::Coefficient drift;      // b
    coeff::Coefficient diffusion;  // sigma
    kernel::InitialCondition u0;
    GridSpec grid;
};

struct Provenance {
    noise::NoiseSpec noise;
    double level = 0.0;  // N; +inf when untruncated
    std::string drift;
    std::string diffusion;
    std::string u0;
    GridSpec grid;
};

// u_{m,j} on the (M+1) x J lattice for one replication.
class FieldTrajectory {
public:
    FieldTrajectory(Provenance provenance, std::vector<double> values);

    std::size_t rows() const noexcept { return provenance_.grid.time_steps() + 1; }
    std::size_t cells() const noexcept { return provenance_.grid.cells(); }
    double at(std::size_t m, std::size_t j) const { return values_[m * cells() + j]; }
    std::span<const double> row(std::size_t m) const { return {values_.data() + m * cells(), cells()}; }
    std::span<const double> values() const noexcept { return values_; }
    const Provenance& provenance() const noexcept { return provenance_; }

private:
    Provenance provenance_;
    std::vector<double> values_;
};

// Scratch rows reused across steps.
struct Workspace {
    std::vector<double> clamped;
    std::vector<double> drift;
    std::vector<double> diffusion;
    std::vector<double> noise;

    explicit Workspace(std::size_t cells)
        : clamped(cells), drift(cells), diffusion(cells), noise(cells) {}
};

using RowObserver = std::function<void(std::size_t m, std::span<const double> row)>;
using PairObserver =
    std::function<void(std::size_t m, std::span<const double> lower, std::span<const double> upper)>;

// Explicit finite-difference Euler-Maruyama integrator for the truncated
// equation du = (1/2) u_xx dt + b_N(t,u) dt + sigma_N(t,u) dW.
class Solver {
public:
    explicit Solver(Problem problem);

    const Problem& problem() const noexcept { return problem_; }
    const GridSpec& grid() const noexcept { return problem_.grid; }

    noise::NoiseSpec noise_spec(std::uint64_t seed, std::uint64_t replication) const;

    // u_{0,j} = u0(x_j).
    std::vector<double> initial_row() const;

    // One step from row m to row m+1. Throws NonFiniteError at (m+1, j).
    void step_explicit(std::span<const double> state, std::size_t m, std::span<const double> noise_row,
                       const coeff::TruncationLevel& level, std::span<double> next, Workspace& ws) const;

    FieldTrajectory solve_truncated(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec) const;

    // Trajectories at N and N+1 driven by one shared noise field.
    std::pair<FieldTrajectory, FieldTrajectory> solve_pair_coupled(const coeff::TruncationLevel& level,
                                                                   const noise::NoiseSpec& spec) const;

    // Streaming forms: rows are handed to the observer and not retained.
    void run(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec, const RowObserver& observe) const;
    void run_pair(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec,
                  const PairObserver& observe) const;

private:
    Provenance provenance(const coeff::TruncationLevel& level, const noise::NoiseSpec& spec) const;

    Problem problem_;
};

} // namespace shelab::solver
