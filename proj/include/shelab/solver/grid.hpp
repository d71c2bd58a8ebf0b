#pragma once

#include "shelab/noise/noise.hpp"

#include <cstddef>
#include <string>
#include <vector>

namespace shelab::solver {

enum class Boundary { DirichletFrozen, Periodic };

const char* to_string(Boundary b);
Boundary boundary_from_string(const std::string& s);

// Lattice on [-R, R] x [0, T]. x_j = (j - R/dx) dx, t_m = m dt.
struct GridSpec {
    double R = 8.0;
    double dx = 0.05;
    double dt = 1e-3;
    double T = 1.0;
    Boundary boundary = Boundary::DirichletFrozen;

    // Throws DomainError naming the violated condition.
    void validate() const;
    // Non-fatal findings, e.g. a domain too narrow for the horizon.
    std::vector<std::string> warnings() const;

    std::size_t half_cells() const;  // R / dx
    std::size_t cells() const;       // J
    std::size_t time_steps() const;  // M
    double x(std::size_t j) const;
    double t(std::size_t m) const { return static_cast<double>(m) * dt; }

    // Nearest lattice indices; throw DomainError when outside the lattice.
    std::size_t time_index(double time) const;
    std::size_t space_index(double position) const;

    noise::LatticeShape lattice() const;

    bool operator==(const GridSpec&) const = default;
};

} // namespace shelab::solver
