#include "shelab/solver/grid.hpp"

#include "shelab/error.hpp"

#include <cmath>
#include <sstream>

namespace shelab::solver {

namespace {

bool near_integer(double v) { return std::fabs(v - std::round(v)) <= 1e-9 * std::max(1.0, std::fabs(v)); }

} // namespace

const char* to_string(Boundary b) {
    return b == Boundary::Periodic ? "periodic" : "dirichlet-frozen";
}

Boundary boundary_from_string(const std::string& s) {
    if (s == "dirichlet-frozen" || s == "dirichlet") return Boundary::DirichletFrozen;
    if (s == "periodic") return Boundary::Periodic;
    throw DomainError("unknown boundary '" + s + "' (expected dirichlet-frozen or periodic)");
}

void GridSpec::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw DomainError(std::string("grid.") + name + " must be positive and finite");
        }
    };
    positive(R, "R");
    positive(dx, "dx");
    positive(dt, "dt");
    positive(T, "T");
    if (dt > dx * dx * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "stability condition dt <= dx^2 violated (dt=" << dt << ", dx^2=" << dx * dx << ")";
        throw DomainError(os.str());
    }
    if (!near_integer(R / dx)) throw DomainError("grid.R must be an integer multiple of grid.dx");
    if (!near_integer(T / dt)) throw DomainError("grid.T must be an integer multiple of grid.dt");
    if (half_cells() < 1) throw DomainError("grid has fewer than three cells");
}

std::vector<std::string> GridSpec::warnings() const {
    std::vector<std::string> out;
    if (R < 4.0 * std::sqrt(T)) {
        std::ostringstream os;
        os << "domain half-width R=" << R << " is below 4 sqrt(T)=" << 4.0 * std::sqrt(T)
           << "; domain truncation error may be visible";
        out.push_back(os.str());
    }
    return out;
}

std::size_t GridSpec::half_cells() const { return static_cast<std::size_t>(std::llround(R / dx)); }

std::size_t GridSpec::cells() const {
    const std::size_t k = half_cells();
    return boundary == Boundary::Periodic ? 2 * k : 2 * k + 1;
}

std::size_t GridSpec::time_steps() const { return static_cast<std::size_t>(std::llround(T / dt)); }

double GridSpec::x(std::size_t j) const {
    return (static_cast<double>(j) - static_cast<double>(half_cells())) * dx;
}

std::size_t GridSpec::time_index(double time) const {
    if (!(time >= 0.0) || time > T * (1.0 + 1e-12)) {
        throw DomainError("time " + std::to_string(time) + " is outside [0, T]");
    }
    return static_cast<std::size_t>(std::llround(time / dt));
}

std::size_t GridSpec::space_index(double position) const {
    const double k = std::round(position / dx) + static_cast<double>(half_cells());
    if (!(k >= 0.0) || k >= static_cast<double>(cells())) {
        throw DomainError("position " + std::to_string(position) + " is outside the spatial lattice");
    }
    return static_cast<std::size_t>(k);
}

noise::LatticeShape GridSpec::lattice() const { return {time_steps(), cells(), dt, dx}; }

} // namespace shelab::solver
