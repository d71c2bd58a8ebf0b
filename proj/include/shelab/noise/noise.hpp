#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace shelab::noise {

// Inverse of the standard normal distribution function on (0, 1)
// (Wichura's AS 241, PPND16; relative accuracy about 1e-16).
double normal_quantile(double p);

// Lattice on which increments live: M time steps by J cells.
struct LatticeShape {
    std::size_t time_steps = 0;  // M
    std::size_t cells = 0;       // J
    double dt = 0.0;
    double dx = 0.0;

    bool operator==(const LatticeShape&) const = default;
};

struct NoiseSpec {
    std::uint64_t seed = 0;
    std::uint64_t replication = 0;
    LatticeShape shape;

    bool operator==(const NoiseSpec&) const = default;
};

// Standard normal variate for cell (m, j); a pure function of its arguments.
double standard_normal(std::uint64_t seed, std::uint64_t replication, std::uint64_t m,
                       std::uint64_t j) noexcept;

// Writes Delta W_{m, j}, j = 0..J-1, scaled to variance dt * dx.
void fill_row(const NoiseSpec& spec, std::size_t m, std::span<double> out);

// Immutable M x J array of white-noise increments.
class NoiseField {
public:
    NoiseField(NoiseSpec spec, std::vector<double> values);

    const NoiseSpec& spec() const noexcept { return spec_; }
    std::size_t time_steps() const noexcept { return spec_.shape.time_steps; }
    std::size_t cells() const noexcept { return spec_.shape.cells; }
    double at(std::size_t m, std::size_t j) const { return values_[m * cells() + j]; }
    std::span<const double> row(std::size_t m) const {
        return {values_.data() + m * cells(), cells()};
    }
    std::span<const double> values() const noexcept { return values_; }

private:
    NoiseSpec spec_;
    std::vector<double> values_;
};

NoiseField generate(const NoiseSpec& spec);

// Read-only window onto a shared noise field.
class NoiseView {
public:
    explicit NoiseView(std::shared_ptr<const NoiseField> field) : field_(std::move(field)) {}

    const NoiseSpec& spec() const noexcept { return field_->spec(); }
    double at(std::size_t m, std::size_t j) const { return field_->at(m, j); }
    std::span<const double> row(std::size_t m) const { return field_->row(m); }
    const NoiseField* field() const noexcept { return field_.get(); }

private:
    std::shared_ptr<const NoiseField> field_;
};

// The same increments exposed to the level-N and level-(N+1) solves.
std::pair<NoiseView, NoiseView> stream_for_level_pair(const NoiseSpec& spec);

} // namespace shelab::noise
