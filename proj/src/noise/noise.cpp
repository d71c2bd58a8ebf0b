#include "shelab/noise/noise.hpp"

#include "shelab/error.hpp"
#include "shelab/noise/philox.hpp"

#include <cmath>
#include <limits>

namespace shelab::noise {

namespace {

double poly(const double (&c)[8], double r) {
    return ((((((c[7] * r + c[6]) * r + c[5]) * r + c[4]) * r + c[3]) * r + c[2]) * r + c[1]) * r + c[0];
}

constexpr double kA[8] = {3.3871328727963666080e0,  1.3314166789178437745e+2,
                          1.9715909503065514427e+3, 1.3731693765509461125e+4,
                          4.5921953931549871457e+4, 6.7265770927008700853e+4,
                          3.3430575583588128105e+4, 2.5090809287301226727e+3};
constexpr double kB[8] = {1.0,
                          4.2313330701600911252e+1, 6.8718700749205790830e+2,
                          5.3941960214247511077e+3, 2.1213794301586595867e+4,
                          3.9307895800092710610e+4, 2.8729085735721942674e+4,
                          5.2264952788528545610e+3};
constexpr double kC[8] = {1.42343711074968357734e0,  4.63033784615654529590e0,
                          5.76949722146069140550e0,  3.64784832476320460504e0,
                          1.27045825245236838258e0,  2.41780725177450611770e-1,
                          2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double kD[8] = {1.0,
                          2.05319162663775882187e0,  1.67638483018380384940e0,
                          6.89767334985100004550e-1, 1.48103976427480074590e-1,
                          1.51986665636164571966e-2, 5.47593808499534494600e-4,
                          1.05075007164441684324e-9};
constexpr double kE[8] = {6.65790464350110377720e0,  5.46378491116411436990e0,
                          1.78482653991729133580e0,  2.96560571828504891230e-1,
                          2.65321895265761230930e-2, 1.24266094738807843860e-3,
                          2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double kF[8] = {1.0,
                          5.99832206555887937690e-1, 1.36929880922735805310e-1,
                          1.48753612908506148525e-2, 7.86869131145613259100e-4,
                          1.84631831751005468180e-5, 1.42151175831644588870e-7,
                          2.04426310338993978564e-15};

PhiloxKey key_of(std::uint64_t seed) noexcept {
    return {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
}

void validate(const NoiseSpec& spec) {
    const LatticeShape& s = spec.shape;
    if (s.time_steps == 0 || s.cells == 0) throw DomainError("noise lattice has zero cells");
    if (!(s.dt > 0.0) || !(s.dx > 0.0)) throw DomainError("noise lattice needs dt > 0 and dx > 0");
    if (s.time_steps > std::numeric_limits<std::uint32_t>::max() ||
        s.cells > std::numeric_limits<std::uint32_t>::max()) {
        throw DomainError("noise lattice index exceeds 32 bits");
    }
}

} // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        if (p == 0.0) return -std::numeric_limits<double>::infinity();
        if (p == 1.0) return std::numeric_limits<double>::infinity();
        return std::numeric_limits<double>::quiet_NaN();
    }
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q * poly(kA, r) / poly(kB, r);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double v;
    if (r <= 5.0) {
        r -= 1.6;
        v = poly(kC, r) / poly(kD, r);
    } else {
        r -= 5.0;
        v = poly(kE, r) / poly(kF, r);
    }
    return q < 0.0 ? -v : v;
}

double standard_normal(std::uint64_t seed, std::uint64_t replication, std::uint64_t m,
                       std::uint64_t j) noexcept {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(m),
                            static_cast<std::uint32_t>(replication),
                            static_cast<std::uint32_t>(replication >> 32)};
    const PhiloxCounter out = philox4x32_10(ctr, key_of(seed));
    const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
    return normal_quantile(bits_to_open_unit(bits));
}

void fill_row(const NoiseSpec& spec, std::size_t m, std::span<double> out) {
    const double scale = std::sqrt(spec.shape.dt * spec.shape.dx);
    for (std::size_t j = 0; j < out.size(); ++j) {
        out[j] = scale * standard_normal(spec.seed, spec.replication, m, j);
    }
}

NoiseField::NoiseField(NoiseSpec spec, std::vector<double> values)
    : spec_(spec), values_(std::move(values)) {
    if (values_.size() != spec_.shape.time_steps * spec_.shape.cells) {
        throw DomainError("noise field size does not match its lattice");
    }
}

NoiseField generate(const NoiseSpec& spec) {
    validate(spec);
    const std::size_t cells = spec.shape.cells;
    std::vector<double> values(spec.shape.time_steps * cells);
    for (std::size_t m = 0; m < spec.shape.time_steps; ++m) {
        fill_row(spec, m, std::span<double>(values.data() + m * cells, cells));
    }
    return NoiseField(spec, std::move(values));
}

std::pair<NoiseView, NoiseView> stream_for_level_pair(const NoiseSpec& spec) {
    auto field = std::make_shared<const NoiseField>(generate(spec));
    return {NoiseView(field), NoiseView(field)};
}

} // namespace shelab::noise
