#include "shelab/estimators/estimators.hpp"

#include "shelab/error.hpp"
#include "shelab/parallel.hpp"
#include "shelab/simd/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>

namespace shelab::estimators {

namespace {

bool same_point(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(a)); }

double kth_root(double v, double k) { return v <= 0.0 ? 0.0 : std::pow(v, 1.0 / k); }

void require_order(double k) {
    if (!(k >= 1.0) || !std::isfinite(k)) throw DomainError("moment order k must be >= 1");
}

// Probes grouped by their time row.
std::map<std::size_t, std::vector<std::size_t>> probes_by_row(const ProbeSet& probes) {
    std::map<std::size_t, std::vector<std::size_t>> rows;
    for (std::size_t p = 0; p < probes.size(); ++p) rows[probes[p].m].push_back(p);
    return rows;
}

SampleTable transpose(const ProbeSet& probes, const std::vector<std::optional<std::vector<double>>>& per_rep) {
    SampleTable table;
    table.probes = probes;
    table.samples.assign(probes.size(), {});
    for (const auto& rep : per_rep) {
        if (!rep) continue;
        for (std::size_t p = 0; p < probes.size(); ++p) table.samples[p].push_back((*rep)[p]);
    }
    return table;
}

} // namespace

ProbeSet::ProbeSet(std::vector<Probe> probes) : probes_(std::move(probes)) {}

ProbeSet ProbeSet::make(const solver::GridSpec& grid, const std::vector<double>& times,
                        const std::vector<double>& positions, std::size_t stride, std::size_t n_times) {
    grid.validate();
    std::set<std::size_t> rows;
    if (times.empty()) {
        if (n_times == 0) throw DomainError("probe set needs at least one time");
        for (std::size_t i = 1; i <= n_times; ++i) {
            rows.insert(grid.time_index(grid.T * static_cast<double>(i) / static_cast<double>(n_times)));
        }
    } else {
        for (double t : times) rows.insert(grid.time_index(t));
    }
    std::set<std::size_t> cells;
    if (positions.empty()) {
        if (stride == 0) throw DomainError("probe stride must be positive");
        const std::size_t centre = grid.half_cells();
        for (std::size_t j = centre % stride; j < grid.cells(); j += stride) cells.insert(j);
    } else {
        for (double x : positions) cells.insert(grid.space_index(x));
    }
    std::vector<Probe> probes;
    for (std::size_t m : rows) {
        for (std::size_t j : cells) probes.push_back({m, j, grid.t(m), grid.x(j)});
    }
    return ProbeSet(std::move(probes));
}

std::size_t ProbeSet::find(double t, double x) const {
    for (std::size_t i = 0; i < probes_.size(); ++i) {
        if (same_point(probes_[i].t, t) && same_point(probes_[i].x, x)) return i;
    }
    throw DomainError("no probe at (t=" + std::to_string(t) + ", x=" + std::to_string(x) + ")");
}

void CompensatedSum::add(double v) noexcept {
    const double s = sum_ + v;
    if (std::fabs(sum_) >= std::fabs(v)) {
        comp_ += (sum_ - s) + v;
    } else {
        comp_ += (v - s) + sum_;
    }
    sum_ = s;
}

void CompensatedSum::merge(const CompensatedSum& other) noexcept {
    add(other.sum_);
    add(other.comp_);
}

MomentAccumulator::MomentAccumulator(double k) : k_(k) { require_order(k); }

void MomentAccumulator::add(double sample) noexcept {
    const double y = std::pow(std::fabs(sample), k_);
    s1_.add(y);
    s2_.add(y * y);
    ++n_;
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
    if (other.k_ != k_) throw DomainError("cannot merge moment accumulators of different orders");
    s1_.merge(other.s1_);
    s2_.merge(other.s2_);
    n_ += other.n_;
}

MomentEstimate finish(const MomentAccumulator& acc) {
    MomentEstimate e;
    e.k = acc.order();
    e.count = acc.count();
    if (e.count == 0) throw DomainError("moment estimate of an empty sample");
    const double n = static_cast<double>(e.count);
    e.mean = acc.sum() / n;
    e.lo = e.mean;
    e.hi = e.mean;
    if (e.count >= kMinReplicationsForInterval) {
        const double var = std::max(0.0, (acc.sum_sq() - acc.sum() * e.mean) / (n - 1.0));
        const double half = kZ95 * std::sqrt(var / n);
        e.lo = std::max(0.0, e.mean - half);
        e.hi = e.mean + half;
        e.has_interval = true;
        e.wide = e.mean > 0.0 && half / e.mean > 0.5;
    }
    e.norm = kth_root(e.mean, e.k);
    e.norm_lo = kth_root(e.lo, e.k);
    e.norm_hi = kth_root(e.hi, e.k);
    return e;
}

MomentEstimate moment_estimate(std::span<const double> samples, double k) {
    MomentAccumulator acc(k);
    for (double s : samples) acc.add(s);
    return finish(acc);
}

WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z) {
    if (n == 0) throw DomainError("Wilson interval of an empty sample");
    if (successes > n) throw DomainError("more successes than trials");
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(successes) / nn;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / nn;
    const double centre = (p + z2 / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z2 / (4.0 * nn * nn)) / denom;
    // The limits are exactly 0 and 1 at the extreme counts; rounding would leave residue.
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == n ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

Ensemble sample_ensemble(const solver::Solver& solver, const coeff::TruncationLevel& level, std::uint64_t seed,
                         std::size_t replications, const ProbeSet& probes, std::size_t threads) {
    if (replications == 0) throw DomainError("ensemble needs at least one replication");
    const auto rows = probes_by_row(probes);
    std::vector<std::optional<std::vector<double>>> values(replications);
    std::vector<double> maxima(replications, 0.0);

    parallel_for(replications, threads, [&](std::size_t r) {
        std::vector<double> rec(probes.size());
        double peak = 0.0;
        const simd::KernelTable& k = simd::active_kernels();
        try {
            solver.run(level, solver.noise_spec(seed, r), [&](std::size_t m, std::span<const double> row) {
                peak = std::max(peak, k.max_abs(row.data(), row.size()));
                if (const auto it = rows.find(m); it != rows.end()) {
                    for (std::size_t p : it->second) rec[p] = row[probes[p].j];
                }
            });
        } catch (const NonFiniteError&) {
            return;
        }
        values[r] = std::move(rec);
        maxima[r] = peak;
    });

    Ensemble e;
    e.grid = solver.grid();
    e.level = level.n();
    e.seed = seed;
    for (std::size_t r = 0; r < replications; ++r) {
        if (values[r]) {
            e.replications.push_back(r);
            e.path_max.push_back(maxima[r]);
        } else {
            e.aborted.push_back(r);
        }
    }
    e.table = transpose(probes, values);
    return e;
}

PairEnsemble sample_pair_ensemble(const solver::Solver& solver, const coeff::TruncationLevel& level,
                                  std::uint64_t seed, std::size_t replications, const ProbeSet& probes,
                                  std::size_t threads) {
    if (replications == 0) throw DomainError("ensemble needs at least one replication");
    const auto rows = probes_by_row(probes);
    std::vector<std::optional<std::vector<double>>> lower(replications);
    std::vector<std::optional<std::vector<double>>> upper(replications);
    std::vector<std::optional<std::vector<double>>> diff(replications);
    std::vector<double> sup_diff(replications, 0.0);
    std::vector<double> peak_lower(replications, 0.0);

    parallel_for(replications, threads, [&](std::size_t r) {
        std::vector<double> lo(probes.size());
        std::vector<double> hi(probes.size());
        double sup = 0.0;
        double peak = 0.0;
        const simd::KernelTable& k = simd::active_kernels();
        try {
            solver.run_pair(level, solver.noise_spec(seed, r),
                            [&](std::size_t m, std::span<const double> a, std::span<const double> b) {
                                sup = std::max(sup, k.max_abs_diff(b.data(), a.data(), a.size()));
                                peak = std::max(peak, k.max_abs(a.data(), a.size()));
                                if (const auto it = rows.find(m); it != rows.end()) {
                                    for (std::size_t p : it->second) {
                                        lo[p] = a[probes[p].j];
                                        hi[p] = b[probes[p].j];
                                    }
                                }
                            });
        } catch (const NonFiniteError&) {
            return;
        }
        std::vector<double> d(probes.size());
        for (std::size_t p = 0; p < probes.size(); ++p) d[p] = hi[p] - lo[p];
        lower[r] = std::move(lo);
        upper[r] = std::move(hi);
        diff[r] = std::move(d);
        sup_diff[r] = sup;
        peak_lower[r] = peak;
    });

    PairEnsemble e;
    e.grid = solver.grid();
    e.level = level.n();
    e.seed = seed;
    for (std::size_t r = 0; r < replications; ++r) {
        if (diff[r]) {
            e.replications.push_back(r);
            const noise::NoiseSpec spec = solver.noise_spec(seed, r);
            e.lower_noise.push_back(spec);
            e.upper_noise.push_back(spec);
            e.path_sup_difference.push_back(sup_diff[r]);
            e.path_max_lower.push_back(peak_lower[r]);
        } else {
            e.aborted.push_back(r);
        }
    }
    e.lower = transpose(probes, lower);
    e.upper = transpose(probes, upper);
    e.difference = transpose(probes, diff);
    return e;
}

MomentEstimate lk_norm_at(const SampleTable& table, double k, std::size_t probe) {
    require_order(k);
    if (probe >= table.samples.size()) throw DomainError("probe index out of range");
    return moment_estimate(table.samples[probe], k);
}

MomentEstimate lk_norm(const SampleTable& table, double k, double t, double x) {
    return lk_norm_at(table, k, table.probes.find(t, x));
}

double weighted_norm(const SampleTable& table, double k, double beta, double T) {
    if (!(beta > 0.0)) throw DomainError("weighted norm requires beta > 0");
    require_order(k);
    bool any = false;
    double best = 0.0;
    for (std::size_t p = 0; p < table.probes.size(); ++p) {
        const double t = table.probes[p].t;
        if (!(t > 0.0) || t > T * (1.0 + 1e-12)) continue;
        any = true;
        best = std::max(best, std::exp(-beta * t) * lk_norm_at(table, k, p).norm);
    }
    if (!any) throw DomainError("weighted norm: no probe in (0, T]");
    return best;
}

TailEstimate tail_probability_at(const SampleTable& table, double threshold, std::size_t probe) {
    if (!(threshold > 0.0)) throw DomainError("tail threshold must be positive");
    if (probe >= table.samples.size()) throw DomainError("probe index out of range");
    const auto& s = table.samples[probe];
    TailEstimate e;
    e.count = s.size();
    e.exceedances = static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [&](double v) { return std::fabs(v) >= threshold; }));
    e.probability = static_cast<double>(e.exceedances) / static_cast<double>(e.count);
    e.interval = wilson_interval(e.exceedances, e.count);
    return e;
}

TailEstimate tail_probability(const SampleTable& table, double threshold, double t, double x) {
    return tail_probability_at(table, threshold, table.probes.find(t, x));
}

double coupled_sup_difference(const PairEnsemble& pairs, double k, double T) {
    require_order(k);
    if (pairs.lower_noise.size() != pairs.upper_noise.size() ||
        pairs.lower_noise.size() != pairs.replications.size()) {
        throw CouplingError("pair ensemble provenance is incomplete");
    }
    for (std::size_t i = 0; i < pairs.lower_noise.size(); ++i) {
        if (!(pairs.lower_noise[i] == pairs.upper_noise[i])) {
            throw CouplingError("replication " + std::to_string(pairs.replications[i]) +
                                " was not driven by a shared noise field");
        }
    }
    const SampleTable& table = pairs.difference;
    bool any = false;
    double best = 0.0;
    for (std::size_t p = 0; p < table.probes.size(); ++p) {
        const double t = table.probes[p].t;
        if (!(t > 0.0) || t > T * (1.0 + 1e-12)) continue;
        any = true;
        best = std::max(best, lk_norm_at(table, k, p).norm);
    }
    if (!any) throw DomainError("coupled difference: no probe in (0, T]");
    return best;
}

} // namespace shelab::estimators
