#pragma once

#include "shelab/coeff/coefficient.hpp"
#include "shelab/noise/noise.hpp"
#include "shelab/solver/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace shelab::estimators {

inline constexpr double kZ95 = 1.959963984540054;
inline constexpr std::size_t kMinReplicationsForInterval = 30;

struct Probe {
    std::size_t m = 0;
    std::size_t j = 0;
    double t = 0.0;  // snapped lattice time
    double x = 0.0;
};

// Lattice points at which ensembles record values.
class ProbeSet {
public:
    ProbeSet() = default;
    explicit ProbeSet(std::vector<Probe> probes);

    // Defaults: `n_times` evenly spaced times in (0, T] and every `stride`-th
    // cell. Explicit time/position lists snap to the nearest lattice point;
    // duplicates after snapping are dropped.
    static ProbeSet make(const solver::GridSpec& grid, const std::vector<double>& times = {},
                         const std::vector<double>& positions = {}, std::size_t stride = 10,
                         std::size_t n_times = 20);

    std::size_t size() const noexcept { return probes_.size(); }
    const Probe& operator[](std::size_t i) const { return probes_[i]; }
    const std::vector<Probe>& probes() const noexcept { return probes_; }

    // Index of the probe at lattice time t and position x; throws DomainError
    // when no probe sits there.
    std::size_t find(double t, double x) const;

private:
    std::vector<Probe> probes_;
};

// Neumaier-compensated running sum.
class CompensatedSum {
public:
    void add(double v) noexcept;
    void merge(const CompensatedSum& other) noexcept;
    double value() const noexcept { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Mergeable sufficient statistics for E|X|^k.
class MomentAccumulator {
public:
    explicit MomentAccumulator(double k);

    void add(double sample) noexcept;
    void merge(const MomentAccumulator& other);

    double order() const noexcept { return k_; }
    std::size_t count() const noexcept { return n_; }
    double sum() const noexcept { return s1_.value(); }
    double sum_sq() const noexcept { return s2_.value(); }

private:
    double k_;
    std::size_t n_ = 0;
    CompensatedSum s1_;
    CompensatedSum s2_;
};

struct MomentEstimate {
    double k = 0.0;
    std::size_t count = 0;
    double mean = 0.0;  // estimate of E|u|^k
    double lo = 0.0;    // 95% CLT interval for E|u|^k, clipped at 0
    double hi = 0.0;
    bool has_interval = false;  // false below kMinReplicationsForInterval
    double norm = 0.0;          // mean^(1/k)
    double norm_lo = 0.0;
    double norm_hi = 0.0;
    bool wide = false;  // relative half-width above 0.5
};

MomentEstimate finish(const MomentAccumulator& acc);
MomentEstimate moment_estimate(std::span<const double> samples, double k);

struct WilsonInterval {
    double lo = 0.0;
    double hi = 0.0;
};
WilsonInterval wilson_interval(std::size_t successes, std::size_t n, double z = kZ95);

struct TailEstimate {
    std::size_t exceedances = 0;
    std::size_t count = 0;
    double probability = 0.0;
    WilsonInterval interval;
};

// samples[p][r]: value of replication r at probe p.
struct SampleTable {
    ProbeSet probes;
    std::vector<std::vector<double>> samples;

    std::size_t replications() const { return samples.empty() ? 0 : samples.front().size(); }
};

struct Ensemble {
    solver::GridSpec grid;
    double level = 0.0;  // +inf when untruncated
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> replications;  // completed replication indices
    std::vector<std::uint64_t> aborted;       // replications stopped by a non-finite value
    std::vector<double> path_max;             // max |u| over the lattice, per completed replication
    SampleTable table;
};

struct PairEnsemble {
    solver::GridSpec grid;
    double level = 0.0;  // lower level N; the upper one is N+1
    std::uint64_t seed = 0;
    std::vector<std::uint64_t> replications;
    std::vector<std::uint64_t> aborted;
    std::vector<noise::NoiseSpec> lower_noise;
    std::vector<noise::NoiseSpec> upper_noise;
    std::vector<double> path_sup_difference;  // max |u_{N+1} - u_N| over the lattice
    std::vector<double> path_max_lower;       // max |u_N| over the lattice
    SampleTable lower;
    SampleTable upper;
    SampleTable difference;  // u_{N+1} - u_N
};

Ensemble sample_ensemble(const solver::Solver& solver, const coeff::TruncationLevel& level,
                         std::uint64_t seed, std::size_t replications, const ProbeSet& probes,
                         std::size_t threads = 1);

PairEnsemble sample_pair_ensemble(const solver::Solver& solver, const coeff::TruncationLevel& level,
                                  std::uint64_t seed, std::size_t replications, const ProbeSet& probes,
                                  std::size_t threads = 1);

MomentEstimate lk_norm(const SampleTable& table, double k, double t, double x);
MomentEstimate lk_norm_at(const SampleTable& table, double k, std::size_t probe);

// Lattice form of N_{k,beta,T}: max over probes with 0 < t <= T of
// e^{-beta t} ||Z(t,x)||_k.
double weighted_norm(const SampleTable& table, double k, double beta, double T);

TailEstimate tail_probability(const SampleTable& table, double threshold, double t, double x);
TailEstimate tail_probability_at(const SampleTable& table, double threshold, std::size_t probe);

// max over probes with 0 < t <= T of ||u_{N+1}(t,x) - u_N(t,x)||_k. Throws
// CouplingError when a replication's two levels were not driven by the same
// noise.
double coupled_sup_difference(const PairEnsemble& pairs, double k, double T);

} // namespace shelab::estimators
