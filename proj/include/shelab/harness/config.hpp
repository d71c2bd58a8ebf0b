#pragma once

#include "shelab/bounds/bounds.hpp"
#include "shelab/coeff/coefficient.hpp"
#include "shelab/estimators/estimators.hpp"
#include "shelab/kernel/heat_kernel.hpp"
#include "shelab/solver/solver.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace shelab::harness {

struct ConstantOverrides {
    double c = 2.0;
    std::optional<double> L_b;
    std::optional<double> L_sigma;
    std::optional<double> sigma_sup;
    bool inflate_sigma = false;
};

struct ProbeOptions {
    std::vector<double> times;  // empty: n_times evenly spaced in (0, T]
    std::vector<double> x;      // empty: every `stride`-th cell
    std::size_t stride = 10;
    std::size_t n_times = 20;
};

struct CheckOptions {
    std::vector<double> levels{1, 2, 3, 4, 5, 6};
    double step = 1e-3;
    double tolerance = 1e-3;
};

struct ExperimentConfig {
    nlohmann::json b;      // {"expr": ...} or {"builtin": ..., params}, plus optional "L", "sup"
    nlohmann::json sigma;
    nlohmann::json u0;     // {"kind": ..., ...}
    solver::GridSpec grid;
    std::size_t replications = 100;
    std::vector<double> levels{1};
    std::vector<double> orders{2};
    std::uint64_t seed = 0;
    bool bounded_sigma = false;
    ConstantOverrides constants;
    ProbeOptions probes;
    CheckOptions check;
    double max_order = 8.0;
};

// Every invalid document raises ConfigError naming the offending field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// Canonical effective configuration; parse_config(to_json(c)) == c.
nlohmann::json to_json(const ExperimentConfig& config);

// FNV-1a 64 of the canonical dump, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

coeff::Coefficient make_coefficient(const nlohmann::json& spec);
kernel::InitialCondition make_initial(const nlohmann::json& spec);
solver::Problem make_problem(const ExperimentConfig& config);
estimators::ProbeSet make_probes(const ExperimentConfig& config);

struct ResolvedConstants {
    bounds::ProblemConstants constants;
    std::vector<std::string> notes;  // where each constant came from
};

// Declared overrides first, then coefficient metadata, then lattice estimates
// (lower bounds, flagged in the notes).
ResolvedConstants resolve_constants(const ExperimentConfig& config, const solver::Problem& problem);

} // namespace shelab::harness
