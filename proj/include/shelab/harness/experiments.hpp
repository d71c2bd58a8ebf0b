#pragma once

#include "shelab/harness/config.hpp"
#include "shelab/harness/results.hpp"

#include <filesystem>
#include <optional>

namespace shelab::harness {

struct RunOptions {
    std::size_t threads = 1;  // scheduling only; results never depend on it
};

// Experiments raise ConfigError before any simulation when the config cannot
// serve them, and ExperimentFailure when more than 1% of replications abort.
// Bound violations and coupling mismatches are recorded in
// details["failures"]; see failures().

ResultSet run_moment_verification(const ExperimentConfig& config, const RunOptions& options = {});
ResultSet run_tail_verification(const ExperimentConfig& config, const RunOptions& options = {});
ResultSet run_truncation_convergence(const ExperimentConfig& config, const RunOptions& options = {});
ResultSet run_uniqueness_coupling(const ExperimentConfig& config, const RunOptions& options = {});

// Replication 0 at every level; trajectories are dumped into `dump_dir` when given.
ResultSet run_simulation(const ExperimentConfig& config, const std::optional<std::filesystem::path>& dump_dir = {});
ResultSet run_assumption_check(const ExperimentConfig& config);

std::vector<std::string> failures(const ResultSet& results);

inline constexpr double kAbortBudget = 0.01;

} // namespace shelab::harness
