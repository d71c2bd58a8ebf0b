#pragma once

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace shelab::harness {

inline constexpr const char* kVersion = "shelab 0.1.0";

// One CSV row.
struct Record {
    std::string experiment;
    std::optional<double> N;
    std::optional<double> k;
    std::optional<double> t;
    std::optional<double> x;
    std::optional<double> estimate;
    std::optional<double> ci_lo;
    std::optional<double> ci_hi;
    std::optional<double> bound_log;
    std::string verdict;
    std::uint64_t seed = 0;
    std::string config_hash;

    bool operator==(const Record&) const = default;
};

// Coupled difference at one level.
struct ConvergenceRow {
    double N = 0.0;
    double k = 0.0;
    double value = 0.0;
    bool operator==(const ConvergenceRow&) const = default;
};

// OLS fit of log(value) against N^{3/2} over the levels with nonzero value.
struct DecayFit {
    double k = 0.0;
    std::size_t active_levels = 0;
    std::optional<double> slope;  // undefined with fewer than two active levels
    std::optional<double> intercept;
    std::optional<double> plateau;  // first level from which every value is exactly 0
    bool nonincreasing = true;
    bool operator==(const DecayFit&) const = default;
};

struct ResultProvenance {
    std::string config_hash;
    std::string version = kVersion;
    std::uint64_t seed = 0;
    std::size_t replications = 0;
    nlohmann::json config;  // canonical effective config
    bool operator==(const ResultProvenance&) const = default;
};

struct ResultSet {
    std::string experiment;
    ResultProvenance provenance;
    std::vector<Record> records;
    std::vector<ConvergenceRow> convergence;
    std::vector<DecayFit> fits;
    std::vector<std::string> notes;
    std::size_t aborted = 0;
    nlohmann::json details;  // experiment-specific extras
    bool operator==(const ResultSet&) const = default;
};

inline const char* kCsvHeader = "experiment,N,k,t,x,estimate,ci_lo,ci_hi,bound_log,verdict,seed,config_hash";

void write_csv(std::ostream& out, const ResultSet& results);
void write_plot_csv(std::ostream& out, const ResultSet& results);

nlohmann::json to_json(const ResultSet& results);
ResultSet result_set_from_json(const nlohmann::json& doc);

// `<dir>/<experiment>.csv`, `.json`, and `_plot.csv` when a convergence
// table is present. Returns the paths written.
std::vector<std::filesystem::path> export_results(const ResultSet& results, const std::filesystem::path& dir);
ResultSet import_results(const std::filesystem::path& path);

// %.17g, with inf/nan spelled "inf", "-inf", "nan".
std::string format_number(double v);

} // namespace shelab::harness
