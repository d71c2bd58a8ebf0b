#include "shelab/error.hpp"
#include "shelab/harness/experiments.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>

namespace {

enum Exit { kOk = 0, kConfig = 1, kAssertion = 2, kIo = 3 };

struct Globals {
    std::string out = "results";
    std::size_t threads = 1;
    std::optional<std::uint64_t> seed;
};

shelab::harness::ExperimentConfig load(const std::string& path, const Globals& g) {
    auto config = shelab::harness::load_config(path);
    if (g.seed) config.seed = *g.seed;
    return config;
}

int finish(const shelab::harness::ResultSet& results, const Globals& g) {
    for (const auto& path : shelab::harness::export_results(results, g.out)) std::cout << "wrote " << path.string() << '\n';
    for (const auto& note : results.notes) std::cerr << "note: " << note << '\n';
    const auto failed = shelab::harness::failures(results);
    for (const auto& f : failed) std::cerr << "FAILED: " << f << '\n';
    return failed.empty() ? kOk : kAssertion;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stochastic heat equation lab: truncated simulations checked against explicit bounds"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--out", g.out, "Output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "Worker threads (scheduling only)")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--seed", g.seed, "Override the config seed");
    app.fallthrough();  // global flags may follow the subcommand

    std::string config_path;
    std::string results_path;
    std::string format = "csv";
    const std::vector<std::pair<std::string, std::string>> commands{
        {"check-assumptions", "Classify b and sigma against the growth conditions"},
        {"simulate", "Solve one replication per level and dump trajectories"},
        {"verify-moments", "Compare Monte Carlo moments with the moment bounds"},
        {"verify-tails", "Compare empirical tail probabilities with the tail bounds"},
        {"convergence", "Coupled differences between levels N and N+1"},
        {"uniqueness", "Bitwise comparison of coupled and re-parsed solves"},
    };
    for (const auto& [name, description] : commands) {
        auto* sub = app.add_subcommand(name, description);
        sub->add_option("config", config_path, "Experiment config (JSON)")->required();
    }
    auto* report = app.add_subcommand("report", "Re-emit a stored result set");
    report->add_option("results", results_path, "Result set (JSON)")->required();
    report->add_option("--format", format)->check(CLI::IsMember({"csv", "json"}))->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kConfig;
    }

    using namespace shelab::harness;
    const RunOptions options{g.threads};
    try {
        if (report->parsed()) {
            const ResultSet rs = import_results(results_path);
            if (format == "csv") {
                write_csv(std::cout, rs);
            } else {
                std::cout << to_json(rs).dump(2) << '\n';
            }
            return kOk;
        }
        const auto config = load(config_path, g);
        if (app.got_subcommand("check-assumptions")) {
            const ResultSet rs = run_assumption_check(config);
            const int code = finish(rs, g);
            const auto verdict = rs.details["verdict"].get<std::string>();
            std::cout << "verdict: " << verdict << '\n';
            return code != kOk ? code : (verdict == "fail" ? kAssertion : kOk);
        }
        if (app.got_subcommand("simulate")) return finish(run_simulation(config, std::filesystem::path(g.out)), g);
        if (app.got_subcommand("verify-moments")) return finish(run_moment_verification(config, options), g);
        if (app.got_subcommand("verify-tails")) return finish(run_tail_verification(config, options), g);
        if (app.got_subcommand("convergence")) return finish(run_truncation_convergence(config, options), g);
        if (app.got_subcommand("uniqueness")) return finish(run_uniqueness_coupling(config, options), g);
    } catch (const shelab::IoError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kIo;
    } catch (const shelab::ExperimentFailure& e) {
        std::cerr << "experiment failed: " << e.what() << '\n';
        return kAssertion;
    } catch (const shelab::CouplingError& e) {
        std::cerr << "coupling violated: " << e.what() << '\n';
        return kAssertion;
    } catch (const shelab::Error& e) {
        std::cerr << "config rejected: " << e.what() << '\n';
        return kConfig;
    }
    return kConfig;
}
