// Command-line front end: `run` executes a scenario config (with
// optional flag overrides) and writes its artifacts; `verify` runs the
// acceptance battery. Exit codes: 0 success, 2 config/usage error,
// 3 run failure or failed criteria.

#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "qkd/scenario.hpp"
#include "qkd/serialize.hpp"
#include "qkd/verify.hpp"

namespace {

int do_run(const std::string& config_path, const std::optional<std::uint64_t>& seed,
           const std::optional<std::size_t>& reps, const std::string& csv_path,
           const std::string& dump_path) {
    qkd::ScenarioConfig cfg;
    try {
        cfg = qkd::load_scenario_file(config_path);
        if (seed) cfg.params.seed = *seed;
        if (reps) {
            if (*reps < 1) throw qkd::ConfigError("repetitions: must be >= 1");
            cfg.repetitions = *reps;
        }
        if (!csv_path.empty()) cfg.output.csv = csv_path;
        if (!dump_path.empty()) cfg.output.transcripts = dump_path;
    } catch (const qkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    }

    try {
        const qkd::ScenarioResult result = qkd::run_scenario(cfg);
        qkd::write_outputs(result);

        std::cout << "scheme=" << qkd::to_string(cfg.params.scheme)
                  << " eve=" << qkd::to_string(cfg.eve.kind) << " m=" << cfg.params.m
                  << " rounds=" << cfg.params.rounds << " reps=" << cfg.repetitions
                  << " seed=" << cfg.params.seed << '\n';
        std::cout << "mean_qber=" << qkd::format_fixed(result.mean_qber)
                  << " mean_sifted_fraction=" << qkd::format_fixed(result.mean_sifted_fraction)
                  << " net_key_bits=" << result.net_key_bits
                  << " aborted_reps=" << result.aborted_reps << "/" << cfg.repetitions << '\n';
        if (result.attack) {
            const qkd::AttackReport& a = *result.attack;
            std::cout << "attack strategy=" << a.strategy << " records=" << a.n_records
                      << " qber=" << qkd::format_fixed(a.qber)
                      << " eve_bit_agreement=" << qkd::format_fixed(a.eve_bit_agreement);
            if (a.mi_estimate_bits)
                std::cout << " mi_bits=" << qkd::format_fixed(*a.mi_estimate_bits);
            if (a.posterior_max_deviation)
                std::cout << " posterior_max_deviation="
                          << qkd::format_fixed(*a.posterior_max_deviation);
            std::cout << '\n';
        }
        if (cfg.output.csv.empty()) {
            std::cout << result.csv;
        } else {
            std::cout << "csv: " << cfg.output.csv << '\n';
        }
        if (!cfg.output.transcripts.empty())
            std::cout << "transcripts: " << cfg.output.transcripts << '\n';
        if (!cfg.output.report.empty()) std::cout << "report: " << cfg.output.report << '\n';
        return 0;
    } catch (const qkd::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 3;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deterministic simulator of quantum key distribution with secret "
                 "(never-announced) bases, a bb84 baseline, and an adversary suite"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> reps;
    std::string csv_path;
    std::string dump_path;
    CLI::App* run = app.add_subcommand("run", "Execute a scenario config");
    run->add_option("--config", config_path, "Scenario config file (JSON)")->required();
    run->add_option("--seed", seed, "Override the master seed");
    run->add_option("--reps", reps, "Override the repetition count");
    run->add_option("--csv", csv_path, "Write the per-repetition CSV here");
    run->add_option("--dump-transcript", dump_path, "Write session transcripts (JSONL) here");

    std::string only;
    CLI::App* verify = app.add_subcommand("verify", "Run the acceptance battery");
    verify->add_option("--only", only, "Run a single criterion by name");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (run->parsed()) return do_run(config_path, seed, reps, csv_path, dump_path);
    return qkd::verify_main(only, std::cout);
}
