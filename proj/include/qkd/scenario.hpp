// Scenario runner: a self-describing JSON config selects scheme,
// adversary and sizes; `repetitions` independent batches run on seeds
// derived from (master seed, repetition index); results merge in
// repetition order, so output is byte-identical however the worker
// pool schedules them.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkd/analysis.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

// Invalid or unknown config content; the message names the offending
// field.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct OutputSpec {
    std::string csv;          // per-repetition summary table
    std::string transcripts;  // JSONL, one session per line
    std::string report;       // accounting + attack summary JSON
};

struct ScenarioConfig {
    ProtocolParams params;
    EveStrategy eve;
    std::size_t repetitions = 1;
    OutputSpec output;
};

// Parses and validates a config document. Unknown keys, wrong types and
// out-of-range values all raise ConfigError naming the field. Defaults:
// rounds 1, repetitions 1, seed 1, noise_p 0, check_fraction 0.1,
// qber_abort_threshold 0.11, pa_compression 0.9 without an adversary
// and 0.5 with one, eve {"kind": "none"}.
ScenarioConfig scenario_from_json(const nlohmann::json& doc);
ScenarioConfig load_scenario_file(const std::string& path);

struct RepSummary {
    std::size_t rep = 0;
    double mean_qber = 0.0;        // over executed rounds
    double sifted_fraction = 0.0;  // over executed rounds
    std::size_t net_key_bits = 0;  // completed rounds only
    bool aborted = false;          // any round aborted
};

struct ScenarioResult {
    ScenarioConfig config;
    std::vector<BatchResult> batches;  // one per repetition
    std::vector<RepSummary> reps;
    std::string csv;  // header + one row per repetition
    std::vector<AccountingRow> accounting;
    std::optional<AttackReport> attack;  // present when the adversary tapped
    double mean_qber = 0.0;
    double mean_sifted_fraction = 0.0;
    std::size_t net_key_bits = 0;
    std::size_t aborted_reps = 0;
};

ScenarioResult run_scenario(const ScenarioConfig& cfg);

// Writes whichever of cfg.output's paths are set. Throws
// std::runtime_error on I/O failure.
void write_outputs(const ScenarioResult& result);

}  // namespace qkd
