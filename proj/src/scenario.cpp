#include "qkd/scenario.hpp"

#include <atomic>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "qkd/serialize.hpp"

namespace qkd {

namespace {

[[noreturn]] void bad_field(const std::string& field, const std::string& why) {
    throw ConfigError(field + ": " + why);
}

void check_known_keys(const nlohmann::json& obj, const std::string& where,
                      const std::set<std::string>& known) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        if (!known.count(key))
            bad_field(where.empty() ? key : where + "." + key, "unknown field");
    }
}

template <typename T>
T get_number(const nlohmann::json& obj, const std::string& field, T fallback) {
    const auto it = obj.find(field);
    if (it == obj.end()) return fallback;
    if constexpr (std::is_same_v<T, bool>) {
        if (!it->is_boolean()) bad_field(field, "expected a boolean");
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!it->is_number()) bad_field(field, "expected a number");
    } else {
        // Accepts both unsigned-stored and signed-stored non-negative
        // integers; document writers differ on which they produce.
        const bool ok = it->is_number_unsigned() ||
                        (it->is_number_integer() && it->get<long long>() >= 0);
        if (!ok) bad_field(field, "expected a non-negative integer");
    }
    return it->get<T>();
}

EveStrategy eve_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) bad_field("eve", "expected an object");
    check_known_keys(obj, "eve", {"kind", "theta", "basis_granted", "record"});
    const auto kind_it = obj.find("kind");
    if (kind_it == obj.end() || !kind_it->is_string())
        bad_field("eve.kind", "expected a string");
    const std::string kind = kind_it->get<std::string>();

    EveStrategy eve;
    if (kind == "none") eve.kind = EveKind::none;
    else if (kind == "intercept_fixed") eve.kind = EveKind::intercept_fixed;
    else if (kind == "intercept_random_zx") eve.kind = EveKind::intercept_random_zx;
    else if (kind == "intercept_true_basis") eve.kind = EveKind::intercept_true_basis;
    else if (kind == "indirect_guess") eve.kind = EveKind::indirect_guess;
    else bad_field("eve.kind", "unknown adversary '" + kind + "'");

    eve.fixed_theta = get_number<double>(obj, "theta", 0.0);
    if (!(eve.fixed_theta >= 0.0 && eve.fixed_theta < pi))
        bad_field("eve.theta", "must be in [0, pi)");
    eve.record = get_number<bool>(obj, "record", true);
    eve.basis_granted = get_number<bool>(obj, "basis_granted", false);
    if (eve.kind == EveKind::intercept_true_basis && !eve.basis_granted)
        bad_field("eve.basis_granted", "intercept_true_basis requires an explicit grant");
    return eve;
}

OutputSpec output_from_json(const nlohmann::json& obj) {
    if (!obj.is_object()) bad_field("output", "expected an object");
    check_known_keys(obj, "output", {"csv", "transcripts", "report"});
    OutputSpec out;
    for (const auto& [key, target] :
         {std::pair<const char*, std::string*>{"csv", &out.csv},
          {"transcripts", &out.transcripts},
          {"report", &out.report}}) {
        const auto it = obj.find(key);
        if (it == obj.end()) continue;
        if (!it->is_string()) bad_field(std::string("output.") + key, "expected a string");
        *target = it->get<std::string>();
    }
    return out;
}

}  // namespace

ScenarioConfig scenario_from_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config: expected a JSON object");
    check_known_keys(doc, "",
                     {"scheme", "m", "rounds", "repetitions", "seed", "noise_p",
                      "check_fraction", "qber_abort_threshold", "pa_compression",
                      "shared_axis_theta", "delay_verdicts", "reserve_for_bases", "eve",
                      "output"});

    ScenarioConfig cfg;

    const auto scheme_it = doc.find("scheme");
    if (scheme_it == doc.end() || !scheme_it->is_string())
        bad_field("scheme", "expected one of simple|bb84|nopab");
    const auto scheme = scheme_from_string(scheme_it->get<std::string>());
    if (!scheme) bad_field("scheme", "unknown scheme '" + scheme_it->get<std::string>() + "'");
    cfg.params.scheme = *scheme;

    const auto m_it = doc.find("m");
    if (m_it == doc.end()) bad_field("m", "required");
    cfg.params.m = get_number<std::size_t>(doc, "m", 0);

    cfg.params.rounds = get_number<std::size_t>(doc, "rounds", 1);
    cfg.repetitions = get_number<std::size_t>(doc, "repetitions", 1);
    if (cfg.repetitions < 1) bad_field("repetitions", "must be >= 1");
    cfg.params.seed = get_number<std::uint64_t>(doc, "seed", 1);
    cfg.params.noise_p = get_number<double>(doc, "noise_p", 0.0);
    cfg.params.check_fraction = get_number<double>(doc, "check_fraction", 0.1);
    cfg.params.qber_abort_threshold = get_number<double>(doc, "qber_abort_threshold", 0.11);
    cfg.params.shared_axis_theta = get_number<double>(doc, "shared_axis_theta", 0.0);
    cfg.params.delay_verdicts = get_number<bool>(doc, "delay_verdicts", false);
    cfg.params.reserve_for_bases = get_number<std::size_t>(doc, "reserve_for_bases", 0);

    if (const auto it = doc.find("eve"); it != doc.end()) cfg.eve = eve_from_json(*it);

    // The default compression is defensive when an adversary is on the
    // line and generous otherwise; an explicit value always wins.
    const double default_pa = cfg.eve.kind == EveKind::none ? 0.9 : 0.5;
    cfg.params.pa_compression = get_number<double>(doc, "pa_compression", default_pa);

    if (const auto it = doc.find("output"); it != doc.end())
        cfg.output = output_from_json(*it);

    try {
        cfg.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return scenario_from_json(doc);
}

namespace {

RepSummary summarize(std::size_t rep, const BatchResult& batch) {
    RepSummary s;
    s.rep = rep;
    double qber_sum = 0.0;
    std::size_t raw = 0;
    std::size_t sifted = 0;
    for (const auto& row : batch.ledger.rounds) {
        qber_sum += row.qber_estimate;
        raw += row.raw;
        sifted += row.sifted;
        s.aborted = s.aborted || row.aborted;
    }
    if (!batch.ledger.rounds.empty())
        s.mean_qber = qber_sum / static_cast<double>(batch.ledger.rounds.size());
    if (raw > 0) s.sifted_fraction = static_cast<double>(sifted) / static_cast<double>(raw);
    s.net_key_bits = batch.ledger.net_key_bits;
    return s;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& cfg) {
    cfg.params.validate();
    ScenarioResult result;
    result.config = cfg;
    result.batches.resize(cfg.repetitions);

    // Each repetition owns the stream derived from (master seed, rep);
    // merging by index keeps the output independent of scheduling.
    auto run_rep = [&](std::size_t rep) {
        Rng rng = Rng::derived(cfg.params.seed, rep);
        result.batches[rep] = run_batch(cfg.params, cfg.eve, rng);
    };

    const std::size_t workers =
        std::min<std::size_t>({cfg.repetitions,
                               std::max<std::size_t>(1, std::thread::hardware_concurrency()), 8});
    if (workers <= 1) {
        for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) run_rep(rep);
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back([&] {
                try {
                    for (std::size_t rep = next.fetch_add(1); rep < cfg.repetitions;
                         rep = next.fetch_add(1))
                        run_rep(rep);
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                }
            });
        for (auto& t : pool) t.join();
        if (failure) std::rethrow_exception(failure);
    }

    result.csv = csv_header();
    std::vector<KeyLedger> ledgers;
    std::vector<SessionTranscript> tapped_sessions;
    for (std::size_t rep = 0; rep < cfg.repetitions; ++rep) {
        const BatchResult& batch = result.batches[rep];
        const RepSummary s = summarize(rep, batch);
        result.reps.push_back(s);
        result.csv += csv_row(to_string(cfg.params.scheme), to_string(cfg.eve.kind),
                              cfg.params.m, cfg.params.rounds, s.mean_qber, s.sifted_fraction,
                              s.net_key_bits, s.aborted);
        result.mean_qber += s.mean_qber;
        result.mean_sifted_fraction += s.sifted_fraction;
        result.net_key_bits += s.net_key_bits;
        result.aborted_reps += s.aborted;
        ledgers.push_back(batch.ledger);
        if (cfg.eve.taps_carriers())
            for (const auto& session : batch.sessions) tapped_sessions.push_back(session);
    }
    result.mean_qber /= static_cast<double>(cfg.repetitions);
    result.mean_sifted_fraction /= static_cast<double>(cfg.repetitions);
    result.accounting = accounting_report(ledgers);
    if (!tapped_sessions.empty()) {
        result.attack = build_attack_report(tapped_sessions);
        // The pooled report cannot run the basis-inference probe when
        // several repetitions reuse the same round numbers; each
        // repetition has its own secret bases, so probe per repetition
        // and report the worst deviation.
        if (!result.attack->posterior_max_deviation && cfg.repetitions > 1) {
            std::optional<double> worst;
            for (const BatchResult& batch : result.batches) {
                if (batch.sessions.empty()) continue;
                const AttackReport per = build_attack_report(batch.sessions);
                if (per.posterior_max_deviation)
                    worst = std::max(worst.value_or(0.0), *per.posterior_max_deviation);
            }
            result.attack->posterior_max_deviation = worst;
        }
    }
    return result;
}

void write_outputs(const ScenarioResult& result) {
    const OutputSpec& out = result.config.output;
    if (!out.csv.empty()) {
        std::ofstream f(out.csv, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write CSV to '" + out.csv + "'");
        f << result.csv;
    }
    if (!out.transcripts.empty()) {
        std::ofstream f(out.transcripts, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write transcripts to '" + out.transcripts + "'");
        for (std::size_t rep = 0; rep < result.batches.size(); ++rep) {
            for (const auto& session : result.batches[rep].sessions) {
                nlohmann::json line{{"rep", rep}, {"session", to_json(session)}};
                f << line.dump() << '\n';
            }
        }
    }
    if (!out.report.empty()) {
        std::ofstream f(out.report, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write report to '" + out.report + "'");
        nlohmann::json doc{{"mean_qber", result.mean_qber},
                           {"mean_sifted_fraction", result.mean_sifted_fraction},
                           {"net_key_bits", result.net_key_bits},
                           {"aborted_reps", result.aborted_reps},
                           {"accounting", nlohmann::json::array()},
                           {"ledgers", nlohmann::json::array()}};
        for (const auto& row : result.accounting) doc["accounting"].push_back(to_json(row));
        for (const auto& batch : result.batches) doc["ledgers"].push_back(to_json(batch.ledger));
        if (result.attack) doc["attack"] = to_json(*result.attack);
        f << doc.dump(2) << '\n';
    }
}

}  // namespace qkd
