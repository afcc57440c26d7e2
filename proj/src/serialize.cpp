#include "qkd/serialize.hpp"

#include <cstdio>

namespace qkd {

namespace {

nlohmann::json thetas_of(const std::vector<Basis>& bases) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& b : bases) arr.push_back(b.theta());
    return arr;
}

}  // namespace

nlohmann::json to_json(const SessionTranscript& s) {
    nlohmann::json records = nlohmann::json::array();
    for (const auto& rec : s.eve_records)
        records.push_back({{"position", rec.position},
                           {"round", rec.round},
                           {"theta", rec.meas_theta},
                           {"outcome", rec.outcome}});
    return {{"scheme", to_string(s.scheme)},
            {"eve", s.eve_kind},
            {"round", s.round},
            {"m", s.alice_bits.size()},
            {"alice_bases", thetas_of(s.alice_bases)},
            {"bob_bases", thetas_of(s.bob_bases)},
            {"alice_bits", bits_to_string(s.alice_bits)},
            {"bob_bits", bits_to_string(s.bob_bits)},
            {"sifted_indices", s.sifted_indices},
            {"disclosed_indices", s.disclosed_indices},
            {"kept_indices", s.kept_indices},
            {"qber_estimate", s.qber_estimate},
            {"aborted", s.aborted},
            {"net_key", bits_to_string(s.net_key)},
            {"residual_errors", s.residual_errors},
            {"classical", s.classical.to_json()},
            {"eve_records", std::move(records)}};
}

nlohmann::json to_json(const RoundStats& r) {
    return {{"round", r.round},
            {"raw", r.raw},
            {"sifted", r.sifted},
            {"disclosed", r.disclosed},
            {"net", r.net},
            {"residual_errors", r.residual_errors},
            {"qber_estimate", r.qber_estimate},
            {"aborted", r.aborted}};
}

nlohmann::json to_json(const KeyLedger& l) {
    nlohmann::json rounds = nlohmann::json::array();
    for (const auto& r : l.rounds) rounds.push_back(to_json(r));
    nlohmann::json j{{"scheme", to_string(l.scheme)},
                     {"secret_consumed", l.secret_consumed},
                     {"reserved_for_next_bases", l.reserved_for_next_bases},
                     {"raw_produced", l.raw_produced},
                     {"sifted", l.sifted},
                     {"disclosed", l.disclosed},
                     {"net_key_bits", l.net_key_bits},
                     {"residual_errors", l.residual_errors},
                     {"discard_fraction", l.discard_fraction()},
                     {"rounds", std::move(rounds)}};
    if (auto r = l.net_per_secret_bit()) j["net_per_secret_bit"] = *r;
    else j["net_per_secret_bit"] = nullptr;
    return j;
}

nlohmann::json to_json(const TestReport& t) {
    return {{"test", t.test_name}, {"statistic", t.statistic}, {"p_value", t.p_value},
            {"alpha", t.alpha},   {"reject", t.reject},       {"n_samples", t.n_samples}};
}

nlohmann::json to_json(const AccountingRow& row) {
    nlohmann::json j{{"scheme", to_string(row.scheme)},
                     {"ledgers", row.ledgers},
                     {"raw", row.raw},
                     {"sifted", row.sifted},
                     {"disclosed", row.disclosed},
                     {"net", row.net},
                     {"secret_consumed", row.secret_consumed},
                     {"discard_fraction", row.discard_fraction}};
    if (row.net_per_secret_bit) j["net_per_secret_bit"] = *row.net_per_secret_bit;
    else j["net_per_secret_bit"] = nullptr;
    return j;
}

nlohmann::json to_json(const AttackReport& rep) {
    nlohmann::json j{{"strategy", rep.strategy},
                     {"n_records", rep.n_records},
                     {"qber", rep.qber},
                     {"eve_bit_agreement", rep.eve_bit_agreement},
                     {"posterior_prior", rep.posterior_prior}};
    if (rep.mi_estimate_bits) j["mi_estimate_bits"] = *rep.mi_estimate_bits;
    else j["mi_estimate_bits"] = nullptr;
    if (rep.posterior_max_deviation) j["posterior_max_deviation"] = *rep.posterior_max_deviation;
    else j["posterior_max_deviation"] = nullptr;
    return j;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

std::string csv_header() { return "scheme,eve,m,N,qber,sifted_fraction,net_key_bits,aborted\n"; }

std::string csv_row(const std::string& scheme, const std::string& eve, std::size_t m,
                    std::size_t rounds, double qber, double sifted_fraction,
                    std::size_t net_key_bits, bool aborted) {
    std::string row;
    row += scheme;
    row += ',';
    row += eve;
    row += ',';
    row += std::to_string(m);
    row += ',';
    row += std::to_string(rounds);
    row += ',';
    row += format_fixed(qber);
    row += ',';
    row += format_fixed(sifted_fraction);
    row += ',';
    row += std::to_string(net_key_bits);
    row += ',';
    row += aborted ? "true" : "false";
    row += '\n';
    return row;
}

}  // namespace qkd
