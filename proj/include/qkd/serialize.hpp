// JSON views of transcripts, ledgers and reports, plus the CSV row
// format of batch runs. All floating-point CSV fields use fixed
// 6-decimal formatting so byte-identical reruns are a testable
// property, not an accident of iostream state.

#pragma once

#include <string>

#include <json.hpp>

#include "qkd/analysis.hpp"
#include "qkd/protocol.hpp"

namespace qkd {

nlohmann::json to_json(const SessionTranscript& s);
nlohmann::json to_json(const RoundStats& r);
nlohmann::json to_json(const KeyLedger& l);
nlohmann::json to_json(const TestReport& t);
nlohmann::json to_json(const AccountingRow& row);
nlohmann::json to_json(const AttackReport& rep);

std::string format_fixed(double v);  // 6 decimals, snprintf-backed

std::string csv_header();
std::string csv_row(const std::string& scheme, const std::string& eve, std::size_t m,
                    std::size_t rounds, double qber, double sifted_fraction,
                    std::size_t net_key_bits, bool aborted);

}  // namespace qkd
