// Simulated quantum channel (optionally noisy, optionally tapped by an
// adversary hook) and the authenticated public classical channel. The
// classical channel is an append-only log by construction: Eve reads
// every entry but nothing is ever altered or removed — the standard
// authenticated-channel adversary model for classical traffic.

#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

namespace qkd {

// Adversary hook, invoked per carrier before noise. May measure and
// resend; whatever it returns continues down the channel.
using Tap = std::function<QubitState(const QubitState&, Rng&)>;

struct QuantumChannel {
    double noise_p = 0.0;  // probability of depolarizing a carrier
    Tap tap;               // empty = no adversary on the line
};

// Sends one carrier through the channel. The tap (if any) acts first;
// then with probability noise_p the carrier is replaced by a uniformly
// random basis eigenstate (theta uniform in [0, pi), bit uniform).
QubitState transmit(const QubitState& q, const QuantumChannel& ch, Rng& rng);

struct ClassicalEntry {
    std::string sender;
    std::string kind;
    nlohmann::json payload;
};

class ClassicalTranscript {
public:
    void append(std::string sender, std::string kind, nlohmann::json payload) {
        entries_.push_back({std::move(sender), std::move(kind), std::move(payload)});
    }

    const std::vector<ClassicalEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    std::size_t count_kind(const std::string& kind) const;

    // Index of the first/last entry of `kind`, or npos when absent.
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
    std::size_t first_index_of(const std::string& kind) const;
    std::size_t last_index_of(const std::string& kind) const;

    // One JSON object per line, for audit output.
    void write_jsonl(std::ostream& os) const;

    nlohmann::json to_json() const;

private:
    std::vector<ClassicalEntry> entries_;
};

inline ClassicalTranscript& announce(ClassicalTranscript& t, std::string sender,
                                     std::string kind, nlohmann::json payload) {
    t.append(std::move(sender), std::move(kind), std::move(payload));
    return t;
}

}  // namespace qkd
