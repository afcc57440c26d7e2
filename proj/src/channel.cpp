#include "qkd/channel.hpp"

namespace qkd {

QubitState transmit(const QubitState& q, const QuantumChannel& ch, Rng& rng) {
    QubitState out = ch.tap ? ch.tap(q, rng) : q;
    // The noise coin is drawn unconditionally to keep the per-carrier
    // draw count independent of noise_p.
    const double coin = rng.real();
    if (coin < ch.noise_p) {
        const Basis random_axis(rng.real() * pi);
        out = make_state(random_axis, rng.bit());
    }
    return out;
}

std::size_t ClassicalTranscript::count_kind(const std::string& kind) const {
    std::size_t n = 0;
    for (const auto& e : entries_) n += (e.kind == kind);
    return n;
}

std::size_t ClassicalTranscript::first_index_of(const std::string& kind) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
        if (entries_[i].kind == kind) return i;
    return npos;
}

std::size_t ClassicalTranscript::last_index_of(const std::string& kind) const {
    for (std::size_t i = entries_.size(); i-- > 0;)
        if (entries_[i].kind == kind) return i;
    return npos;
}

nlohmann::json ClassicalTranscript::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& e : entries_)
        arr.push_back({{"sender", e.sender}, {"kind", e.kind}, {"payload", e.payload}});
    return arr;
}

void ClassicalTranscript::write_jsonl(std::ostream& os) const {
    for (const auto& e : entries_) {
        nlohmann::json line = {{"sender", e.sender}, {"kind", e.kind}, {"payload", e.payload}};
        os << line.dump() << '\n';
    }
}

}  // namespace qkd
