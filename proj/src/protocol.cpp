#include "qkd/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <utility>

namespace qkd {

const char* to_string(Scheme s) {
    switch (s) {
        case Scheme::simple: return "simple";
        case Scheme::bb84: return "bb84";
        case Scheme::nopab: return "nopab";
    }
    return "?";
}

std::optional<Scheme> scheme_from_string(const std::string& s) {
    if (s == "simple") return Scheme::simple;
    if (s == "bb84") return Scheme::bb84;
    if (s == "nopab") return Scheme::nopab;
    return std::nullopt;
}

BasisSequence make_basis_sequence(Bits bits) {
    for (auto b : bits)
        if (b != 0 && b != 1)
            throw std::invalid_argument("make_basis_sequence: bits must be 0 or 1");
    BasisSequence seq;
    seq.bits = std::move(bits);
    return seq;
}

BasisSequence random_basis_sequence(std::size_t m, Rng& rng) {
    BasisSequence seq;
    seq.bits = random_bits(m, rng);
    return seq;
}

void ProtocolParams::validate() const {
    if (m < 1) throw std::invalid_argument("ProtocolParams: m must be >= 1");
    if (rounds < 1) throw std::invalid_argument("ProtocolParams: rounds must be >= 1");
    if (!(check_fraction >= 0.0 && check_fraction < 1.0))
        throw std::invalid_argument("ProtocolParams: check_fraction must be in [0, 1)");
    if (!(qber_abort_threshold >= 0.0 && qber_abort_threshold <= 1.0))
        throw std::invalid_argument("ProtocolParams: qber_abort_threshold must be in [0, 1]");
    if (!(pa_compression > 0.0 && pa_compression <= 1.0))
        throw std::invalid_argument("ProtocolParams: pa_compression must be in (0, 1]");
    if (!(noise_p >= 0.0 && noise_p <= 1.0))
        throw std::invalid_argument("ProtocolParams: noise_p must be in [0, 1]");
    if (!(shared_axis_theta >= 0.0 && shared_axis_theta < pi))
        throw std::invalid_argument("ProtocolParams: shared_axis_theta must be in [0, pi)");
}

// ---- pipeline stages ----

std::vector<QubitState> alice_encode(const BasisSequence& bases, const Bits& key_bits) {
    if (bases.status == SequenceStatus::retired) throw SequenceRetiredError();
    if (key_bits.size() != bases.size())
        throw std::invalid_argument("alice_encode: key length != bases length");
    std::vector<QubitState> out;
    out.reserve(key_bits.size());
    for (std::size_t i = 0; i < key_bits.size(); ++i) {
        if (key_bits[i] != 0 && key_bits[i] != 1)
            throw std::invalid_argument("alice_encode: key bits must be 0 or 1");
        out.push_back(make_state(bases.basis_at(i), key_bits[i]));
    }
    return out;
}

Bits bob_measure(const BasisSequence& bases, const std::vector<QubitState>& carriers, Rng& rng) {
    if (bases.status == SequenceStatus::retired) throw SequenceRetiredError();
    if (carriers.size() != bases.size())
        throw std::invalid_argument("bob_measure: carrier count != bases length");
    Bits out(carriers.size());
    for (std::size_t i = 0; i < carriers.size(); ++i)
        out[i] = static_cast<std::uint8_t>(measure(carriers[i], bases.basis_at(i), rng).first);
    return out;
}

SiftResult sift(const std::vector<Basis>& alice_bases, const std::vector<Basis>& bob_bases,
                const Bits& alice_bits, const Bits& bob_bits) {
    const std::size_t n = alice_bases.size();
    if (bob_bases.size() != n || alice_bits.size() != n || bob_bits.size() != n)
        throw std::invalid_argument("sift: input length mismatch");
    SiftResult r;
    for (std::size_t i = 0; i < n; ++i) {
        if (alice_bases[i] == bob_bases[i]) {
            r.indices.push_back(i);
            r.alice.push_back(alice_bits[i]);
            r.bob.push_back(bob_bits[i]);
        }
    }
    return r;
}

ErrorCheckResult error_check(const Bits& a_bits, const Bits& b_bits, double check_fraction,
                             ClassicalTranscript& transcript, Rng& rng,
                             std::optional<std::size_t> round) {
    const std::size_t n = a_bits.size();
    if (b_bits.size() != n) throw std::invalid_argument("error_check: length mismatch");
    if (!(check_fraction >= 0.0 && check_fraction < 1.0))
        throw std::invalid_argument("error_check: check_fraction must be in [0, 1)");
    ErrorCheckResult res;
    if (n == 0) return res;

    const std::size_t k =
        std::min(n, static_cast<std::size_t>(std::ceil(check_fraction * static_cast<double>(n))));

    // Choose k distinct positions by partial Fisher-Yates, then report
    // them in ascending order.
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < k; ++i)
        std::swap(idx[i], idx[i + rng.index(n - i)]);
    res.disclosed_indices.assign(idx.begin(), idx.begin() + k);
    std::sort(res.disclosed_indices.begin(), res.disclosed_indices.end());

    std::vector<bool> disclosed(n, false);
    std::size_t mismatches = 0;
    Bits revealed;
    revealed.reserve(k);
    for (std::size_t i : res.disclosed_indices) {
        disclosed[i] = true;
        revealed.push_back(b_bits[i]);
        mismatches += (a_bits[i] != b_bits[i]);
    }
    res.qber_estimate = k == 0 ? 0.0 : static_cast<double>(mismatches) / static_cast<double>(k);
    for (std::size_t i = 0; i < n; ++i) {
        if (disclosed[i]) continue;
        res.kept_a.push_back(a_bits[i]);
        res.kept_b.push_back(b_bits[i]);
    }

    nlohmann::json payload{{"indices", res.disclosed_indices},
                           {"bits", bits_to_string(revealed)}};
    if (round) payload["round"] = *round;
    announce(transcript, "bob", "check-bits", std::move(payload));
    return res;
}

ToeplitzHash::ToeplitzHash(std::size_t out_bits, std::size_t in_bits, Bits diagonals)
    : out_bits_(out_bits), in_bits_(in_bits), diag_(std::move(diagonals)) {
    if (out_bits_ < 1 || in_bits_ < 1)
        throw std::invalid_argument("ToeplitzHash: dimensions must be >= 1");
    if (diag_.size() != out_bits_ + in_bits_ - 1)
        throw std::invalid_argument("ToeplitzHash: need out+in-1 diagonal bits");
    for (auto b : diag_)
        if (b != 0 && b != 1)
            throw std::invalid_argument("ToeplitzHash: diagonal bits must be 0 or 1");
}

ToeplitzHash ToeplitzHash::from_seed(std::size_t out_bits, std::size_t in_bits,
                                     std::uint64_t seed) {
    Rng rng(seed);
    return ToeplitzHash(out_bits, in_bits, random_bits(out_bits + in_bits - 1, rng));
}

Bits ToeplitzHash::apply(const Bits& input) const {
    if (input.size() != in_bits_)
        throw std::invalid_argument("ToeplitzHash::apply: input length mismatch");
    const std::size_t n = in_bits_;
    const std::size_t k = out_bits_;

    // Row i read left to right is the reversed diagonal vector starting
    // at offset k-1-i, so each output bit is the parity of a shifted
    // AND against the packed input. Word-parallel; O(k * n/64).
    const std::size_t n_words = (n + 63) / 64;
    std::vector<std::uint64_t> in_w(n_words, 0);
    for (std::size_t j = 0; j < n; ++j)
        if (input[j]) in_w[j >> 6] |= 1ull << (j & 63);

    const std::size_t rev_len = n + k - 1;
    std::vector<std::uint64_t> rev_w((rev_len + 63) / 64 + 1, 0);
    for (std::size_t t = 0; t < rev_len; ++t)
        if (diag_[rev_len - 1 - t]) rev_w[t >> 6] |= 1ull << (t & 63);

    Bits out(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::size_t s = k - 1 - i;
        const std::size_t q = s >> 6;
        const unsigned r = static_cast<unsigned>(s & 63);
        std::uint64_t acc = 0;
        for (std::size_t w = 0; w < n_words; ++w) {
            std::uint64_t window = rev_w[q + w] >> r;
            if (r != 0) window |= rev_w[q + w + 1] << (64 - r);
            acc ^= window & in_w[w];
        }
        out[i] = static_cast<std::uint8_t>(std::popcount(acc) & 1u);
    }
    return out;
}

Bits privacy_amplify(const Bits& bits, double pa_compression, std::uint64_t seed) {
    if (!(pa_compression > 0.0 && pa_compression <= 1.0))
        throw std::invalid_argument("privacy_amplify: pa_compression must be in (0, 1]");
    const std::size_t n = bits.size();
    const std::size_t k = std::min(
        n, static_cast<std::size_t>(std::floor(pa_compression * static_cast<double>(n))));
    if (k == 0) return {};
    return ToeplitzHash::from_seed(k, n, seed).apply(bits);
}

// ---- session runners ----

namespace {

std::vector<Basis> bases_from_bits(const Bits& bits) {
    std::vector<Basis> out;
    out.reserve(bits.size());
    for (auto b : bits) out.push_back(b ? Basis::x() : Basis::z());
    return out;
}

struct RoundData {
    std::size_t round = 0;
    std::vector<Basis> alice_bases;
    std::vector<Basis> bob_bases;
    Bits alice_bits;
    Bits bob_bits;
};

// Draws the pre-transmission randomness of one round. Draw order:
// simple/nopab: Alice's key bits; bb84: Alice's basis bits, Alice's key
// bits, Bob's basis bits.
RoundData make_round(const ProtocolParams& params, Scheme scheme, std::size_t round,
                     BasisSequence* bases, Rng& rng) {
    RoundData rd;
    rd.round = round;
    switch (scheme) {
        case Scheme::simple: {
            const Basis axis(params.shared_axis_theta);
            rd.alice_bases.assign(params.m, axis);
            rd.bob_bases = rd.alice_bases;
            rd.alice_bits = random_bits(params.m, rng);
            break;
        }
        case Scheme::bb84: {
            rd.alice_bases = bases_from_bits(random_bits(params.m, rng));
            rd.alice_bits = random_bits(params.m, rng);
            rd.bob_bases = bases_from_bits(random_bits(params.m, rng));
            break;
        }
        case Scheme::nopab: {
            if (bases->status == SequenceStatus::retired) throw SequenceRetiredError();
            if (bases->size() != params.m)
                throw std::invalid_argument("run_nopab: bases sequence length != m");
            bases->status = SequenceStatus::in_use;
            ++bases->use_count;
            rd.alice_bases.reserve(params.m);
            for (std::size_t i = 0; i < params.m; ++i)
                rd.alice_bases.push_back(bases->basis_at(i));
            rd.bob_bases = rd.alice_bases;
            rd.alice_bits = random_bits(params.m, rng);
            break;
        }
    }
    return rd;
}

// Transmits one round of carriers. Draw order per carrier: Eve's tap
// (if any), the noise coin, the noise replacement state (if the coin
// hit), Bob's measurement.
void send_round(const ProtocolParams& params, RoundData& rd, EveSession* eve,
                ClassicalTranscript& log, Rng& rng) {
    QuantumChannel ch;
    ch.noise_p = params.noise_p;
    if (eve != nullptr) {
        eve->begin_round(rd.round, rd.alice_bases);
        ch.tap = eve->tap();
    }
    const std::size_t m = rd.alice_bits.size();
    rd.bob_bits.resize(m);
    for (std::size_t i = 0; i < m; ++i) {
        const QubitState sent = make_state(rd.alice_bases[i], rd.alice_bits[i]);
        const QubitState arrived = transmit(sent, ch, rng);
        rd.bob_bits[i] =
            static_cast<std::uint8_t>(measure(arrived, rd.bob_bases[i], rng).first);
    }
    announce(log, "alice", "carriers", {{"round", rd.round}, {"count", m}});
}

// Runs the classical tail of one round: basis announcement and sifting
// (bb84 only), error estimation, verdict, privacy amplification. Draw
// order: error-check subset, then the amplification seed.
SessionTranscript finish_round(const ProtocolParams& params, Scheme scheme, RoundData&& rd,
                               const EveStrategy& eve, ClassicalTranscript& log, Rng& rng) {
    SessionTranscript s;
    s.scheme = scheme;
    s.eve_kind = to_string(eve.kind);
    s.round = rd.round;
    s.alice_bases = std::move(rd.alice_bases);
    s.bob_bases = std::move(rd.bob_bases);
    s.alice_bits = std::move(rd.alice_bits);
    s.bob_bits = std::move(rd.bob_bits);

    Bits sifted_a;
    Bits sifted_b;
    if (scheme == Scheme::bb84) {
        for (std::size_t i = 0; i < s.alice_bases.size(); ++i)
            announce(log, "both", "basis",
                     {{"round", s.round},
                      {"position", i},
                      {"alice", s.alice_bases[i] == Basis::x() ? 1 : 0},
                      {"bob", s.bob_bases[i] == Basis::x() ? 1 : 0}});
        SiftResult sr = sift(s.alice_bases, s.bob_bases, s.alice_bits, s.bob_bits);
        s.sifted_indices = std::move(sr.indices);
        sifted_a = std::move(sr.alice);
        sifted_b = std::move(sr.bob);
    } else {
        // One shared axis (simple) or the secret sequence (nopab):
        // bases always match, every position survives.
        s.sifted_indices.resize(s.alice_bits.size());
        for (std::size_t i = 0; i < s.alice_bits.size(); ++i) s.sifted_indices[i] = i;
        sifted_a = s.alice_bits;
        sifted_b = s.bob_bits;
    }

    if (scheme == Scheme::simple) {
        // The one-basis scheme has no disclosure stage; the error rate
        // is taken over the full string (simulator-side omniscient
        // comparison) and the raw bits are the key.
        const std::size_t errs = hamming_distance(sifted_a, sifted_b);
        s.qber_estimate =
            sifted_a.empty() ? 0.0
                             : static_cast<double>(errs) / static_cast<double>(sifted_a.size());
        s.aborted = s.qber_estimate > params.qber_abort_threshold;
        announce(log, "alice", "verdict",
                 {{"round", s.round}, {"qber", s.qber_estimate}, {"abort", s.aborted}});
        if (!s.aborted) {
            s.kept_indices = s.sifted_indices;
            s.net_key = s.alice_bits;
            s.residual_errors = errs;
        }
        return s;
    }

    ErrorCheckResult ec =
        error_check(sifted_a, sifted_b, params.check_fraction, log, rng, s.round);
    for (std::size_t rel : ec.disclosed_indices)
        s.disclosed_indices.push_back(s.sifted_indices[rel]);
    {
        std::vector<bool> drop(s.sifted_indices.size(), false);
        for (std::size_t rel : ec.disclosed_indices) drop[rel] = true;
        for (std::size_t rel = 0; rel < s.sifted_indices.size(); ++rel)
            if (!drop[rel]) s.kept_indices.push_back(s.sifted_indices[rel]);
    }
    s.qber_estimate = ec.qber_estimate;
    s.aborted = s.qber_estimate > params.qber_abort_threshold;
    announce(log, "alice", "verdict",
             {{"round", s.round}, {"qber", s.qber_estimate}, {"abort", s.aborted}});
    if (s.aborted) {
        s.kept_indices.clear();
        return s;
    }

    const std::uint64_t pa_seed = rng.raw();
    announce(log, "alice", "pa-seed", {{"round", s.round}, {"seed", pa_seed}});
    s.net_key = privacy_amplify(ec.kept_a, params.pa_compression, pa_seed);
    s.residual_errors = hamming_distance(ec.kept_a, ec.kept_b);
    return s;
}

RoundStats stats_of(const SessionTranscript& s) {
    RoundStats row;
    row.round = s.round;
    row.raw = s.alice_bits.size();
    row.sifted = s.sifted_indices.size();
    row.disclosed = s.disclosed_indices.size();
    row.net = s.net_key.size();
    row.residual_errors = s.residual_errors;
    row.qber_estimate = s.qber_estimate;
    row.aborted = s.aborted;
    return row;
}

ClassicalTranscript entries_for_round(const ClassicalTranscript& log, std::size_t round) {
    ClassicalTranscript out;
    for (const auto& e : log.entries()) {
        const auto it = e.payload.find("round");
        if (it != e.payload.end() && it->is_number_unsigned() &&
            it->get<std::size_t>() == round)
            out.append(e.sender, e.kind, e.payload);
    }
    return out;
}

BatchResult run_rounds(const ProtocolParams& params, Scheme scheme, BasisSequence* bases,
                       const EveStrategy& eve, Rng& rng) {
    params.validate();
    if (eve.kind == EveKind::intercept_true_basis && !eve.basis_granted)
        throw std::logic_error("intercept_true_basis requires an explicit basis grant");

    BatchResult out;
    out.ledger.scheme = scheme;
    EveSession session(eve);
    EveSession* tap = eve.taps_carriers() ? &session : nullptr;

    if (!params.delay_verdicts) {
        for (std::size_t r = 0; r < params.rounds; ++r) {
            RoundData rd = make_round(params, scheme, r, bases, rng);
            send_round(params, rd, tap, out.channel_log, rng);
            SessionTranscript s =
                finish_round(params, scheme, std::move(rd), eve, out.channel_log, rng);
            out.sessions.push_back(std::move(s));
            if (out.sessions.back().aborted) break;
        }
    } else {
        // Delayed-steps countermeasure: every carrier of the batch is
        // transmitted before any classical step happens, so an abort in
        // an early round is announced only after the last round's
        // carriers are gone.
        std::vector<RoundData> pending;
        pending.reserve(params.rounds);
        for (std::size_t r = 0; r < params.rounds; ++r) {
            pending.push_back(make_round(params, scheme, r, bases, rng));
            send_round(params, pending.back(), tap, out.channel_log, rng);
        }
        for (auto& rd : pending)
            out.sessions.push_back(
                finish_round(params, scheme, std::move(rd), eve, out.channel_log, rng));
    }

    std::vector<EveRecord> records = session.take_records();
    for (auto& s : out.sessions) {
        for (const auto& rec : records)
            if (rec.round == s.round) s.eve_records.push_back(rec);
        s.classical = entries_for_round(out.channel_log, s.round);
    }

    for (const auto& s : out.sessions) {
        out.ledger.rounds.push_back(stats_of(s));
        if (s.aborted) continue;
        out.ledger.raw_produced += s.alice_bits.size();
        out.ledger.sifted += s.sifted_indices.size();
        out.ledger.disclosed += s.disclosed_indices.size();
        out.ledger.net_key_bits += s.net_key.size();
        out.ledger.residual_errors += s.residual_errors;
    }
    out.ledger.secret_consumed = scheme == Scheme::nopab ? params.m : 0;
    out.ledger.reserved_for_next_bases =
        std::min<std::size_t>(params.reserve_for_bases, out.ledger.net_key_bits);
    return out;
}

SessionTranscript run_single(const ProtocolParams& params, Scheme scheme, BasisSequence* bases,
                             const EveStrategy& eve, Rng& rng) {
    ProtocolParams single = params;
    single.rounds = 1;
    BatchResult batch = run_rounds(single, scheme, bases, eve, rng);
    return std::move(batch.sessions.front());
}

}  // namespace

SessionTranscript run_simple_scheme(const ProtocolParams& params, Basis shared_axis,
                                    const EveStrategy& eve, Rng& rng) {
    ProtocolParams p = params;
    p.shared_axis_theta = shared_axis.theta();
    return run_single(p, Scheme::simple, nullptr, eve, rng);
}

SessionTranscript run_bb84(const ProtocolParams& params, const EveStrategy& eve, Rng& rng) {
    return run_single(params, Scheme::bb84, nullptr, eve, rng);
}

SessionTranscript run_nopab(const ProtocolParams& params, BasisSequence& bases,
                            const EveStrategy& eve, Rng& rng) {
    return run_single(params, Scheme::nopab, &bases, eve, rng);
}

BatchResult expand_key(const ProtocolParams& params, BasisSequence& bases,
                       const EveStrategy& eve, Rng& rng) {
    return run_rounds(params, Scheme::nopab, &bases, eve, rng);
}

BatchResult run_batch(const ProtocolParams& params, const EveStrategy& eve, Rng& rng) {
    if (params.scheme == Scheme::nopab) {
        params.validate();
        BasisSequence seq = random_basis_sequence(params.m, rng);
        return expand_key(params, seq, eve, rng);
    }
    return run_rounds(params, params.scheme, nullptr, eve, rng);
}

Bits publish_ciphertext(const Bits& key, const Bits& message, BasisSequence& bases,
                        ClassicalTranscript& transcript) {
    if (bases.status == SequenceStatus::retired) throw SequenceRetiredError();
    if (message.size() > key.size())
        throw std::invalid_argument("publish_ciphertext: message longer than key");
    Bits prefix(key.begin(), key.begin() + static_cast<std::ptrdiff_t>(message.size()));
    Bits ct = xor_bits(prefix, message);
    announce(transcript, "alice", "ciphertext",
             {{"bits", bits_to_string(ct)}, {"length", ct.size()}});
    bases.status = SequenceStatus::retired;
    return ct;
}

}  // namespace qkd
