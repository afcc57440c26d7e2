// Alice/Bob state machines for the three schemes:
//
//   simple — both sides share one secret encoding axis; every carrier is
//            encoded and measured along it.
//   bb84   — independent random Z/X choices per side, public basis
//            announcement after all carriers arrive, sifting keeps the
//            matched half.
//   nopab  — a pre-shared secret bit sequence selects Z/X per position on
//            both sides; nothing about bases is announced and every
//            position enters the key pipeline.
//
// Shared tail for bb84/nopab: error estimate on a random disclosed
// subset, abort above threshold, Toeplitz privacy amplification.
// Reconciliation is deliberately absent: undisclosed mismatches from a
// below-threshold noisy run are counted as residual errors, not repaired.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "qkd/adversary.hpp"
#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class Scheme { simple, bb84, nopab };

const char* to_string(Scheme s);
std::optional<Scheme> scheme_from_string(const std::string& s);

// Thrown when an operation is asked to consume a retired bases sequence.
struct SequenceRetiredError : std::runtime_error {
    SequenceRetiredError() : std::runtime_error("bases sequence is retired") {}
};

enum class SequenceStatus { fresh, in_use, retired };

// The pre-shared secret sequence of the nopab scheme: bit 0 selects Z,
// bit 1 selects X. Lifecycle is fresh -> in_use (repeatedly) -> retired;
// retirement happens when a ciphertext encrypted with key derived from
// this sequence is published, and is permanent.
struct BasisSequence {
    Bits bits;
    SequenceStatus status = SequenceStatus::fresh;
    std::size_t use_count = 0;

    std::size_t size() const { return bits.size(); }
    Basis basis_at(std::size_t i) const { return bits[i] ? Basis::x() : Basis::z(); }
};

BasisSequence make_basis_sequence(Bits bits);
BasisSequence random_basis_sequence(std::size_t m, Rng& rng);

struct ProtocolParams {
    Scheme scheme = Scheme::nopab;
    std::size_t m = 1000;      // carriers per round
    std::size_t rounds = 1;    // N
    double check_fraction = 0.1;
    double qber_abort_threshold = 0.11;
    double pa_compression = 0.9;
    std::uint64_t seed = 1;
    double noise_p = 0.0;
    double shared_axis_theta = 0.0;  // simple scheme only
    // Countermeasure to the indirect attack: withhold every classical
    // step (check bits, verdicts) until all carriers of the batch have
    // been transmitted.
    bool delay_verdicts = false;
    // Net-key bits earmarked as the next bases sequence instead of being
    // spent; recorded in the ledger.
    std::size_t reserve_for_bases = 0;

    // Throws std::invalid_argument naming the offending field.
    void validate() const;
};

// Full record of one protocol round. Index vectors refer to original
// carrier positions.
struct SessionTranscript {
    Scheme scheme = Scheme::nopab;
    std::string eve_kind = "none";
    std::size_t round = 0;
    std::vector<Basis> alice_bases;
    std::vector<Basis> bob_bases;
    Bits alice_bits;
    Bits bob_bits;
    std::vector<std::size_t> sifted_indices;
    std::vector<std::size_t> disclosed_indices;
    std::vector<std::size_t> kept_indices;  // sifted minus disclosed
    double qber_estimate = 0.0;
    bool aborted = false;
    Bits net_key;  // after privacy amplification; empty when aborted
    std::size_t residual_errors = 0;
    ClassicalTranscript classical;
    std::vector<EveRecord> eve_records;

    double sifted_fraction() const {
        return alice_bits.empty() ? 0.0
                                  : static_cast<double>(sifted_indices.size()) /
                                        static_cast<double>(alice_bits.size());
    }
};

struct RoundStats {
    std::size_t round = 0;
    std::size_t raw = 0;
    std::size_t sifted = 0;
    std::size_t disclosed = 0;
    std::size_t net = 0;
    std::size_t residual_errors = 0;
    double qber_estimate = 0.0;
    bool aborted = false;
};

// Key accounting across a batch. Cumulative counters cover completed
// (non-aborted) rounds; the per-round rows record everything executed.
struct KeyLedger {
    Scheme scheme = Scheme::nopab;
    std::size_t secret_consumed = 0;
    std::size_t reserved_for_next_bases = 0;
    std::vector<RoundStats> rounds;
    std::size_t raw_produced = 0;
    std::size_t sifted = 0;
    std::size_t disclosed = 0;
    std::size_t net_key_bits = 0;
    std::size_t residual_errors = 0;

    // Fraction of raw bits lost to sifting.
    double discard_fraction() const {
        return raw_produced == 0
                   ? 0.0
                   : static_cast<double>(raw_produced - sifted) / static_cast<double>(raw_produced);
    }
    std::optional<double> net_per_secret_bit() const {
        if (secret_consumed == 0) return std::nullopt;
        return static_cast<double>(net_key_bits) / static_cast<double>(secret_consumed);
    }
};

// ---- pipeline stages ----

// Position i carries the eigenstate of (Z if bases.bits[i]==0 else X)
// selected by key_bits[i].
std::vector<QubitState> alice_encode(const BasisSequence& bases, const Bits& key_bits);

// Measures carrier i along the basis selected by bases.bits[i].
Bits bob_measure(const BasisSequence& bases, const std::vector<QubitState>& carriers, Rng& rng);

struct SiftResult {
    std::vector<std::size_t> indices;
    Bits alice;
    Bits bob;
};

// Retains exactly the positions where the two basis strings agree.
SiftResult sift(const std::vector<Basis>& alice_bases, const std::vector<Basis>& bob_bases,
                const Bits& alice_bits, const Bits& bob_bits);

struct ErrorCheckResult {
    double qber_estimate = 0.0;
    Bits kept_a;
    Bits kept_b;
    std::vector<std::size_t> disclosed_indices;  // positions within the input arrays
};

// Discloses a uniformly random subset of ceil(check_fraction * n)
// positions: Bob's bits there go onto the public transcript, the
// mismatch fraction becomes the error estimate, and the disclosed
// positions are dropped from both keys.
ErrorCheckResult error_check(const Bits& a_bits, const Bits& b_bits, double check_fraction,
                             ClassicalTranscript& transcript, Rng& rng,
                             std::optional<std::size_t> round = std::nullopt);

// k x n binary Toeplitz matrix stored by diagonals: entry (i, j) is
// diagonals[i - j + n - 1].
class ToeplitzHash {
public:
    ToeplitzHash(std::size_t out_bits, std::size_t in_bits, Bits diagonals);
    static ToeplitzHash from_seed(std::size_t out_bits, std::size_t in_bits, std::uint64_t seed);

    Bits apply(const Bits& input) const;

    std::size_t out_bits() const { return out_bits_; }
    std::size_t in_bits() const { return in_bits_; }
    const Bits& diagonals() const { return diag_; }

private:
    std::size_t out_bits_;
    std::size_t in_bits_;
    Bits diag_;
};

// Compresses to floor(pa_compression * n) bits through a seeded Toeplitz
// hash. Deterministic in (bits, seed).
Bits privacy_amplify(const Bits& bits, double pa_compression, std::uint64_t seed);

// ---- session runners ----

SessionTranscript run_simple_scheme(const ProtocolParams& params, Basis shared_axis,
                                    const EveStrategy& eve, Rng& rng);

SessionTranscript run_bb84(const ProtocolParams& params, const EveStrategy& eve, Rng& rng);

// One nopab round consuming `bases` (use_count += 1).
SessionTranscript run_nopab(const ProtocolParams& params, BasisSequence& bases,
                            const EveStrategy& eve, Rng& rng);

struct BatchResult {
    std::vector<SessionTranscript> sessions;
    KeyLedger ledger;
    // The full public channel log of the batch, in event order across
    // rounds. Each session also carries its own round's entries.
    ClassicalTranscript channel_log;
};

// Runs params.rounds nopab rounds reusing the same bases sequence
// bit-for-bit (exactly the reuse whose safety the density-operator
// argument establishes). Stops early if a round aborts, unless
// delay_verdicts defers all classical steps past the last carrier.
BatchResult expand_key(const ProtocolParams& params, BasisSequence& bases,
                       const EveStrategy& eve, Rng& rng);

// Scheme dispatch for batch experiments; the nopab path draws a fresh
// random bases sequence from rng first.
BatchResult run_batch(const ProtocolParams& params, const EveStrategy& eve, Rng& rng);

// One-time-pad encryption of `message` with a prefix of `key`. The
// ciphertext goes onto the public transcript and the bases sequence that
// produced the key is retired: a cryptogram leaks key bits, key bits
// plus Eve's stored records leak bases bits.
Bits publish_ciphertext(const Bits& key, const Bits& message, BasisSequence& bases,
                        ClassicalTranscript& transcript);

}  // namespace qkd
