// Eve's toolkit: intercept-resend taps, record collection and
// rearrangement across reused rounds, Bayesian basis inference with and
// without plaintext side information, and the indirect sequence-guessing
// attack with its delayed-steps countermeasure.
//
// Not modeled (documented limitation): collective attacks that couple
// carriers to ancilla states held in quantum memory. The indistinguish-
// ability argument gives them the same zero information about the bases,
// but simulating them needs density-operator evolution beyond this
// kernel. Eve here always measures immediately and resends the
// post-measurement eigenstate.

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "qkd/bits.hpp"
#include "qkd/channel.hpp"
#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

namespace qkd {

enum class EveKind {
    none,
    intercept_fixed,       // measures every carrier along one axis
    intercept_random_zx,   // fresh uniform Z/X choice per carrier
    intercept_true_basis,  // compromise scenario: Eve holds the bases
    indirect_guess,        // no tap; guesses sequences via the abort oracle
};

const char* to_string(EveKind kind);

struct EveStrategy {
    EveKind kind = EveKind::none;
    double fixed_theta = 0.0;   // axis for intercept_fixed
    bool record = true;         // keep measurement records
    // intercept_true_basis is only legal when the scenario explicitly
    // grants Eve the basis sequence.
    bool basis_granted = false;

    static EveStrategy none() { return {}; }
    static EveStrategy intercept_fixed(Basis b) {
        return {EveKind::intercept_fixed, b.theta(), true, false};
    }
    static EveStrategy intercept_random_zx() {
        return {EveKind::intercept_random_zx, 0.0, true, false};
    }
    static EveStrategy intercept_true_basis() {
        return {EveKind::intercept_true_basis, 0.0, true, true};
    }

    bool taps_carriers() const {
        return kind == EveKind::intercept_fixed || kind == EveKind::intercept_random_zx ||
               kind == EveKind::intercept_true_basis;
    }
};

// One record per tapped carrier.
struct EveRecord {
    std::size_t position;  // index within the round
    std::size_t round;
    double meas_theta;
    int outcome;
};

// All of Eve's records for one carrier position, across rounds.
struct PositionSet {
    std::size_t position;
    std::vector<EveRecord> records;  // round index ascending
};

struct InterceptResult {
    QubitState resent;
    double meas_theta;
    int outcome;
};

// Eve measures the carrier along meas_basis and resends the
// post-measurement eigenstate. One rng draw.
InterceptResult tap_intercept_resend(const QubitState& carrier, Basis meas_basis, Rng& rng);

// Per-session adversary state. The protocol runners hand it each round's
// true encoding bases (used only by intercept_true_basis) and wire its
// tap into the quantum channel.
class EveSession {
public:
    explicit EveSession(EveStrategy strategy) : strategy_(strategy) {}

    const EveStrategy& strategy() const { return strategy_; }

    void begin_round(std::size_t round, const std::vector<Basis>& true_bases);

    // Intercepts the next carrier of the current round. Draw order per
    // carrier: [basis choice if random_zx], measurement.
    QubitState intercept(const QubitState& carrier, Rng& rng);

    Tap tap() {
        return [this](const QubitState& q, Rng& rng) { return intercept(q, rng); };
    }

    const std::vector<EveRecord>& records() const { return records_; }
    std::vector<EveRecord> take_records() { return std::move(records_); }

private:
    EveStrategy strategy_;
    std::size_t round_ = 0;
    std::size_t position_ = 0;
    std::vector<Basis> true_bases_;
    std::vector<EveRecord> records_;
};

// Groups N complete rounds of m records into m position sets, each
// ordered by round. Rejects record collections that do not cover every
// (position, round) cell exactly once.
std::vector<PositionSet> rearrange_records(const std::vector<EveRecord>& records,
                                           std::size_t m, std::size_t n_rounds);

// Bayesian posterior that the position's basis is Z, given Eve's
// measurement outcomes, under the model that Alice's data bits are
// uniform i.i.d. The likelihood of any outcome is 1/2 under either
// hypothesis, so the posterior equals the prior; computing it through
// the actual Born likelihoods keeps that a result, not an assumption.
double infer_basis(const PositionSet& set, double prior_z);

// Posterior after a ciphertext reveals the encoded bit: the likelihoods
// P(outcome | basis, known_bit) now differ and the posterior moves
// toward the basis whose eigenstate matches the (outcome, bit) pair.
double bayes_update_with_plaintext(const EveRecord& rec, int known_bit, double prior_z);

struct IndirectAttackResult {
    std::uint64_t trials;
    bool succeeded;
};

// Eve guesses uniformly random sequences (with replacement) against an
// abort/no-abort oracle, one guess per protocol round, until a guess
// matches or max_trials is exhausted. Desk scale: sequence length <= 24.
IndirectAttackResult indirect_attack_trials(const Bits& true_sequence, Rng& guesser,
                                            std::uint64_t max_trials);

// With the delayed-steps countermeasure the abort signal is withheld
// until every carrier of the batch has arrived, so Eve gets no oracle
// queries mid-batch and is reduced to one blind guess per batch.
bool indirect_blind_batch_succeeds(const Bits& true_sequence, Rng& guesser);

// Number of abort-oracle queries Eve can make per batch of `rounds`
// protocol rounds: `rounds` normally, 1 when the countermeasure delays
// all classical steps past the last carrier.
std::uint64_t oracle_queries_per_batch(std::uint64_t rounds, bool delay_verdicts);

}  // namespace qkd
