// Statistics over transcripts: error rates, two-sample hypothesis tests
// (ensemble distinguishing, no-signaling), plug-in mutual information,
// key-rate accounting across schemes, and attack evaluation including
// the known-basis compromise.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qkd/adversary.hpp"
#include "qkd/bits.hpp"
#include "qkd/protocol.hpp"
#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

namespace qkd {

struct TestReport {
    std::string test_name;
    double statistic = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;  // reject <=> p_value < alpha
    std::size_t n_samples = 0;
};

// Fraction of disagreeing positions. Rejects empty or mismatched input.
double qber(const Bits& a, const Bits& b);

// Pooled two-sample z-test for equality of proportions; two-sided
// p-value via the normal approximation.
TestReport two_sample_proportion_test(const std::string& name, std::size_t successes1,
                                      std::size_t n1, std::size_t successes2, std::size_t n2,
                                      double alpha = 0.05);

// Prepares n carriers from the uniform-Z ensemble and n from the
// uniform-X ensemble, measures all of them along `meas`, and tests
// whether the outcome distributions differ. Both ensembles have density
// operator I/2, so the test should reject only at its false-positive
// rate. Requires n >= 100.
TestReport distinguish_ensembles(std::size_t n, Basis meas, double alpha, Rng& rng);

// Plug-in estimate of I(X;Y) in bits over binary pairs. Requires at
// least 1000 samples; clamped to >= 0.
double mutual_information(const std::vector<std::pair<int, int>>& records);

// One row per scheme, aggregated over that scheme's ledgers.
struct AccountingRow {
    Scheme scheme = Scheme::nopab;
    std::size_t ledgers = 0;
    std::size_t raw = 0;
    std::size_t sifted = 0;
    std::size_t disclosed = 0;
    std::size_t net = 0;
    std::size_t secret_consumed = 0;
    double discard_fraction = 0.0;
    // Net key bits per consumed pre-shared secret bit; absent when the
    // scheme consumed none (division undefined, not zero).
    std::optional<double> net_per_secret_bit;
};

std::vector<AccountingRow> accounting_report(const std::vector<KeyLedger>& ledgers);

// Entangled-pair experiment: site 2 always measures Z while site 1
// measures Z in one arm and X in the other (n pairs each). The test
// compares site 2's outcome distributions across arms; no-signaling
// says they are identical. Requires n >= 100.
TestReport nosignaling_report(std::size_t n, double alpha, Rng& rng);

// Evaluation of the compromise scenario where Eve holds the bases
// sequence: her records ARE the key, and she causes no errors.
struct KnownBasisAttackResult {
    Bits eve_key;           // Eve's outcomes in position order
    double agreement = 0.0; // fraction matching Alice's bits
    double qber_induced = 0.0;
};

KnownBasisAttackResult known_basis_attack(const SessionTranscript& session);

// Summary of what an intercepting adversary achieved across sessions.
struct AttackReport {
    std::string strategy = "none";
    std::size_t n_records = 0;
    double qber = 0.0;               // Alice-vs-Bob rate over sifted positions
    double eve_bit_agreement = 0.0;  // records matching Alice's encoded bit
    // I(Eve outcome; basis bit), present with >= 1000 records.
    std::optional<double> mi_estimate_bits;
    // Worst-case |posterior - prior| of the basis inference across
    // positions, present when the record set covers every (position,
    // round) cell (i.e. no aborted gaps).
    std::optional<double> posterior_max_deviation;
    double posterior_prior = 0.5;
};

AttackReport build_attack_report(const std::vector<SessionTranscript>& sessions);

}  // namespace qkd
