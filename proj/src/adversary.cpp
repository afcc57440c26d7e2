#include "qkd/adversary.hpp"

#include <cmath>
#include <stdexcept>

namespace qkd {

const char* to_string(EveKind kind) {
    switch (kind) {
        case EveKind::none: return "none";
        case EveKind::intercept_fixed: return "intercept_fixed";
        case EveKind::intercept_random_zx: return "intercept_random_zx";
        case EveKind::intercept_true_basis: return "intercept_true_basis";
        case EveKind::indirect_guess: return "indirect_guess";
    }
    return "unknown";
}

InterceptResult tap_intercept_resend(const QubitState& carrier, Basis meas_basis, Rng& rng) {
    auto [outcome, post] = measure(carrier, meas_basis, rng);
    return {post, meas_basis.theta(), outcome};
}

void EveSession::begin_round(std::size_t round, const std::vector<Basis>& true_bases) {
    round_ = round;
    position_ = 0;
    true_bases_ = true_bases;
}

QubitState EveSession::intercept(const QubitState& carrier, Rng& rng) {
    Basis meas = Basis::z();
    switch (strategy_.kind) {
        case EveKind::intercept_fixed:
            meas = Basis(strategy_.fixed_theta);
            break;
        case EveKind::intercept_random_zx:
            meas = rng.bit() ? Basis::x() : Basis::z();
            break;
        case EveKind::intercept_true_basis:
            if (!strategy_.basis_granted)
                throw std::logic_error(
                    "intercept_true_basis requires the scenario to grant the basis sequence");
            if (position_ >= true_bases_.size())
                throw std::logic_error("intercept: no true basis for this position");
            meas = true_bases_[position_];
            break;
        default:
            throw std::logic_error("intercept called for a non-tapping strategy");
    }

    InterceptResult r = tap_intercept_resend(carrier, meas, rng);
    if (strategy_.record)
        records_.push_back({position_, round_, r.meas_theta, r.outcome});
    ++position_;
    return r.resent;
}

std::vector<PositionSet> rearrange_records(const std::vector<EveRecord>& records,
                                           std::size_t m, std::size_t n_rounds) {
    if (records.size() != m * n_rounds)
        throw std::invalid_argument("rearrange_records: records do not cover m*N cells");

    std::vector<PositionSet> sets(m);
    for (std::size_t i = 0; i < m; ++i) {
        sets[i].position = i;
        sets[i].records.resize(n_rounds);
    }
    std::vector<std::vector<bool>> seen(m, std::vector<bool>(n_rounds, false));
    for (const auto& rec : records) {
        if (rec.position >= m || rec.round >= n_rounds || seen[rec.position][rec.round])
            throw std::invalid_argument("rearrange_records: incomplete or duplicated rounds");
        seen[rec.position][rec.round] = true;
        sets[rec.position].records[rec.round] = rec;
    }
    return sets;
}

namespace {

// P(outcome | hypothesis basis) with the data bit marginalized out as
// uniform: 1/2 * sum_b |<meas,outcome | hyp,b>|^2.
double record_likelihood(const EveRecord& rec, Basis hypothesis) {
    const QubitState eigen = make_state(Basis(rec.meas_theta), rec.outcome);
    return 0.5 * (outcome_prob(eigen, hypothesis, 0) + outcome_prob(eigen, hypothesis, 1));
}

}  // namespace

double infer_basis(const PositionSet& set, double prior_z) {
    if (prior_z < 0.0 || prior_z > 1.0)
        throw std::invalid_argument("infer_basis: prior must be in [0,1]");

    double loglik_z = 0.0, loglik_x = 0.0;
    for (const auto& rec : set.records) {
        loglik_z += std::log(record_likelihood(rec, Basis::z()));
        loglik_x += std::log(record_likelihood(rec, Basis::x()));
    }
    // posterior = prior * Lz / (prior * Lz + (1 - prior) * Lx), computed
    // through the likelihood ratio for numerical range.
    const double ratio = std::exp(loglik_z - loglik_x);
    const double denom = prior_z * ratio + (1.0 - prior_z);
    if (denom == 0.0) return prior_z;
    return prior_z * ratio / denom;
}

double bayes_update_with_plaintext(const EveRecord& rec, int known_bit, double prior_z) {
    if (prior_z < 0.0 || prior_z > 1.0)
        throw std::invalid_argument("bayes_update_with_plaintext: prior must be in [0,1]");
    const Basis meas(rec.meas_theta);
    const double lik_z = outcome_prob(make_state(Basis::z(), known_bit), meas, rec.outcome);
    const double lik_x = outcome_prob(make_state(Basis::x(), known_bit), meas, rec.outcome);
    const double denom = prior_z * lik_z + (1.0 - prior_z) * lik_x;
    if (denom == 0.0) return prior_z;
    return prior_z * lik_z / denom;
}

namespace {

std::uint64_t pack_bits(const Bits& seq) {
    if (seq.empty() || seq.size() > 24)
        throw std::invalid_argument("indirect attack: sequence length must be in [1,24]");
    std::uint64_t packed = 0;
    for (std::size_t i = 0; i < seq.size(); ++i)
        packed |= static_cast<std::uint64_t>(seq[i] & 1u) << i;
    return packed;
}

}  // namespace

IndirectAttackResult indirect_attack_trials(const Bits& true_sequence, Rng& guesser,
                                            std::uint64_t max_trials) {
    const std::uint64_t target = pack_bits(true_sequence);
    const std::uint64_t mask = (1ull << true_sequence.size()) - 1ull;
    for (std::uint64_t t = 1; t <= max_trials; ++t) {
        if ((guesser.raw() & mask) == target) return {t, true};
    }
    return {max_trials, false};
}

bool indirect_blind_batch_succeeds(const Bits& true_sequence, Rng& guesser) {
    const std::uint64_t target = pack_bits(true_sequence);
    const std::uint64_t mask = (1ull << true_sequence.size()) - 1ull;
    return (guesser.raw() & mask) == target;
}

std::uint64_t oracle_queries_per_batch(std::uint64_t rounds, bool delay_verdicts) {
    return delay_verdicts ? 1 : rounds;
}

}  // namespace qkd
