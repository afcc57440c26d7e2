#include "qkd/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace qkd {

double qber(const Bits& a, const Bits& b) {
    if (a.empty()) throw std::invalid_argument("qber: empty input");
    return static_cast<double>(hamming_distance(a, b)) / static_cast<double>(a.size());
}

TestReport two_sample_proportion_test(const std::string& name, std::size_t successes1,
                                      std::size_t n1, std::size_t successes2, std::size_t n2,
                                      double alpha) {
    if (n1 < 1 || n2 < 1)
        throw std::invalid_argument("two_sample_proportion_test: empty sample");
    if (successes1 > n1 || successes2 > n2)
        throw std::invalid_argument("two_sample_proportion_test: successes exceed sample size");
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("two_sample_proportion_test: alpha must be in (0, 1)");

    const double p1 = static_cast<double>(successes1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(successes2) / static_cast<double>(n2);
    const double pooled = static_cast<double>(successes1 + successes2) /
                          static_cast<double>(n1 + n2);
    const double var = pooled * (1.0 - pooled) *
                       (1.0 / static_cast<double>(n1) + 1.0 / static_cast<double>(n2));

    TestReport r;
    r.test_name = name;
    r.alpha = alpha;
    r.n_samples = n1 + n2;
    if (var <= 0.0) {
        // Both proportions are 0 or both are 1: no evidence of any
        // difference.
        r.statistic = 0.0;
        r.p_value = 1.0;
    } else {
        r.statistic = (p1 - p2) / std::sqrt(var);
        r.p_value = std::erfc(std::abs(r.statistic) / std::sqrt(2.0));
    }
    r.reject = r.p_value < alpha;
    return r;
}

TestReport distinguish_ensembles(std::size_t n, Basis meas, double alpha, Rng& rng) {
    if (n < 100) throw std::invalid_argument("distinguish_ensembles: need n >= 100");
    std::size_t zeros_z = 0;
    std::size_t zeros_x = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const QubitState a = make_state(Basis::z(), rng.bit());
        zeros_z += measure(a, meas, rng).first == 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const QubitState b = make_state(Basis::x(), rng.bit());
        zeros_x += measure(b, meas, rng).first == 0;
    }
    return two_sample_proportion_test("indistinguishability", zeros_z, n, zeros_x, n, alpha);
}

double mutual_information(const std::vector<std::pair<int, int>>& records) {
    if (records.size() < 1000)
        throw std::invalid_argument("mutual_information: need at least 1000 samples");
    double joint[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
    for (const auto& [x, y] : records) {
        if ((x != 0 && x != 1) || (y != 0 && y != 1))
            throw std::invalid_argument("mutual_information: values must be 0 or 1");
        joint[x][y] += 1.0;
    }
    const double n = static_cast<double>(records.size());
    double mi = 0.0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            if (joint[x][y] == 0.0) continue;
            const double pxy = joint[x][y] / n;
            const double px = (joint[x][0] + joint[x][1]) / n;
            const double py = (joint[0][y] + joint[1][y]) / n;
            mi += pxy * std::log2(pxy / (px * py));
        }
    }
    return std::max(0.0, mi);
}

std::vector<AccountingRow> accounting_report(const std::vector<KeyLedger>& ledgers) {
    if (ledgers.empty()) throw std::invalid_argument("accounting_report: no ledgers");
    std::vector<AccountingRow> rows;
    for (Scheme scheme : {Scheme::simple, Scheme::bb84, Scheme::nopab}) {
        AccountingRow row;
        row.scheme = scheme;
        for (const auto& led : ledgers) {
            if (led.scheme != scheme) continue;
            ++row.ledgers;
            row.raw += led.raw_produced;
            row.sifted += led.sifted;
            row.disclosed += led.disclosed;
            row.net += led.net_key_bits;
            row.secret_consumed += led.secret_consumed;
        }
        if (row.ledgers == 0) continue;
        row.discard_fraction =
            row.raw == 0 ? 0.0
                         : static_cast<double>(row.raw - row.sifted) / static_cast<double>(row.raw);
        if (row.secret_consumed > 0)
            row.net_per_secret_bit =
                static_cast<double>(row.net) / static_cast<double>(row.secret_consumed);
        rows.push_back(std::move(row));
    }
    return rows;
}

TestReport nosignaling_report(std::size_t n, double alpha, Rng& rng) {
    if (n < 100) throw std::invalid_argument("nosignaling_report: need n >= 100");
    std::size_t zeros_when_z = 0;
    std::size_t zeros_when_x = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const BellPair pair = make_bell_pair();
        const PairOutcome far = measure_pair(pair, 1, Basis::z(), rng);
        zeros_when_z += measure(far.remaining, Basis::z(), rng).first == 0;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const BellPair pair = make_bell_pair();
        const PairOutcome far = measure_pair(pair, 1, Basis::x(), rng);
        zeros_when_x += measure(far.remaining, Basis::z(), rng).first == 0;
    }
    return two_sample_proportion_test("no-signaling", zeros_when_z, n, zeros_when_x, n, alpha);
}

namespace {

KnownBasisAttackResult known_basis_attack_impl(const SessionTranscript& s) {
    const std::size_t m = s.alice_bits.size();
    if (s.eve_records.size() != m)
        throw std::invalid_argument("known_basis_attack: need one record per position");
    KnownBasisAttackResult r;
    r.eve_key.resize(m);
    std::vector<bool> seen(m, false);
    for (const auto& rec : s.eve_records) {
        if (rec.position >= m || seen[rec.position])
            throw std::invalid_argument("known_basis_attack: records do not cover the round");
        seen[rec.position] = true;
        r.eve_key[rec.position] = static_cast<std::uint8_t>(rec.outcome);
    }
    r.agreement = m == 0 ? 0.0
                         : 1.0 - static_cast<double>(hamming_distance(r.eve_key, s.alice_bits)) /
                                     static_cast<double>(m);
    r.qber_induced = qber(s.alice_bits, s.bob_bits);
    return r;
}

}  // namespace

KnownBasisAttackResult known_basis_attack(const SessionTranscript& session) {
    if (session.eve_kind != "intercept_true_basis")
        throw std::invalid_argument("known_basis_attack: session was not run against "
                                    "an intercept_true_basis adversary");
    return known_basis_attack_impl(session);
}

AttackReport build_attack_report(const std::vector<SessionTranscript>& sessions) {
    if (sessions.empty()) throw std::invalid_argument("build_attack_report: no sessions");
    AttackReport rep;
    rep.strategy = sessions.front().eve_kind;

    std::size_t sifted_total = 0;
    std::size_t sifted_errors = 0;
    std::size_t agree = 0;
    std::vector<std::pair<int, int>> outcome_vs_basis;
    std::vector<EveRecord> all_records;
    bool coverable = true;
    const std::size_t m = sessions.front().alice_bits.size();

    for (const auto& s : sessions) {
        if (s.eve_kind != rep.strategy)
            throw std::invalid_argument("build_attack_report: mixed adversaries");
        for (std::size_t i : s.sifted_indices) {
            ++sifted_total;
            sifted_errors += s.alice_bits[i] != s.bob_bits[i];
        }
        if (s.alice_bits.size() != m || s.eve_records.size() != m) coverable = false;
        for (const auto& rec : s.eve_records) {
            agree += rec.outcome == s.alice_bits[rec.position];
            const int basis_bit = s.alice_bases[rec.position] == Basis::x() ? 1 : 0;
            outcome_vs_basis.emplace_back(rec.outcome, basis_bit);
            all_records.push_back(rec);
        }
    }

    rep.n_records = all_records.size();
    if (sifted_total > 0)
        rep.qber = static_cast<double>(sifted_errors) / static_cast<double>(sifted_total);
    if (!all_records.empty())
        rep.eve_bit_agreement =
            static_cast<double>(agree) / static_cast<double>(all_records.size());
    if (outcome_vs_basis.size() >= 1000)
        rep.mi_estimate_bits = mutual_information(outcome_vs_basis);

    if (coverable && !all_records.empty()) {
        try {
            const auto sets = rearrange_records(all_records, m, sessions.size());
            double worst = 0.0;
            for (const auto& set : sets)
                worst = std::max(
                    worst,
                    std::abs(infer_basis(set, rep.posterior_prior) - rep.posterior_prior));
            rep.posterior_max_deviation = worst;
        } catch (const std::invalid_argument&) {
            // Records do not tile the position/round grid (e.g. rounds
            // were renumbered); the posterior probe is simply skipped.
        }
    }
    return rep;
}

}  // namespace qkd
