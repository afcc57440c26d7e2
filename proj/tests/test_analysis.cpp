#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <utility>
#include <vector>

#include "qkd/analysis.hpp"
#include "qkd/protocol.hpp"

using namespace qkd;

TEST_CASE("qber basics") {
    CHECK(qber({0, 1, 1, 0}, {0, 1, 1, 0}) == 0.0);
    CHECK(qber({0, 1, 1, 0}, {1, 1, 1, 1}) == 0.5);
    CHECK_THROWS_AS(qber({}, {}), std::invalid_argument);
    CHECK_THROWS_AS(qber({0, 1}, {0}), std::invalid_argument);
}

TEST_CASE("two-sample z-test against hand-computed values") {
    // 40/100 vs 60/100: pooled p = 1/2, var = 1/4 * 2/100 = 1/200,
    // z = -0.2 / sqrt(1/200) = -2 sqrt(2), p = erfc(2) = 0.0046777...
    const TestReport r = two_sample_proportion_test("hand", 40, 100, 60, 100, 0.05);
    CHECK(r.statistic == doctest::Approx(-2.0 * std::sqrt(2.0)).epsilon(1e-12));
    CHECK(r.p_value == doctest::Approx(0.0046777349810472658).epsilon(1e-10));
    CHECK(r.reject);
    CHECK(r.n_samples == 200);
    CHECK(r.test_name == "hand");

    // Same data at a stricter level: no rejection, same statistic.
    const TestReport strict = two_sample_proportion_test("hand", 40, 100, 60, 100, 0.001);
    CHECK_FALSE(strict.reject);
    CHECK(strict.statistic == r.statistic);

    // Degenerate pooled variance: identical certain outcomes are "no
    // evidence of difference", not a division by zero.
    const TestReport zeroes = two_sample_proportion_test("z", 0, 50, 0, 70);
    CHECK(zeroes.statistic == 0.0);
    CHECK(zeroes.p_value == 1.0);
    CHECK_FALSE(zeroes.reject);
    const TestReport ones = two_sample_proportion_test("o", 50, 50, 70, 70);
    CHECK(ones.p_value == 1.0);

    // A real difference is detected with power to spare.
    const TestReport power = two_sample_proportion_test("p", 500, 1000, 600, 1000, 0.01);
    CHECK(power.reject);
    CHECK(power.p_value < 1e-4);

    CHECK_THROWS_AS(two_sample_proportion_test("e", 1, 0, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(two_sample_proportion_test("e", 11, 10, 1, 10), std::invalid_argument);
    CHECK_THROWS_AS(two_sample_proportion_test("e", 1, 10, 1, 10, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(two_sample_proportion_test("e", 1, 10, 1, 10, 1.0), std::invalid_argument);
}

TEST_CASE("reject flag always mirrors p < alpha") {
    Rng rng(61);
    for (int t = 0; t < 200; ++t) {
        const std::size_t n1 = 50 + rng.index(200);
        const std::size_t n2 = 50 + rng.index(200);
        const std::size_t s1 = rng.index(n1 + 1);
        const std::size_t s2 = rng.index(n2 + 1);
        const double alpha = 0.001 + 0.5 * rng.real();
        const TestReport r = two_sample_proportion_test("prop", s1, n1, s2, n2, alpha);
        CHECK(r.reject == (r.p_value < alpha));
        CHECK(r.p_value >= 0.0);
        CHECK(r.p_value <= 1.0);
    }
}

TEST_CASE("Z and X ensembles are indistinguishable to any axis") {
    Rng rng(67);
    for (const double theta : {0.0, pi / 2.0, 1.0}) {
        const TestReport r = distinguish_ensembles(10000, Basis(theta), 0.001, rng);
        CHECK(r.n_samples == 20000);
        CHECK_FALSE(r.reject);
    }
    Rng small(1);
    CHECK_THROWS_AS(distinguish_ensembles(99, Basis::z(), 0.05, small),
                    std::invalid_argument);
}

TEST_CASE("mutual information: exact symmetric cases and guards") {
    std::vector<std::pair<int, int>> perfectly_correlated;
    std::vector<std::pair<int, int>> anti;
    std::vector<std::pair<int, int>> independent;
    for (int i = 0; i < 500; ++i) {
        perfectly_correlated.emplace_back(0, 0);
        perfectly_correlated.emplace_back(1, 1);
        anti.emplace_back(0, 1);
        anti.emplace_back(1, 0);
        independent.emplace_back(0, 0);
        independent.emplace_back(0, 1);
        independent.emplace_back(1, 0);
        independent.emplace_back(1, 1);
    }
    CHECK(mutual_information(perfectly_correlated) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mutual_information(anti) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(mutual_information(independent) == doctest::Approx(0.0).epsilon(1e-12));

    // A binary symmetric channel with crossover q has I = 1 - H2(q).
    const double q = 0.125;
    std::vector<std::pair<int, int>> bsc;
    const int flips = 1000, total = 8000;
    for (int x = 0; x < 2; ++x) {
        for (int i = 0; i < total / 2 - flips / 2; ++i) bsc.emplace_back(x, x);
        for (int i = 0; i < flips / 2; ++i) bsc.emplace_back(x, 1 - x);
    }
    const double h2 = -q * std::log2(q) - (1.0 - q) * std::log2(1.0 - q);
    CHECK(mutual_information(bsc) == doctest::Approx(1.0 - h2).epsilon(1e-12));

    // Sampled independent pairs: small but never negative.
    Rng rng(71);
    std::vector<std::pair<int, int>> sampled;
    for (int i = 0; i < 5000; ++i) sampled.emplace_back(rng.bit(), rng.bit());
    const double mi = mutual_information(sampled);
    CHECK(mi >= 0.0);
    CHECK(mi < 0.002);

    CHECK_THROWS_AS(mutual_information(std::vector<std::pair<int, int>>(999, {0, 0})),
                    std::invalid_argument);
    CHECK_THROWS_AS(mutual_information(std::vector<std::pair<int, int>>(1000, {2, 0})),
                    std::invalid_argument);
}

TEST_CASE("accounting aggregates per scheme with hand numbers") {
    KeyLedger b1;
    b1.scheme = Scheme::bb84;
    b1.raw_produced = 100;
    b1.sifted = 50;
    b1.disclosed = 5;
    b1.net_key_bits = 40;
    KeyLedger b2 = b1;
    b2.raw_produced = 200;
    b2.sifted = 100;
    b2.disclosed = 10;
    b2.net_key_bits = 80;
    KeyLedger n1;
    n1.scheme = Scheme::nopab;
    n1.raw_produced = 300;
    n1.sifted = 300;
    n1.disclosed = 30;
    n1.net_key_bits = 240;
    n1.secret_consumed = 100;

    const auto rows = accounting_report({b1, b2, n1});
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].scheme == Scheme::bb84);
    CHECK(rows[0].ledgers == 2);
    CHECK(rows[0].raw == 300);
    CHECK(rows[0].sifted == 150);
    CHECK(rows[0].disclosed == 15);
    CHECK(rows[0].net == 120);
    CHECK(rows[0].discard_fraction == doctest::Approx(0.5).epsilon(1e-12));
    CHECK_FALSE(rows[0].net_per_secret_bit.has_value());

    CHECK(rows[1].scheme == Scheme::nopab);
    CHECK(rows[1].discard_fraction == 0.0);
    REQUIRE(rows[1].net_per_secret_bit.has_value());
    CHECK(*rows[1].net_per_secret_bit == doctest::Approx(2.4).epsilon(1e-12));

    CHECK_THROWS_AS(accounting_report({}), std::invalid_argument);
}

TEST_CASE("entangled-pair marginals carry no signal") {
    Rng rng(73);
    const TestReport r = nosignaling_report(5000, 0.001, rng);
    CHECK(r.n_samples == 10000);
    CHECK_FALSE(r.reject);
    Rng small(1);
    CHECK_THROWS_AS(nosignaling_report(50, 0.05, small), std::invalid_argument);
}

TEST_CASE("known-basis compromise: synthetic and end-to-end") {
    SessionTranscript s;
    s.eve_kind = "intercept_true_basis";
    s.alice_bits = {1, 0, 1};
    s.bob_bits = {1, 0, 1};
    s.eve_records = {{2, 0, 0.0, 1}, {0, 0, 0.0, 1}, {1, 0, pi / 2.0, 0}};
    const KnownBasisAttackResult r = known_basis_attack(s);
    CHECK(r.eve_key == Bits{1, 0, 1});
    CHECK(r.agreement == 1.0);
    CHECK(r.qber_induced == 0.0);

    SessionTranscript wrong = s;
    wrong.eve_kind = "intercept_fixed";
    CHECK_THROWS_AS((void)known_basis_attack(wrong), std::invalid_argument);

    SessionTranscript gap = s;
    gap.eve_records[1] = gap.eve_records[0];  // duplicate position
    CHECK_THROWS_AS((void)known_basis_attack(gap), std::invalid_argument);

    SessionTranscript imperfect = s;
    imperfect.eve_records[0].outcome = 0;  // one wrong bit at position 2
    imperfect.bob_bits = {1, 0, 0};
    const KnownBasisAttackResult ir = known_basis_attack(imperfect);
    CHECK(ir.agreement == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(ir.qber_induced == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

    // End to end: holding the bases reads the key without a trace.
    ProtocolParams p;
    p.scheme = Scheme::nopab;
    p.m = 500;
    Rng rng(79);
    BasisSequence seq = random_basis_sequence(500, rng);
    const SessionTranscript real =
        run_nopab(p, seq, EveStrategy::intercept_true_basis(), rng);
    const KnownBasisAttackResult rr = known_basis_attack(real);
    CHECK(rr.agreement == 1.0);
    CHECK(rr.qber_induced == 0.0);
    CHECK_FALSE(real.aborted);
}

TEST_CASE("attack report for a fixed-axis tap on reused bases") {
    ProtocolParams p;
    p.scheme = Scheme::nopab;
    p.m = 1000;
    p.rounds = 2;
    p.qber_abort_threshold = 1.0;  // keep both rounds for full coverage
    Rng rng(83);
    BasisSequence seq = random_basis_sequence(1000, rng);
    const BatchResult batch = expand_key(p, seq, EveStrategy::intercept_fixed(Basis::z()), rng);
    const AttackReport rep = build_attack_report(batch.sessions);

    CHECK(rep.strategy == "intercept_fixed");
    CHECK(rep.n_records == 2000);

    // Fixed-Z interception of uniform Z/X encodings: Eve reads the bit
    // exactly on Z positions, coin-flips on X -> agreement 3/4; Bob sees
    // QBER 1/4.
    const double sigma_agree = std::sqrt(0.75 * 0.25 / 2000.0);
    CHECK(std::abs(rep.eve_bit_agreement - 0.75) < 3.0 * sigma_agree);
    const double sigma_qber = std::sqrt(0.25 * 0.75 / 2000.0);
    CHECK(std::abs(rep.qber - 0.25) < 3.0 * sigma_qber);

    // Outcomes tell nothing about basis bits, and the posterior probe
    // confirms it at machine precision.
    REQUIRE(rep.mi_estimate_bits.has_value());
    CHECK(*rep.mi_estimate_bits < 0.01);
    REQUIRE(rep.posterior_max_deviation.has_value());
    CHECK(*rep.posterior_max_deviation <= 1e-12);
    CHECK(rep.posterior_prior == 0.5);

    CHECK_THROWS_AS((void)build_attack_report({}), std::invalid_argument);
    auto mixed = batch.sessions;
    mixed[1].eve_kind = "intercept_random_zx";
    CHECK_THROWS_AS((void)build_attack_report(mixed), std::invalid_argument);
}

TEST_CASE("attack report for random Z/X interception of one-round bb84") {
    ProtocolParams p;
    p.scheme = Scheme::bb84;
    p.m = 2000;
    Rng rng(89);
    const SessionTranscript s = run_bb84(p, EveStrategy::intercept_random_zx(), rng);
    CHECK(s.aborted);  // QBER ~ 0.25 trips the 0.11 threshold
    const AttackReport rep = build_attack_report({s});
    CHECK(rep.strategy == "intercept_random_zx");
    CHECK(rep.n_records == 2000);
    const std::size_t sifted = s.sifted_indices.size();
    const double sigma = std::sqrt(0.25 * 0.75 / static_cast<double>(sifted));
    CHECK(std::abs(rep.qber - 0.25) < 3.0 * sigma);
}
