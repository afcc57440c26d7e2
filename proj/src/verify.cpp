#include "qkd/verify.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <utility>

#include "qkd/analysis.hpp"
#include "qkd/protocol.hpp"
#include "qkd/scenario.hpp"

namespace qkd {

namespace {

std::string fmt(double v, int decimals = 4) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string fmt_g(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

using Outcome = std::pair<bool, std::string>;

// 1. Exact five-carrier round trip (bases 0,1,1,0,1 / bits 1,0,1,0,1
// must come back bit-for-bit under every seed), then 20 seeded
// noiseless sessions at m=10^4 with zero mismatches, all inside 1 s.
Outcome criterion_round_trip() {
    const auto t0 = std::chrono::steady_clock::now();
    const Bits bases{0, 1, 1, 0, 1};
    const Bits bits{1, 0, 1, 0, 1};
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        BasisSequence seq = make_basis_sequence(bases);
        Rng rng(seed);
        const auto carriers = alice_encode(seq, bits);
        if (bob_measure(seq, carriers, rng) != bits)
            return {false, "five-carrier sequence mismatched at seed " + std::to_string(seed)};
    }

    std::size_t mismatches = 0;
    bool estimates_zero = true;
    ProtocolParams p;
    p.scheme = Scheme::nopab;
    p.m = 10000;
    for (std::uint64_t rep = 0; rep < 20; ++rep) {
        Rng rng = Rng::derived(0xA11CE, rep);
        BasisSequence seq = random_basis_sequence(p.m, rng);
        const SessionTranscript s = run_nopab(p, seq, EveStrategy::none(), rng);
        mismatches += hamming_distance(s.alice_bits, s.bob_bits);
        estimates_zero = estimates_zero && s.qber_estimate == 0.0;
    }
    const double dt = seconds_since(t0);
    const bool ok = mismatches == 0 && estimates_zero && dt < 1.0;
    return {ok, "5-carrier exact x200, mismatches " + std::to_string(mismatches) +
                    "/200000, " + fmt(dt, 2) + "s < 1s"};
}

// 2. The uniform Z ensemble and the uniform X ensemble (and uniform
// ensembles over random axes) all have density operator I/2 within
// 1e-12 entrywise.
Outcome criterion_density_identity() {
    const DensityOp half = DensityOp::maximally_mixed();
    auto mix_of = [](Basis b) {
        return density_of_ensemble(
            {{make_state(b, 0), 0.5}, {make_state(b, 1), 0.5}});
    };
    double worst = 0.0;
    auto gap = [&](const DensityOp& rho) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                worst = std::max(worst, std::abs(rho.m[i][j] - half.m[i][j]));
    };
    gap(mix_of(Basis::z()));
    gap(mix_of(Basis::x()));
    Rng rng(0xD05E);
    for (int k = 0; k < 100; ++k) gap(mix_of(Basis(rng.real() * pi)));
    return {worst <= 1e-12, "max |rho - I/2| entry = " + fmt_g(worst) + " <= 1e-12"};
}

// 3. Ten measurement axes, 100 seeded two-sample runs at n=10^5 per arm
// and alpha=0.01 reject at most 3 times; basis inference over recorded
// intercept outcomes returns the prior to 1e-12. Budget 30 s.
Outcome criterion_indistinguishability() {
    const auto t0 = std::chrono::steady_clock::now();
    int rejects = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
        const Basis meas(static_cast<double>(rep % 10) * pi / 10.0);
        Rng rng = Rng::derived(0x1D57, rep);
        rejects += distinguish_ensembles(100000, meas, 0.01, rng).reject;
    }

    double worst = 0.0;
    const EveStrategy strategies[] = {EveStrategy::intercept_random_zx(),
                                      EveStrategy::intercept_fixed(Basis::z())};
    for (std::uint64_t k = 0; k < 2; ++k) {
        ProtocolParams p;
        p.scheme = Scheme::nopab;
        p.m = 100;
        p.rounds = 10;
        p.delay_verdicts = true;  // keep transmitting past aborting rounds
        Rng rng = Rng::derived(0xBA5E5, k);
        BasisSequence seq = random_basis_sequence(p.m, rng);
        const BatchResult batch = expand_key(p, seq, strategies[k], rng);
        std::vector<EveRecord> records;
        for (const auto& s : batch.sessions)
            records.insert(records.end(), s.eve_records.begin(), s.eve_records.end());
        const auto sets = rearrange_records(records, p.m, p.rounds);
        for (const double prior : {0.5, 0.25, 0.9})
            for (const auto& set : sets)
                worst = std::max(worst, std::abs(infer_basis(set, prior) - prior));
    }
    const double dt = seconds_since(t0);
    const bool ok = rejects <= 3 && worst <= 1e-12 && dt < 30.0;
    return {ok, std::to_string(rejects) + "/100 rejects (<=3), max |posterior-prior| = " +
                    fmt_g(worst) + ", " + fmt(dt, 1) + "s < 30s"};
}

// 4. Plug-in mutual information between Eve's recorded outcomes and the
// true basis bits stays at/below 0.01 bits over 10^5 records, for both
// intercept strategies against the secret-bases scheme.
Outcome criterion_eve_information() {
    const EveStrategy strategies[] = {EveStrategy::intercept_fixed(Basis::z()),
                                      EveStrategy::intercept_random_zx()};
    std::string detail;
    bool ok = true;
    for (std::uint64_t k = 0; k < 2; ++k) {
        ProtocolParams p;
        p.scheme = Scheme::nopab;
        p.m = 10000;
        p.rounds = 10;
        p.delay_verdicts = true;
        Rng rng = Rng::derived(0xE7E1, k);
        BasisSequence seq = random_basis_sequence(p.m, rng);
        const BatchResult batch = expand_key(p, seq, strategies[k], rng);
        std::vector<std::pair<int, int>> pairs;
        pairs.reserve(p.m * p.rounds);
        for (const auto& s : batch.sessions)
            for (const auto& rec : s.eve_records)
                pairs.emplace_back(rec.outcome,
                                   s.alice_bases[rec.position] == Basis::x() ? 1 : 0);
        const double mi = mutual_information(pairs);
        ok = ok && pairs.size() == 100000 && mi <= 0.01;
        if (!detail.empty()) detail += ", ";
        detail += std::string(to_string(strategies[k].kind)) + " MI=" + fmt_g(mi);
    }
    return {ok, detail + " bits <= 0.01"};
}

// 5. QBER fingerprints at m=10^4: random-ZX interception of bb84 leaves
// 0.25 +/- 0.013 on the sifted key; fixed-Z interception of nopab
// leaves 0.25 +/- 0.013; an offset interceptor on the one-basis scheme
// leaves 2cos^2(d/2)sin^2(d/2) +/- 3 sigma for offset d=0.1.
Outcome criterion_qber_signatures() {
    ProtocolParams p;
    p.m = 10000;

    p.scheme = Scheme::bb84;
    Rng rng1 = Rng::derived(0x51F7ED, 1);
    const SessionTranscript s1 = run_bb84(p, EveStrategy::intercept_random_zx(), rng1);
    std::size_t errs = 0;
    for (std::size_t i : s1.sifted_indices) errs += s1.alice_bits[i] != s1.bob_bits[i];
    const double q1 = static_cast<double>(errs) / static_cast<double>(s1.sifted_indices.size());

    p.scheme = Scheme::nopab;
    Rng rng2 = Rng::derived(0x51F7ED, 2);
    BasisSequence seq = random_basis_sequence(p.m, rng2);
    const SessionTranscript s2 =
        run_nopab(p, seq, EveStrategy::intercept_fixed(Basis::z()), rng2);
    const double q2 = qber(s2.alice_bits, s2.bob_bits);

    p.scheme = Scheme::simple;
    const double axis = 0.3;
    const double offset = 0.1;
    Rng rng3 = Rng::derived(0x51F7ED, 3);
    const SessionTranscript s3 = run_simple_scheme(
        p, Basis(axis), EveStrategy::intercept_fixed(Basis(axis + offset)), rng3);
    const double q3 = qber(s3.alice_bits, s3.bob_bits);
    const double expected3 = 2.0 * std::pow(std::cos(offset / 2.0), 2.0) *
                             std::pow(std::sin(offset / 2.0), 2.0);
    const double tol3 =
        3.0 * std::sqrt(expected3 * (1.0 - expected3) / static_cast<double>(p.m));

    const bool ok = std::abs(q1 - 0.25) <= 0.013 && std::abs(q2 - 0.25) <= 0.013 &&
                    std::abs(q3 - expected3) <= tol3;
    return {ok, "bb84+random_zx " + fmt(q1) + " (0.25±0.013), nopab+fixed_z " + fmt(q2) +
                    " (0.25±0.013), simple+offset " + fmt(q3, 5) + " (" + fmt(expected3, 5) +
                    "±" + fmt(tol3, 5) + ")"};
}

// 6. bb84 discards about half its raw data (0.5 +/- 0.015 at m=10^4),
// the secret-bases scheme discards exactly nothing, and ten rounds of
// reuse at m=10^3 produce more net key than the secret bits consumed.
Outcome criterion_accounting() {
    ProtocolParams p;
    p.scheme = Scheme::bb84;
    p.m = 10000;
    Rng rng1 = Rng::derived(0xACC7, 1);
    const SessionTranscript s1 = run_bb84(p, EveStrategy::none(), rng1);
    const double frac = s1.sifted_fraction();

    p.scheme = Scheme::nopab;
    Rng rng2 = Rng::derived(0xACC7, 2);
    BasisSequence seq2 = random_basis_sequence(p.m, rng2);
    const SessionTranscript s2 = run_nopab(p, seq2, EveStrategy::none(), rng2);
    const bool no_discard = s2.sifted_indices.size() == p.m;

    ProtocolParams pe;
    pe.scheme = Scheme::nopab;
    pe.m = 1000;
    pe.rounds = 10;
    Rng rng3 = Rng::derived(0xACC7, 3);
    BasisSequence seq3 = random_basis_sequence(pe.m, rng3);
    const BatchResult batch = expand_key(pe, seq3, EveStrategy::none(), rng3);
    const auto ratio = batch.ledger.net_per_secret_bit();

    const bool ok = std::abs(frac - 0.5) <= 0.015 && no_discard && ratio && *ratio > 1.0;
    return {ok, "bb84 sifted fraction " + fmt(frac) + " (0.5±0.015), nopab discard " +
                    std::to_string(p.m - s2.sifted_indices.size()) +
                    ", net/secret = " + fmt(ratio ? *ratio : 0.0, 2) + " > 1"};
}

// 7. An adversary holding the bases sequence reads every bit and causes
// zero errors: the compromise is undetectable in-protocol.
Outcome criterion_known_basis() {
    ProtocolParams p;
    p.scheme = Scheme::nopab;
    p.m = 4000;
    Rng rng = Rng::derived(0xC0B, 0);
    BasisSequence seq = random_basis_sequence(p.m, rng);
    const SessionTranscript s = run_nopab(p, seq, EveStrategy::intercept_true_basis(), rng);
    const KnownBasisAttackResult res = known_basis_attack(s);
    const bool ok = res.agreement == 1.0 && res.qber_induced == 0.0 && !s.aborted;
    return {ok, "agreement " + fmt(res.agreement, 6) + ", induced QBER " +
                    fmt(res.qber_induced, 6) + ", aborted " + (s.aborted ? "yes" : "no")};
}

// 8. A revealed plaintext bit moves the basis posterior to exactly 2/3,
// and a published ciphertext retires its bases sequence for good.
Outcome criterion_plaintext_leakage() {
    EveRecord rec;
    rec.position = 0;
    rec.round = 0;
    rec.meas_theta = pi / 2.0;  // Eve measured X
    rec.outcome = 0;
    const double posterior_x = 1.0 - bayes_update_with_plaintext(rec, 0, 0.5);
    const bool bayes_ok = std::abs(posterior_x - 2.0 / 3.0) <= 1e-12;

    ProtocolParams p;
    p.scheme = Scheme::nopab;
    p.m = 200;
    Rng rng = Rng::derived(0xC1F, 0);
    BasisSequence seq = random_basis_sequence(p.m, rng);
    const SessionTranscript s = run_nopab(p, seq, EveStrategy::none(), rng);
    ClassicalTranscript log;
    const Bits message = random_bits(32, rng);
    publish_ciphertext(s.net_key, message, seq, log);
    bool retired_enforced = seq.status == SequenceStatus::retired;
    try {
        Rng rng2 = Rng::derived(0xC1F, 1);
        (void)run_nopab(p, seq, EveStrategy::none(), rng2);
        retired_enforced = false;
    } catch (const SequenceRetiredError&) {
        // expected: a retired sequence must never encode again
    }
    return {bayes_ok && retired_enforced,
            "P(X|bit,outcome) - 2/3 = " + fmt_g(posterior_x - 2.0 / 3.0) +
                ", retired sequence rejected: " + (retired_enforced ? "yes" : "no")};
}

// 9. Guessing the n-bit sequence through the abort oracle costs ~2^n
// tries (mean within 3 sigma over 10^3 experiments for n=4,8,12); with
// classical steps delayed, one blind guess per batch succeeds with
// probability 2^-n (n=8, 10^5 batches, 3 sigma).
Outcome criterion_indirect_cost() {
    std::string detail;
    bool ok = true;
    for (const std::size_t n : {std::size_t{4}, std::size_t{8}, std::size_t{12}}) {
        const std::size_t experiments = 1000;
        Rng data = Rng::derived(0x1D1E, n);
        Rng guesser = Rng::derived(0x6E55, n);
        double total = 0.0;
        bool all_succeeded = true;
        for (std::size_t k = 0; k < experiments; ++k) {
            const Bits truth = random_bits(n, data);
            const IndirectAttackResult res =
                indirect_attack_trials(truth, guesser, (1ull << n) * 64);
            all_succeeded = all_succeeded && res.succeeded;
            total += static_cast<double>(res.trials);
        }
        const double mean = total / static_cast<double>(experiments);
        const double p = std::pow(2.0, -static_cast<double>(n));
        const double expected = 1.0 / p;
        const double sigma_mean =
            std::sqrt((1.0 - p) / (p * p) / static_cast<double>(experiments));
        ok = ok && all_succeeded && std::abs(mean - expected) <= 3.0 * sigma_mean;
        detail += "n=" + std::to_string(n) + " mean " + fmt(mean, 1) + " (" + fmt(expected, 0) +
                  "±" + fmt(3.0 * sigma_mean, 1) + "); ";
    }

    const std::size_t n = 8;
    const std::size_t batches = 100000;
    Rng data = Rng::derived(0xB11D, 0);
    Rng guesser = Rng::derived(0xB11D, 1);
    std::size_t successes = 0;
    for (std::size_t k = 0; k < batches; ++k) {
        const Bits truth = random_bits(n, data);
        successes += indirect_blind_batch_succeeds(truth, guesser);
    }
    const double p = 1.0 / 256.0;
    const double expected = static_cast<double>(batches) * p;
    const double sigma = std::sqrt(static_cast<double>(batches) * p * (1.0 - p));
    ok = ok && std::abs(static_cast<double>(successes) - expected) <= 3.0 * sigma;
    ok = ok && oracle_queries_per_batch(10, false) == 10 &&
         oracle_queries_per_batch(10, true) == 1;
    detail += "blind n=8: " + std::to_string(successes) + " hits (" + fmt(expected, 1) + "±" +
              fmt(3.0 * sigma, 1) + ")";
    return {ok, detail};
}

// 10. Site-2 marginals of the entangled pair are statistically
// identical whether site 1 measured Z or X (n=10^5 per arm, alpha 0.01).
Outcome criterion_no_signaling() {
    Rng rng = Rng::derived(0x5166, 0);
    const TestReport r = nosignaling_report(100000, 0.01, rng);
    return {!r.reject, "z = " + fmt_g(r.statistic) + ", p = " + fmt_g(r.p_value) +
                           " (reject iff p < 0.01)"};
}

// 11. The same (config, seed) pair produces byte-identical CSV on a
// second run.
Outcome criterion_determinism() {
    const nlohmann::json doc{{"scheme", "nopab"}, {"m", 1000}, {"repetitions", 5},
                             {"seed", 42},       {"rounds", 2}};
    const ScenarioConfig cfg = scenario_from_json(doc);
    const ScenarioResult a = run_scenario(cfg);
    const ScenarioResult b = run_scenario(cfg);
    const bool identical = a.csv == b.csv && !a.csv.empty();
    std::size_t lines = 0;
    for (const char c : a.csv) lines += c == '\n';
    return {identical && lines == 6,
            std::string("two runs byte-identical: ") + (identical ? "yes" : "no") + ", " +
                std::to_string(lines) + " CSV lines"};
}

struct Criterion {
    const char* name;
    Outcome (*fn)();
};

const Criterion kCriteria[] = {
    {"round-trip", criterion_round_trip},
    {"density-identity", criterion_density_identity},
    {"indistinguishability", criterion_indistinguishability},
    {"eve-information", criterion_eve_information},
    {"qber-signatures", criterion_qber_signatures},
    {"accounting", criterion_accounting},
    {"known-basis", criterion_known_basis},
    {"plaintext-leakage", criterion_plaintext_leakage},
    {"indirect-cost", criterion_indirect_cost},
    {"no-signaling", criterion_no_signaling},
    {"determinism", criterion_determinism},
};

}  // namespace

const std::vector<std::string>& criterion_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto& c : kCriteria) v.emplace_back(c.name);
        return v;
    }();
    return names;
}

CriterionResult run_criterion(const std::string& name) {
    for (const auto& c : kCriteria) {
        if (name != c.name) continue;
        CriterionResult r;
        r.name = name;
        const auto t0 = std::chrono::steady_clock::now();
        const Outcome out = c.fn();
        r.seconds = seconds_since(t0);
        r.passed = out.first;
        r.detail = out.second;
        return r;
    }
    throw std::invalid_argument("unknown criterion '" + name + "'");
}

int verify_main(const std::string& only, std::ostream& os) {
    std::vector<std::string> names;
    if (only.empty()) {
        names = criterion_names();
    } else {
        bool known = false;
        for (const auto& n : criterion_names()) known = known || n == only;
        if (!known) {
            os << "unknown criterion '" << only << "'; available:";
            for (const auto& n : criterion_names()) os << ' ' << n;
            os << '\n';
            return 2;
        }
        names.push_back(only);
    }

    bool all_passed = true;
    double total = 0.0;
    for (const auto& name : names) {
        const CriterionResult r = run_criterion(name);
        total += r.seconds;
        os << (r.passed ? "PASS" : "FAIL") << ' ' << r.name << ": " << r.detail << " ["
           << fmt(r.seconds, 2) << "s]\n";
        all_passed = all_passed && r.passed;
    }
    if (only.empty()) {
        const bool in_budget = total <= 60.0;
        os << (in_budget ? "PASS" : "FAIL") << " runtime-budget: battery took " << fmt(total, 1)
           << "s (<= 60s)\n";
        all_passed = all_passed && in_budget;
    }
    os << (all_passed ? "verify: all criteria passed\n" : "verify: criteria FAILED\n");
    return all_passed ? 0 : 3;
}

}  // namespace qkd
