#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qkd/quantum.hpp"
#include "qkd/rng.hpp"

using namespace qkd;

namespace {

// Independent Born-rule oracle: raw trig, no library calls. Amplitudes
// of the eigenstate (basis theta, bit) dotted with (ap, am), squared.
double born_oracle(double ap, double am, double theta, int bit) {
    const double c = std::cos(theta / 2.0);
    const double s = std::sin(theta / 2.0);
    const double e0 = bit == 0 ? c : -s;
    const double e1 = bit == 0 ? s : c;
    const double ip = e0 * ap + e1 * am;
    return ip * ip;
}

struct BiasGuard {
    ~BiasGuard() { set_born_bias(0.0); }
};

}  // namespace

TEST_CASE("protocol encoding states have the textbook amplitudes") {
    const QubitState z0 = make_state(Basis::z(), 0);
    CHECK(z0.a_plus == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(z0.a_minus == doctest::Approx(0.0).epsilon(1e-15));
    const QubitState z1 = make_state(Basis::z(), 1);
    CHECK(z1.a_plus == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(z1.a_minus == doctest::Approx(1.0).epsilon(1e-15));

    const double r = 1.0 / std::sqrt(2.0);
    const QubitState x0 = make_state(Basis::x(), 0);
    CHECK(x0.a_plus == doctest::Approx(r).epsilon(1e-15));
    CHECK(x0.a_minus == doctest::Approx(r).epsilon(1e-15));
    const QubitState x1 = make_state(Basis::x(), 1);
    CHECK(x1.a_plus == doctest::Approx(-r).epsilon(1e-15));
    CHECK(x1.a_minus == doctest::Approx(r).epsilon(1e-15));
}

TEST_CASE("make_state rejects non-binary bits and always normalizes") {
    CHECK_THROWS_AS(make_state(Basis::z(), 2), std::invalid_argument);
    CHECK_THROWS_AS(make_state(Basis::x(), -1), std::invalid_argument);
    Rng rng(11);
    for (int k = 0; k < 500; ++k) {
        const QubitState s = make_state(Basis(rng.real() * pi), rng.bit());
        CHECK(s.is_normalized());
    }
}

TEST_CASE("outcome_prob matches the raw-trig oracle and sums to one") {
    Rng rng(22);
    for (int k = 0; k < 500; ++k) {
        const Basis prep(rng.real() * pi);
        const Basis meas(rng.real() * pi);
        const int bit = rng.bit();
        const QubitState s = make_state(prep, bit);
        const double p0 = outcome_prob(s, meas, 0);
        const double p1 = outcome_prob(s, meas, 1);
        CHECK(p0 == doctest::Approx(born_oracle(s.a_plus, s.a_minus, meas.theta(), 0))
                        .epsilon(1e-14));
        CHECK(p1 == doctest::Approx(born_oracle(s.a_plus, s.a_minus, meas.theta(), 1))
                        .epsilon(1e-14));
        CHECK(std::abs(p0 + p1 - 1.0) < 1e-12);  // Born completeness
    }
}

TEST_CASE("basis overlap follows the half-angle law") {
    for (int i = 0; i < 10; ++i) {
        for (int j = 0; j < 10; ++j) {
            const double t1 = i * pi / 10.0;
            const double t2 = j * pi / 10.0;
            const double expected = std::pow(std::cos((t1 - t2) / 2.0), 2.0);
            const double got = outcome_prob(make_state(Basis(t1), 0), Basis(t2), 0);
            CHECK(got == doctest::Approx(expected).epsilon(1e-12));
        }
    }
}

TEST_CASE("measure consumes exactly one rng draw") {
    Rng a(33);
    Rng b(33);
    (void)measure(make_state(Basis::x(), 0), Basis::z(), a);
    (void)b.raw();
    CHECK(a.raw() == b.raw());
}

TEST_CASE("measuring an eigenstate returns its bit with probability one") {
    Rng rng(44);
    for (int k = 0; k < 1000; ++k) {
        const Basis basis(rng.real() * pi);
        const int bit = rng.bit();
        const auto [got, post] = measure(make_state(basis, bit), basis, rng);
        CHECK(got == bit);
        CHECK(post.is_normalized());
    }
}

TEST_CASE("repeated measurement in the same basis is idempotent") {
    Rng rng(55);
    for (int k = 0; k < 1000; ++k) {
        const QubitState s = make_state(Basis(rng.real() * pi), rng.bit());
        const Basis meas(rng.real() * pi);
        const auto first = measure(s, meas, rng);
        const auto second = measure(first.second, meas, rng);
        CHECK(second.first == first.first);
    }
}

TEST_CASE("measurement frequencies track the Born rule") {
    // cos^2(pi/6) = 3/4 chance of outcome 0 when a Z-eigenstate tilted
    // by pi/3 is measured.
    const QubitState s = make_state(Basis(pi / 3.0), 0);
    Rng rng(66);
    const int n = 100000;
    int zeros = 0;
    for (int k = 0; k < n; ++k) zeros += measure(s, Basis::z(), rng).first == 0;
    const double freq = static_cast<double>(zeros) / n;
    const double sigma = std::sqrt(0.75 * 0.25 / n);
    CHECK(std::abs(freq - 0.75) < 3.0 * sigma);
}

TEST_CASE("density operators of uniform Z and X ensembles are both I/2") {
    const DensityOp z_mix = density_of_ensemble(
        {{make_state(Basis::z(), 0), 0.5}, {make_state(Basis::z(), 1), 0.5}});
    const DensityOp x_mix = density_of_ensemble(
        {{make_state(Basis::x(), 0), 0.5}, {make_state(Basis::x(), 1), 0.5}});
    const DensityOp half = DensityOp::maximally_mixed();
    CHECK(density_equal(z_mix, half, 1e-12));
    CHECK(density_equal(x_mix, half, 1e-12));
    CHECK(density_equal(z_mix, x_mix, 1e-12));
    CHECK(z_mix.is_valid());
    CHECK(x_mix.is_valid());

    // ... and so is the uniform ensemble over any axis.
    Rng rng(77);
    for (int k = 0; k < 50; ++k) {
        const Basis b(rng.real() * pi);
        const DensityOp rho = density_of_ensemble(
            {{make_state(b, 0), 0.5}, {make_state(b, 1), 0.5}});
        CHECK(density_equal(rho, half, 1e-12));
    }
}

TEST_CASE("a skewed ensemble is distinguishable from I/2") {
    const DensityOp rho = density_of_ensemble(
        {{make_state(Basis::z(), 0), 0.7}, {make_state(Basis::z(), 1), 0.3}});
    CHECK_FALSE(density_equal(rho, DensityOp::maximally_mixed(), 1e-12));
    CHECK(outcome_prob(rho, Basis::z(), 0) == doctest::Approx(0.7).epsilon(1e-12));
}

TEST_CASE("density_of_ensemble validates its weights") {
    CHECK_THROWS_AS(density_of_ensemble({{make_state(Basis::z(), 0), -0.1},
                                         {make_state(Basis::z(), 1), 1.1}}),
                    std::invalid_argument);
    CHECK_THROWS_AS(density_of_ensemble({{make_state(Basis::z(), 0), 0.6},
                                         {make_state(Basis::z(), 1), 0.6}}),
                    std::invalid_argument);
}

TEST_CASE("density operator eigenvalues and the Born rule on mixtures") {
    const DensityOp half = DensityOp::maximally_mixed();
    CHECK(half.min_eigenvalue() == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(outcome_prob(half, Basis(1.234), 0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(outcome_prob(half, Basis(1.234), 1) == doctest::Approx(0.5).epsilon(1e-12));

    const DensityOp pure = density_of_ensemble({{make_state(Basis(0.9), 1), 1.0}});
    CHECK(std::abs(pure.min_eigenvalue()) < 1e-12);
    CHECK(pure.is_valid());
    CHECK(pure.trace() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("bell pair coefficients and reduced states") {
    const BellPair pair = make_bell_pair();
    const double r = 1.0 / std::sqrt(2.0);
    CHECK(pair.coeffs[0] == doctest::Approx(r).epsilon(1e-15));
    CHECK(pair.coeffs[1] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pair.coeffs[2] == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(pair.coeffs[3] == doctest::Approx(-r).epsilon(1e-15));

    // Each particle alone is maximally mixed — the no-signaling core.
    CHECK(density_equal(reduced_density(pair, 1), DensityOp::maximally_mixed(), 1e-12));
    CHECK(density_equal(reduced_density(pair, 2), DensityOp::maximally_mixed(), 1e-12));
    CHECK_THROWS_AS(reduced_density(pair, 3), std::invalid_argument);
}

TEST_CASE("bell pair: Z outcomes correlate, X outcomes anti-correlate") {
    Rng rng(88);
    for (int k = 0; k < 1000; ++k) {
        const BellPair pair = make_bell_pair();
        const PairOutcome first = measure_pair(pair, 1, Basis::z(), rng);
        const int second = measure(first.remaining, Basis::z(), rng).first;
        CHECK(second == first.bit);
    }
    for (int k = 0; k < 1000; ++k) {
        const BellPair pair = make_bell_pair();
        const PairOutcome first = measure_pair(pair, 2, Basis::x(), rng);
        const int second = measure(first.remaining, Basis::x(), rng).first;
        CHECK(second == 1 - first.bit);
    }
}

TEST_CASE("bell pair marginals are unbiased and one draw is consumed") {
    Rng rng(99);
    const int n = 20000;
    int zeros = 0;
    for (int k = 0; k < n; ++k)
        zeros += measure_pair(make_bell_pair(), 1, Basis::z(), rng).bit == 0;
    const double freq = static_cast<double>(zeros) / n;
    CHECK(std::abs(freq - 0.5) < 3.0 * std::sqrt(0.25 / n));

    Rng a(7);
    Rng b(7);
    (void)measure_pair(make_bell_pair(), 1, Basis::x(), a);
    (void)b.raw();
    CHECK(a.raw() == b.raw());
    CHECK_THROWS_AS(measure_pair(make_bell_pair(), 0, Basis::z(), a),
                    std::invalid_argument);
}

TEST_CASE("born bias hook skews measurement and resets cleanly") {
    BiasGuard guard;
    CHECK(born_bias() == 0.0);
    set_born_bias(0.3);
    CHECK(born_bias() == doctest::Approx(0.3));

    // p0 becomes 0.5 + 0.3 for an X eigenstate measured along Z.
    const QubitState s = make_state(Basis::x(), 0);
    Rng rng(123);
    const int n = 20000;
    int zeros = 0;
    for (int k = 0; k < n; ++k) zeros += measure(s, Basis::z(), rng).first == 0;
    const double freq = static_cast<double>(zeros) / n;
    CHECK(std::abs(freq - 0.8) < 3.0 * std::sqrt(0.8 * 0.2 / n));

    set_born_bias(0.0);
    CHECK(born_bias() == 0.0);
}
