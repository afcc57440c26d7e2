#include "qkd/quantum.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qkd {

namespace {
double g_born_bias = 0.0;
}

void set_born_bias(double bias) { g_born_bias = bias; }
double born_bias() { return g_born_bias; }

QubitState make_state(Basis basis, int bit) {
    if (bit != 0 && bit != 1)
        throw std::invalid_argument("make_state: bit must be 0 or 1");
    const double c = std::cos(basis.theta() / 2.0);
    const double s = std::sin(basis.theta() / 2.0);
    return bit == 0 ? QubitState{c, s} : QubitState{-s, c};
}

double outcome_prob(const QubitState& state, Basis basis, int bit) {
    const QubitState e = make_state(basis, bit);
    const double ip = e.a_plus * state.a_plus + e.a_minus * state.a_minus;
    return ip * ip;
}

double outcome_prob(const DensityOp& rho, Basis basis, int bit) {
    const QubitState e = make_state(basis, bit);
    const double v[2] = {e.a_plus, e.a_minus};
    // trace(rho |e><e|) = <e| rho |e>
    double p = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) p += v[i] * rho.m[i][j] * v[j];
    return p;
}

std::pair<int, QubitState> measure(const QubitState& state, Basis basis, Rng& rng) {
    const double p0 = outcome_prob(state, basis, 0) + g_born_bias;
    const int bit = rng.real() < p0 ? 0 : 1;
    return {bit, make_state(basis, bit)};
}

double DensityOp::min_eigenvalue() const {
    const double half_tr = trace() / 2.0;
    const double d = (m[0][0] - m[1][1]) / 2.0;
    const double disc = std::sqrt(d * d + m[0][1] * m[1][0]);
    return half_tr - disc;
}

bool DensityOp::is_valid(double tol) const {
    if (std::abs(trace() - 1.0) >= tol) return false;
    if (std::abs(m[0][1] - m[1][0]) >= tol) return false;
    return min_eigenvalue() >= -tol;
}

DensityOp density_of_ensemble(const std::vector<std::pair<QubitState, double>>& members) {
    double wsum = 0.0;
    for (const auto& [state, w] : members) {
        if (w < 0.0)
            throw std::invalid_argument("density_of_ensemble: negative weight");
        wsum += w;
    }
    if (std::abs(wsum - 1.0) > 1e-9)
        throw std::invalid_argument("density_of_ensemble: weights must sum to 1");

    DensityOp rho{{{{0.0, 0.0}, {0.0, 0.0}}}};
    for (const auto& [state, w] : members) {
        const double v[2] = {state.a_plus, state.a_minus};
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) rho.m[i][j] += w * v[i] * v[j];
    }
    return rho;
}

bool density_equal(const DensityOp& a, const DensityOp& b, double tol) {
    double worst = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            worst = std::max(worst, std::abs(a.m[i][j] - b.m[i][j]));
    return worst <= tol;
}

BellPair make_bell_pair() {
    const double r = 1.0 / std::sqrt(2.0);
    return BellPair{{r, 0.0, 0.0, -r}};
}

PairOutcome measure_pair(const BellPair& pair, int site, Basis basis, Rng& rng) {
    if (site != 1 && site != 2)
        throw std::invalid_argument("measure_pair: site must be 1 or 2");

    // Coefficient layout: coeffs[2*a + b] with a the site-1 z-index and
    // b the site-2 z-index.
    auto amp = [&](int a, int b) { return pair.coeffs[2 * a + b]; };

    // Unnormalized conditional amplitude of the *other* particle after
    // projecting the measured site onto |basis, outcome>.
    auto conditional = [&](int outcome, double out[2]) {
        const QubitState e = make_state(basis, outcome);
        const double ev[2] = {e.a_plus, e.a_minus};
        for (int k = 0; k < 2; ++k) {
            out[k] = site == 1 ? ev[0] * amp(0, k) + ev[1] * amp(1, k)
                               : ev[0] * amp(k, 0) + ev[1] * amp(k, 1);
        }
    };

    double phi0[2], phi1[2];
    conditional(0, phi0);
    conditional(1, phi1);
    const double p0 = phi0[0] * phi0[0] + phi0[1] * phi0[1];

    const int bit = rng.real() < p0 ? 0 : 1;
    const double* phi = bit == 0 ? phi0 : phi1;
    const double norm = std::sqrt(phi[0] * phi[0] + phi[1] * phi[1]);
    return {bit, QubitState{phi[0] / norm, phi[1] / norm}};
}

DensityOp reduced_density(const BellPair& pair, int site) {
    if (site != 1 && site != 2)
        throw std::invalid_argument("reduced_density: site must be 1 or 2");
    auto amp = [&](int a, int b) { return pair.coeffs[2 * a + b]; };
    DensityOp rho{{{{0.0, 0.0}, {0.0, 0.0}}}};
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int t = 0; t < 2; ++t)
                rho.m[i][j] += site == 2 ? amp(t, i) * amp(t, j)
                                         : amp(i, t) * amp(j, t);
    return rho;
}

}  // namespace qkd
