// Minimal single- and two-qubit kernel: states on the x-z great circle,
// Born-rule measurement with projection, density operators of ensembles,
// and the entangled pair used for the no-signaling demonstration.
//
// Deliberate restriction: all amplitudes are real. Every state handled by
// the protocols lies in the x-z plane of the Bloch sphere, so complex
// arithmetic would buy nothing. Kept out of scope: >2 qubits, POVMs,
// non-projective evolution.

#pragma once

#include <array>
#include <cstddef>
#include <utility>
#include <vector>

#include "qkd/rng.hpp"

namespace qkd {

inline constexpr double invariant_tol = 1e-12;
inline constexpr double pi = 3.14159265358979323846;

// A measurement/encoding axis on the x-z great circle, as the angle from
// the z-axis in [0, pi). Antipodal directions are identified; the +/- bit
// label carries the orientation.
class Basis {
public:
    constexpr explicit Basis(double theta) : theta_(theta) {}
    constexpr double theta() const { return theta_; }

    static constexpr Basis z() { return Basis(0.0); }
    static constexpr Basis x() { return Basis(pi / 2.0); }

    friend bool operator==(const Basis& a, const Basis& b) {
        double d = a.theta_ - b.theta_;
        if (d < 0) d = -d;
        return d < invariant_tol;
    }
    friend bool operator!=(const Basis& a, const Basis& b) { return !(a == b); }

private:
    double theta_;
};

// Pure single-qubit state with real amplitudes in the Z eigenbasis.
struct QubitState {
    double a_plus;   // amplitude on |z+>
    double a_minus;  // amplitude on |z->

    bool is_normalized(double tol = invariant_tol) const {
        double n = a_plus * a_plus + a_minus * a_minus - 1.0;
        return (n < 0 ? -n : n) < tol;
    }
};

// 2x2 real symmetric positive-semidefinite unit-trace matrix.
struct DensityOp {
    std::array<std::array<double, 2>, 2> m;

    double trace() const { return m[0][0] + m[1][1]; }
    double min_eigenvalue() const;
    bool is_valid(double tol = invariant_tol) const;

    static DensityOp maximally_mixed() { return DensityOp{{{{0.5, 0.0}, {0.0, 0.5}}}}; }
};

// Two-qubit state with real amplitudes over {|z+z+>, |z+z->, |z-z+>, |z-z->}.
struct BellPair {
    std::array<double, 4> coeffs;
};

// Eigenstate of spin measurement along `basis`: bit 0 is the + eigenstate
// (cos(t/2), sin(t/2)), bit 1 the - eigenstate (-sin(t/2), cos(t/2)).
QubitState make_state(Basis basis, int bit);

// Born rule: |<basis,bit | state>|^2.
double outcome_prob(const QubitState& state, Basis basis, int bit);

// Born rule on a mixture: trace(rho * projector(basis, bit)).
double outcome_prob(const DensityOp& rho, Basis basis, int bit);

// Projective measurement. Consumes exactly one rng draw per call, so the
// draw order of a session is fixed by its code path.
std::pair<int, QubitState> measure(const QubitState& state, Basis basis, Rng& rng);

// Sum of w_i |psi_i><psi_i|. Rejects negative weights and weight sums
// farther than 1e-9 from one.
DensityOp density_of_ensemble(const std::vector<std::pair<QubitState, double>>& members);

// Max absolute entrywise difference at most tol.
bool density_equal(const DensityOp& a, const DensityOp& b, double tol);

// The entangled source pair used by the no-signaling experiment:
// (|z+z+> - |z-z->)/sqrt(2). In the X basis this equals
// -(|x+x-> + |x-x+>)/sqrt(2), so X outcomes anti-correlate; the reduced
// single-site operator is I/2 either way, which is what matters.
BellPair make_bell_pair();

struct PairOutcome {
    int bit;              // outcome at the measured site
    QubitState remaining; // conditional state of the other particle
};

// Measure one site of the pair (site is 1 or 2); the other particle
// collapses to the conditional state. One rng draw per call.
PairOutcome measure_pair(const BellPair& pair, int site, Basis basis, Rng& rng);

// Reduced density operator of one site of the pair (partial trace over
// the other site).
DensityOp reduced_density(const BellPair& pair, int site);

// Verification hook: skews the threshold used by measure() so that the
// acceptance battery can demonstrate it detects a corrupted Born rule.
// Set once before a run; never touched concurrently with sessions.
void set_born_bias(double bias);
double born_bias();

}  // namespace qkd
