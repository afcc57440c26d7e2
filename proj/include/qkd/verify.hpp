// Acceptance battery: eleven named criteria covering round-trip
// correctness, the density-operator identity behind basis reuse,
// statistical indistinguishability, adversary information bounds, QBER
// signatures, key accounting, the known-basis compromise, plaintext
// leakage and sequence retirement, the indirect attack's exponential
// cost, no-signaling, and byte-level determinism. Every criterion is
// seeded and self-contained; a run prints one PASS/FAIL line each.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace qkd {

struct CriterionResult {
    std::string name;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

const std::vector<std::string>& criterion_names();

// Runs one criterion by name. Throws std::invalid_argument for an
// unknown name.
CriterionResult run_criterion(const std::string& name);

// Runs the battery (or a single criterion when `only` is non-empty),
// printing one line per criterion plus, for full runs, the 60-second
// runtime budget line. Returns the process exit code: 0 all passed,
// 2 unknown criterion name, 3 at least one failure.
int verify_main(const std::string& only, std::ostream& os);

}  // namespace qkd
