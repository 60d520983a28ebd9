#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pubpriv::harness {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail; // measured values, targets, tolerances
};

struct VerifyReport {
    std::vector<CheckResult> checks;
    double seconds = 0.0;

    bool all_pass() const;
};

enum class VerifyLevel { fast, full };

// fast: identity, oracle-equivalence and formula-collapse checks (seconds).
// full: fast plus every Monte Carlo acceptance criterion and the statistical
// audits. Progress lines go to *progress when given.
VerifyReport verify_suite(VerifyLevel level, std::ostream* progress = nullptr);

inline constexpr int kAcceptanceCriteria = 12;

// Acceptance criteria, numbered 1..12, each with pinned parameters,
// tolerances and seeds. Criterion 12 times the two suite levels.
CheckResult run_acceptance_criterion(int k, std::ostream* progress = nullptr);

} // namespace pubpriv::harness
