#pragma once

// Reproduction suite: one result per acceptance criterion, each carrying the
// measured values and the tolerance it was judged against.

#include <iosfwd>
#include <string>
#include <vector>

namespace insmkt {

struct CriterionResult {
    std::string id;
    std::string description;
    bool passed = false;
    std::string detail;
    double seconds = 0.0;
};

/// Runs every criterion in order. When `progress` is non-null each result is
/// printed there as soon as it is known.
std::vector<CriterionResult> run_acceptance(std::ostream* progress = nullptr);

/// Single-line rendering: "PASS  A1  description  [detail]  (0.01 s)".
std::string format_result(const CriterionResult& r);

}  // namespace insmkt
