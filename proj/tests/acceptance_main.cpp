// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <iostream>

#include "insmkt/acceptance.hpp"

int main() {
    const auto results = insmkt::run_acceptance(&std::cout);
    std::size_t failed = 0;
    for (const auto& r : results) failed += r.passed ? 0 : 1;
    std::cout << (results.size() - failed) << '/' << results.size() << " acceptance criteria passed\n";
    return failed == 0 ? 0 : 1;
}
