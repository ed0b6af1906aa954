// Runs criteria A1-A9 and prints one line per criterion. Exit status is the number of failures.
#include <cstdio>
#include <cstring>

#include "lo/harness.hpp"

int main(int argc, char** argv) {
    const bool quick = argc > 1 && std::strcmp(argv[1], "quick") == 0;
    const auto results = lo::acceptance_suite(quick ? lo::AcceptanceLevel::quick : lo::AcceptanceLevel::full);
    int failures = 0;
    for (const auto& r : results) {
        std::printf("%s %s  %s  (%.2fs)\n", r.id.c_str(), r.passed ? "PASS" : "FAIL", r.measured.c_str(), r.seconds);
        failures += !r.passed;
    }
    std::printf("%d/%zu criteria passed\n", static_cast<int>(results.size()) - failures, results.size());
    return failures;
}
