// validation.hpp - randomized invariant harness behind `vnmeas validate`

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace vnmeas {

struct CheckResult {
    std::string suite;
    std::string name;
    double tolerance = 0.0;
    double observed = 0.0; // worst deviation across the randomized instances
    bool pass = false;
};

struct ValidationReport {
    std::uint64_t seed = 0;
    std::vector<std::string> suites;
    std::vector<CheckResult> checks;

    int failures() const;
};

// suite: all|povm|weakvalue|qubit|gaussian|bohmian|retro.
// inject_failure appends a deliberately failing check (harness self-test).
ValidationReport run_validation(const std::string& suite, std::uint64_t seed,
                                bool inject_failure = false);

void write_report_json(const ValidationReport& report, std::ostream& out);
void write_report_csv(const ValidationReport& report, std::ostream& out);

} // namespace vnmeas
