#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace aoimec {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Fast self-contained invariant suite over the whole pipeline: action
// repair, allocation caps, AoI bounds and aging, budget compliance,
// determinism, water-filling stationarity, dueling identifiability,
// checkpoint round trips, exploration schedule and target-sync staleness.
std::vector<CheckResult> run_invariant_checks(std::uint64_t seed);

}  // namespace aoimec
