#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace equistab {

/// One entry of the self-verification suite (see README, "verify" command).
struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

std::vector<int> criterion_ids();
std::string criterion_name(int id);

/// Runs one criterion; throws only on unknown id (scientific failures are
/// reported through pass/detail).
CriterionResult run_criterion(int id, std::uint64_t seed = 42);

std::vector<CriterionResult> run_all_criteria(std::uint64_t seed = 42);

}  // namespace equistab
