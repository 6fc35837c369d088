#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace rtlab {

constexpr int kCriterionCount = 18;

struct CriterionResult {
    int id = 0;
    std::string scenario;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

// Scenario that decides criterion `id` (1-based).
std::string criterion_scenario(int id);
CriterionResult run_criterion(int id, uint64_t seed = 1, int threads = 1);

}  // namespace rtlab
