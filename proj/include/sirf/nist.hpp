#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sirf/stats.hpp"

namespace sirf {

// Seven-test subset of the NIST SP 800-22 battery, sized for the short
// bitstrings a PUF produces: Frequency, Block Frequency, Cumulative Sums,
// Runs, Longest Run of Ones, Approximate Entropy, Serial.
struct NistParams {
    double alpha = 0.01;
    uint32_t block_m = 128;  // Block Frequency block length
    uint32_t apen_m = 4;     // Approximate Entropy block length
    uint32_t serial_m = 5;   // Serial block length
};

struct NistTestResult {
    std::string name;
    std::vector<double> p_values;  // some tests emit two
    bool pass = false;
    bool skipped = false;
    std::string note;  // skip reason
};

std::vector<NistTestResult> nist_battery_single(const Bits& bits, const NistParams& params);

// Individual tests (p-values); exposed for validation against the published
// worked examples.
double nist_frequency(const Bits& bits);
double nist_block_frequency(const Bits& bits, uint32_t m);
void nist_cumulative_sums(const Bits& bits, double& p_forward, double& p_backward);
double nist_runs(const Bits& bits);
double nist_longest_run(const Bits& bits);
double nist_approximate_entropy(const Bits& bits, uint32_t m);
void nist_serial(const Bits& bits, uint32_t m, double& p1, double& p2);

struct NistPopulationTest {
    std::string name;
    uint32_t passed = 0;
    uint32_t failed = 0;
    uint32_t skipped = 0;
    uint32_t required = 0;  // ceil(0.92 * n)
    bool verdict = false;
};

struct NistPopulationResult {
    uint32_t n_devices = 0;
    std::vector<NistPopulationTest> tests;
    bool all_pass = false;
};

// Population rule: a test passes when at least ceil(0.92 * n) devices pass it
// (23 of 25). A device that is too short for a test is recorded as skipped
// and does not count as passing.
NistPopulationResult nist_battery(const std::vector<Bits>& per_device, const NistParams& params);

}  // namespace sirf
