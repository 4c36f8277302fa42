#ifndef GPACFORGE_VERIFY_HPP
#define GPACFORGE_VERIFY_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "gpacforge/io.hpp"

namespace gpacforge::verify {

struct PropertyResult {
    std::string name;
    bool pass = false;
    std::string detail;  // max observed error vs bound, counts, timings
    double seconds = 0;
};

struct SuiteResult {
    std::string suite;
    std::uint64_t seed = 0;
    std::vector<PropertyResult> properties;

    bool pass() const {
        for (const auto& p : properties)
            if (!p.pass) return false;
        return true;
    }
    Json to_json() const;
};

/// Suites driven by `verify`: gadgets, real-step, emulate, recognize,
/// solver-order. Each check pins its tolerance from the contracts; the
/// report carries the observed extremes.
std::vector<std::string> suite_names();
SuiteResult run_suite(const std::string& name, std::uint64_t seed, bool parallel);

/// Conformance report for one gadget over its input grid: per-point max
/// error vs e^-mu (the gadget-test command). The grid spans [lo, hi] with
/// `points` samples; mus lists the accuracy exponents to test.
Json gadget_conformance(const std::string& gadget, std::uint64_t seed, bool parallel,
                        int points = 20, double lo = -2.0, double hi = 2.0,
                        std::vector<int> mus = {1, 2, 5, 10, 20});
std::vector<std::string> gadget_names();

/// Batch of identical solver runs, serial vs OpenMP; checks bit-identical
/// endpoints and reports the timing ratio.
Json bench_solver(int runs);

}  // namespace gpacforge::verify

#endif
