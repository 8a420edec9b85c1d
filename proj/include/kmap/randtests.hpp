#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kmap/prng.hpp"

namespace kmap {

// Two-sided p-value bands:
//   Safe     0.25 < p < 0.75
//   Doubt    0.1 < p <= 0.25  or  0.75 <= p < 0.9
//   Failure  p <= 0.1         or  p >= 0.9
// Every p in [0, 1] lands in exactly one band.
enum class Region { Safe, Doubt, Failure };
std::string to_string(Region r);
Region classify_pvalue(double p);

// The stricter acceptance band used when scoring batteries:
// 1e-4 < p < 1 - 1e-4, both ends open.
bool diehard_band(double p);

struct TestResult {
    std::string name;
    double statistic = 0.0;
    double p_value = 1.0;
    std::optional<Region> region; // nullopt: an applicability gate declined the sample
    std::uint64_t n = 0;          // sample size the statistic was computed from
    std::string note;

    bool skipped() const { return !region.has_value(); }
};

// Bit-level tests take unpacked bits, one 0/1 per byte.
std::vector<std::uint8_t> unpack_bits(std::span<const std::uint32_t> words);

// Balance of ones and zeros: z = (#1 - #0)/sqrt(n), p = erfc(|z|/sqrt(2)).
// Needs at least 100 bits.
TestResult monobit(std::span<const std::uint8_t> bits);

// Count of maximal same-bit runs, compared with its expectation under
// independence. Skipped (not failed) when the sample is too unbalanced
// for the statistic to apply: |pi - 1/2| >= 2/sqrt(n).
TestResult runs_test(std::span<const std::uint8_t> bits);

// Pearson chi-square against the uniform distribution over the symbol
// counts; upper-tail p with m-1 degrees of freedom. Every expected
// count must be at least 5.
TestResult chi_square_uniform(std::span<const std::uint64_t> counts);

// Pearson correlation between the sequence and its lag-shifted self,
// mapped to a p-value through the Fisher transform
// z = atanh(r) * sqrt(pairs - 3). Constant input is degenerate.
TestResult serial_correlation(std::span<const double> values, unsigned lag);

struct WilcoxonResult {
    double statistic = 0.0; // W = min(W+, W-)
    double p_value = 1.0;   // two-sided
    bool exact = false;     // sign-flip enumeration vs normal approximation
    std::uint64_t n = 0;    // nonzero differences used
};

// Paired signed-rank test. Zero differences are dropped; ties share
// average ranks. Exact enumeration of the sign-flip distribution for up
// to 20 nonzero differences, normal approximation with tie and
// continuity corrections beyond that. All differences zero is degenerate.
WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs);
WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b);

struct TestReport {
    std::string config; // one-line description of the sample's origin
    std::vector<TestResult> results;
    unsigned safe = 0, doubt = 0, failure = 0, skipped = 0;
    unsigned diehard_pass = 0; // non-skipped results inside the strict band

    unsigned applicable() const { return safe + doubt + failure; }
};

// The six-member battery over one generated sample: monobit and runs on
// the word bits, chi-square uniformity on the symbol counts, and serial
// correlation at lags 1, 2, 3 on the symbols. Words and symbols are two
// views of the same orbit positions.
TestReport run_battery_on_sample(std::span<const std::uint32_t> words,
                                 std::span<const std::uint32_t> digits, unsigned d,
                                 const std::string& label);

// Draws `budget` positions from a fresh stream and scores them.
// budget must be at least 10^6 and at least 5 * 10^d.
TestReport run_battery(const PrngConfig& cfg, std::uint64_t budget);

// CSV schema: test,statistic,p_value,region
void write_report_csv(std::ostream& os, const TestReport& report);
std::string summarize(const TestReport& report);

} // namespace kmap
