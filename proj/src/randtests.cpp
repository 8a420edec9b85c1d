#include "kmap/randtests.hpp"

#include <gsl/gsl_cdf.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

namespace kmap {

std::string to_string(Region r) {
    switch (r) {
        case Region::Safe: return "safe";
        case Region::Doubt: return "doubt";
        case Region::Failure: return "failure";
    }
    throw ValidationError("invalid region");
}

Region classify_pvalue(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("p-value must lie in [0, 1]");
    }
    if (p > 0.25 && p < 0.75) return Region::Safe;
    if ((p > 0.1 && p <= 0.25) || (p >= 0.75 && p < 0.9)) return Region::Doubt;
    return Region::Failure;
}

bool diehard_band(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
        throw ValidationError("p-value must lie in [0, 1]");
    }
    return p > 1e-4 && p < 1.0 - 1e-4;
}

std::vector<std::uint8_t> unpack_bits(std::span<const std::uint32_t> words) {
    std::vector<std::uint8_t> bits;
    bits.reserve(words.size() * 32);
    for (std::uint32_t w : words) {
        for (int b = 31; b >= 0; --b) bits.push_back(static_cast<std::uint8_t>((w >> b) & 1u));
    }
    return bits;
}

TestResult monobit(std::span<const std::uint8_t> bits) {
    const std::uint64_t n = bits.size();
    if (n < 100) throw ValidationError("monobit needs at least 100 bits");
    std::uint64_t ones = 0;
    for (auto b : bits) ones += b;
    const double z =
        (2.0 * static_cast<double>(ones) - static_cast<double>(n)) / std::sqrt(static_cast<double>(n));
    TestResult r;
    r.name = "monobit";
    r.statistic = z;
    r.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
    r.region = classify_pvalue(r.p_value);
    r.n = n;
    return r;
}

TestResult runs_test(std::span<const std::uint8_t> bits) {
    const std::uint64_t n = bits.size();
    if (n < 100) throw ValidationError("runs test needs at least 100 bits");
    std::uint64_t ones = 0;
    for (auto b : bits) ones += b;
    const double pi = static_cast<double>(ones) / static_cast<double>(n);

    TestResult r;
    r.name = "runs";
    r.n = n;
    if (std::fabs(pi - 0.5) >= 2.0 / std::sqrt(static_cast<double>(n))) {
        // The statistic presumes near-balanced bits; report the sample
        // as out of scope rather than inventing a verdict.
        r.statistic = pi;
        r.p_value = std::nan("");
        r.region = std::nullopt;
        r.note = "bit proportion too far from 1/2 for the runs statistic";
        return r;
    }
    std::uint64_t v = 1;
    for (std::size_t i = 1; i < bits.size(); ++i) v += bits[i] != bits[i - 1];
    const double nn = static_cast<double>(n);
    const double num = std::fabs(static_cast<double>(v) - 2.0 * nn * pi * (1.0 - pi));
    const double den = 2.0 * std::sqrt(2.0 * nn) * pi * (1.0 - pi);
    r.statistic = static_cast<double>(v);
    r.p_value = std::erfc(num / den);
    r.region = classify_pvalue(r.p_value);
    return r;
}

TestResult chi_square_uniform(std::span<const std::uint64_t> counts) {
    const std::size_t m = counts.size();
    if (m < 2) throw ValidationError("chi-square needs at least 2 symbols");
    std::uint64_t total = 0;
    for (auto c : counts) total += c;
    const double expected = static_cast<double>(total) / static_cast<double>(m);
    if (expected < 5.0) {
        throw ValidationError("chi-square expected count per symbol is " +
                              std::to_string(expected) + ", needs at least 5");
    }
    double chi2 = 0.0;
    for (auto c : counts) {
        const double dlt = static_cast<double>(c) - expected;
        chi2 += dlt * dlt / expected;
    }
    TestResult r;
    r.name = "chi-square-uniform";
    r.statistic = chi2;
    r.p_value = gsl_cdf_chisq_Q(chi2, static_cast<double>(m - 1));
    r.region = classify_pvalue(r.p_value);
    r.n = total;
    return r;
}

TestResult serial_correlation(std::span<const double> values, unsigned lag) {
    if (lag < 1) throw ValidationError("serial correlation lag must be at least 1");
    if (values.size() < lag + 4) {
        throw ValidationError("serial correlation needs at least lag + 4 values");
    }
    // Detect constancy directly: the moment-based check below can miss it
    // when the mean of a non-representable constant picks up rounding.
    bool constant = true;
    for (std::size_t i = 1; i < values.size() && constant; ++i) {
        constant = values[i] == values[0];
    }
    if (constant) {
        throw DegenerateError("serial correlation is undefined for a constant sequence");
    }

    const std::size_t pairs = values.size() - lag;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        mx += values[i];
        my += values[i + lag];
    }
    mx /= static_cast<double>(pairs);
    my /= static_cast<double>(pairs);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const double dx = values[i] - mx;
        const double dy = values[i + lag] - my;
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    if (sxx == 0.0 || syy == 0.0) {
        throw DegenerateError("serial correlation is undefined for a constant sequence");
    }
    double r = sxy / std::sqrt(sxx * syy);
    if (r > 1.0) r = 1.0;
    if (r < -1.0) r = -1.0;

    TestResult out;
    out.name = "serial-lag-" + std::to_string(lag);
    out.statistic = r;
    out.n = pairs;
    if (std::fabs(r) == 1.0) {
        out.p_value = 0.0;
    } else {
        const double z = std::atanh(r) * std::sqrt(static_cast<double>(pairs) - 3.0);
        out.p_value = std::erfc(std::fabs(z) / std::sqrt(2.0));
    }
    out.region = classify_pvalue(out.p_value);
    return out;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> diffs) {
    std::vector<double> d;
    d.reserve(diffs.size());
    for (double v : diffs) {
        if (!std::isfinite(v)) throw ValidationError("differences must be finite");
        if (v != 0.0) d.push_back(v);
    }
    if (d.empty()) {
        throw DegenerateError("every difference is zero; the samples are indistinguishable");
    }
    const std::size_t n = d.size();

    // Average ranks over groups of exactly equal |difference|.
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return std::fabs(d[a]) < std::fabs(d[b]); });
    std::vector<double> rank(n, 0.0);
    std::vector<std::size_t> tie_sizes;
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j < n && std::fabs(d[order[j]]) == std::fabs(d[order[i]])) ++j;
        const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (std::size_t t = i; t < j; ++t) rank[order[t]] = avg;
        tie_sizes.push_back(j - i);
        i = j;
    }

    double wplus = 0.0, wminus = 0.0;
    for (std::size_t i = 0; i < n; ++i) (d[i] > 0.0 ? wplus : wminus) += rank[i];
    const double w = std::min(wplus, wminus);

    WilcoxonResult res;
    res.statistic = w;
    res.n = n;

    if (n <= 20) {
        // Enumerate the sign-flip distribution of the observed ranks.
        // Ranks are multiples of 1/2, so doubling them gives integers.
        std::vector<long> r2(n);
        long total2 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            r2[i] = std::lround(2.0 * rank[i]);
            total2 += r2[i];
        }
        std::vector<double> dp(static_cast<std::size_t>(total2) + 1, 0.0);
        dp[0] = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (long s = total2; s >= r2[i]; --s) {
                dp[static_cast<std::size_t>(s)] += dp[static_cast<std::size_t>(s - r2[i])];
            }
        }
        const long wlo = std::lround(2.0 * w);
        const long whi = std::lround(2.0 * std::max(wplus, wminus));
        double below = 0.0, above = 0.0;
        for (long s = 0; s <= wlo; ++s) below += dp[static_cast<std::size_t>(s)];
        for (long s = whi; s <= total2; ++s) above += dp[static_cast<std::size_t>(s)];
        res.p_value = std::min(1.0, (below + above) / std::pow(2.0, static_cast<double>(n)));
        res.exact = true;
        return res;
    }

    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    double tie_term = 0.0;
    for (auto t : tie_sizes) {
        const double td = static_cast<double>(t);
        tie_term += td * td * td - td;
    }
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    if (var <= 0.0) {
        throw DegenerateError("signed-rank variance vanished under ties");
    }
    // Continuity-corrected two-sided normal tail; W <= mean by choice of W.
    const double z = std::max(0.0, mean - w - 0.5) / std::sqrt(var);
    res.p_value = std::erfc(z / std::sqrt(2.0));
    res.exact = false;
    return res;
}

WilcoxonResult wilcoxon_signed_rank(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) {
        throw ValidationError("paired samples must have equal length");
    }
    if (a.empty()) throw ValidationError("paired samples must be nonempty");
    std::vector<double> diffs(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) diffs[i] = a[i] - b[i];
    return wilcoxon_signed_rank(diffs);
}

namespace {

void tally(TestReport& report, TestResult result) {
    if (result.skipped()) {
        ++report.skipped;
    } else {
        switch (*result.region) {
            case Region::Safe: ++report.safe; break;
            case Region::Doubt: ++report.doubt; break;
            case Region::Failure: ++report.failure; break;
        }
        if (diehard_band(result.p_value)) ++report.diehard_pass;
    }
    report.results.push_back(std::move(result));
}

} // namespace

TestReport run_battery_on_sample(std::span<const std::uint32_t> words,
                                 std::span<const std::uint32_t> digits, unsigned d,
                                 const std::string& label) {
    if (d < 1 || d > 9) throw ValidationError("symbol width d must lie in [1, 9]");
    if (words.size() != digits.size() || words.empty()) {
        throw ValidationError("battery needs matched, nonempty word and symbol samples");
    }
    const auto m = static_cast<std::uint64_t>(std::pow(10.0, d) + 0.5);
    if (digits.size() < 5 * m) {
        throw ValidationError("battery needs at least 5*10^d symbols for the uniformity test");
    }

    TestReport report;
    report.config = label;

    const auto bits = unpack_bits(words);
    tally(report, monobit(bits));
    tally(report, runs_test(bits));

    std::vector<std::uint64_t> counts(m, 0);
    for (auto dg : digits) {
        if (dg >= m) throw ValidationError("symbol exceeds 10^d - 1");
        ++counts[dg];
    }
    tally(report, chi_square_uniform(counts));

    std::vector<double> vals(digits.size());
    for (std::size_t i = 0; i < digits.size(); ++i) vals[i] = static_cast<double>(digits[i]);
    for (unsigned lag = 1; lag <= 3; ++lag) {
        tally(report, serial_correlation(vals, lag));
    }
    return report;
}

TestReport run_battery(const PrngConfig& cfg, std::uint64_t budget) {
    cfg.validate();
    if (budget < 1'000'000) {
        throw ValidationError("battery budget must be at least 10^6 symbols");
    }
    RandomStream stream(cfg);
    std::vector<std::uint32_t> words(budget), digits(budget);
    for (std::uint64_t i = 0; i < budget; ++i) {
        const auto s = stream.next_sample();
        words[i] = s.word;
        digits[i] = s.digit;
    }
    return run_battery_on_sample(words, digits, cfg.d, cfg.describe());
}

void write_report_csv(std::ostream& os, const TestReport& report) {
    os << "test,statistic,p_value,region\n";
    char buf[96];
    for (const auto& r : report.results) {
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g", r.statistic, r.p_value);
        os << r.name << ',' << buf << ','
           << (r.skipped() ? std::string("skipped") : to_string(*r.region)) << '\n';
    }
    if (!os) throw IoError("failed writing test report");
}

std::string summarize(const TestReport& report) {
    std::ostringstream os;
    os << "sample: " << report.config << '\n';
    char buf[160];
    for (const auto& r : report.results) {
        std::snprintf(buf, sizeof(buf), "  %-20s stat=%-12.6g p=%-12.6g %s", r.name.c_str(),
                      r.statistic, r.p_value,
                      r.skipped() ? "skipped" : to_string(*r.region).c_str());
        os << buf;
        if (!r.note.empty()) os << "  (" << r.note << ')';
        os << '\n';
    }
    os << "regions: safe=" << report.safe << " doubt=" << report.doubt
       << " failure=" << report.failure << " skipped=" << report.skipped
       << " | strict band " << report.diehard_pass << "/" << report.applicable() << '\n';
    return os.str();
}

} // namespace kmap
