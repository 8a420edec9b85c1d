#pragma once

#include <cstdint>
#define MPFR_USE_INTMAX_T 1
#include <mpfr.h>

#include <string>
#include <variant>

#include "kmap/errors.hpp"

namespace kmap {

// Arithmetic backend for orbit computations.
//
// Native is IEEE binary64. Extended(bits) is arbitrary-precision binary
// floating point with a `bits`-bit significand, 64 <= bits <= 8192.
// Every Extended operation rounds once, to nearest / ties-to-even, so a
// given (mode, seed, params) tuple produces one well-defined orbit.
class PrecisionMode {
public:
    static PrecisionMode native() { return PrecisionMode(true, 53); }
    static PrecisionMode extended(unsigned bits = kDefaultExtendedBits);

    // "native", "extended", or "extended:<bits>".
    static PrecisionMode parse(const std::string& text);

    bool is_native() const { return native_; }
    // Significand width in bits (53 for native).
    unsigned bits() const { return bits_; }
    // Decimal digits the significand can hold, floor(bits * log10(2)).
    unsigned decimal_digits() const;
    // Digits needed to round-trip a value through decimal text.
    unsigned roundtrip_digits() const;

    std::string str() const;
    bool operator==(const PrecisionMode&) const = default;

    static constexpr unsigned kMinExtendedBits = 64;
    static constexpr unsigned kMaxExtendedBits = 8192;
    static constexpr unsigned kDefaultExtendedBits = 512;

private:
    PrecisionMode(bool native, unsigned bits) : native_(native), bits_(bits) {}
    bool native_;
    unsigned bits_;
};

// Value-semantic wrapper over one mpfr_t. Precision is fixed at
// construction; all operations round to nearest. Binary operators
// produce a result at the wider operand precision.
class BigFloat {
public:
    explicit BigFloat(unsigned prec_bits);
    BigFloat(double v, unsigned prec_bits);
    // Parses a decimal literal (plain or scientific). Throws ValidationError
    // if the text is not a single well-formed number.
    BigFloat(const std::string& decimal, unsigned prec_bits);
    BigFloat(const BigFloat& o);
    BigFloat(BigFloat&& o) noexcept;
    BigFloat& operator=(const BigFloat& o);
    BigFloat& operator=(BigFloat&& o) noexcept;
    ~BigFloat();

    unsigned precision() const;
    double to_double() const;
    // Decimal text that parses back to the same value at the same
    // precision. digits = 0 picks the round-trip width.
    std::string str(std::size_t digits = 0) const;

    // Direct handle for kernel code; value stays owned by this object.
    mpfr_ptr raw() { return v_; }
    mpfr_srcptr raw() const { return v_; }

    friend BigFloat operator+(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator-(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator*(const BigFloat& a, const BigFloat& b);
    friend BigFloat operator-(double a, const BigFloat& b);
    friend BigFloat operator*(double a, const BigFloat& b);
    friend BigFloat operator-(const BigFloat& a);

    int compare(const BigFloat& o) const;
    int compare(double o) const;
    friend bool operator<(const BigFloat& a, const BigFloat& b) { return a.compare(b) < 0; }
    friend bool operator<=(const BigFloat& a, const BigFloat& b) { return a.compare(b) <= 0; }
    friend bool operator>(const BigFloat& a, const BigFloat& b) { return a.compare(b) > 0; }
    friend bool operator>=(const BigFloat& a, const BigFloat& b) { return a.compare(b) >= 0; }
    friend bool operator==(const BigFloat& a, const BigFloat& b) { return a.compare(b) == 0; }
    friend bool operator<(const BigFloat& a, double b) { return a.compare(b) < 0; }
    friend bool operator>=(const BigFloat& a, double b) { return a.compare(b) >= 0; }

    friend BigFloat floor(const BigFloat& a);
    friend BigFloat frac(const BigFloat& a);

private:
    mpfr_t v_;
};

// A point of the unit interval at a chosen precision. The concrete
// representation is either a double or a BigFloat; which one is fixed
// by the PrecisionMode it was created under.
class PhaseValue {
public:
    PhaseValue() : v_(0.0) {}
    explicit PhaseValue(BigFloat v) : v_(std::move(v)) {}
    static PhaseValue of(double v, PrecisionMode mode);

    PrecisionMode mode() const;
    double as_double() const;
    bool is_native() const { return std::holds_alternative<double>(v_); }
    const std::variant<double, BigFloat>& repr() const { return v_; }

private:
    explicit PhaseValue(double v) : v_(v) {}
    std::variant<double, BigFloat> v_;
};

// Parses a decimal literal into a unit-interval value at the given
// precision. Rejects text outside [0, 1] and anything that is not a
// single number.
PhaseValue make_value(const std::string& decimal, PrecisionMode mode);

// First n binary fraction digits of x as an unsigned integer:
// floor(x * 2^n) mod 2^n, for x in [0, 1] and 1 <= n <= 64.
// x = 1.0 wraps to 0. Monotone in x on [0, 1).
std::uint64_t frac_bits(const PhaseValue& x, unsigned n);
std::uint64_t frac_bits(double x, unsigned n);
std::uint64_t frac_bits(const BigFloat& x, unsigned n);

// Decimal rendering; digits = 0 selects the round-trip width for the
// value's precision.
std::string to_decimal_string(const PhaseValue& x, std::size_t digits = 0);

} // namespace kmap
