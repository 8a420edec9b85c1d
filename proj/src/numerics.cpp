#include "kmap/numerics.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <utility>

namespace kmap {

namespace {

constexpr double kLog10Of2 = 0.30102999566398120;

unsigned roundtrip_digits_for_bits(unsigned bits) {
    return static_cast<unsigned>(std::ceil(bits * kLog10Of2)) + 2;
}

} // namespace

PrecisionMode PrecisionMode::extended(unsigned bits) {
    if (bits < kMinExtendedBits || bits > kMaxExtendedBits) {
        throw ValidationError("extended precision must have between 64 and 8192 significand bits, got " +
                              std::to_string(bits));
    }
    return PrecisionMode(false, bits);
}

PrecisionMode PrecisionMode::parse(const std::string& text) {
    if (text == "native") return native();
    if (text == "extended") return extended();
    const std::string prefix = "extended:";
    if (text.rfind(prefix, 0) == 0) {
        const std::string rest = text.substr(prefix.size());
        char* end = nullptr;
        unsigned long bits = std::strtoul(rest.c_str(), &end, 10);
        if (rest.empty() || end != rest.c_str() + rest.size()) {
            throw ValidationError("malformed precision spec '" + text + "'");
        }
        return extended(static_cast<unsigned>(bits));
    }
    throw ValidationError("unknown precision '" + text + "' (expected native, extended, or extended:<bits>)");
}

unsigned PrecisionMode::decimal_digits() const {
    return static_cast<unsigned>(std::floor(bits_ * kLog10Of2));
}

unsigned PrecisionMode::roundtrip_digits() const {
    return native_ ? 17u : roundtrip_digits_for_bits(bits_);
}

std::string PrecisionMode::str() const {
    return native_ ? "native" : "extended:" + std::to_string(bits_);
}

BigFloat::BigFloat(unsigned prec_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(prec_bits));
    mpfr_set_zero(v_, 1);
}

BigFloat::BigFloat(double v, unsigned prec_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(prec_bits));
    mpfr_set_d(v_, v, MPFR_RNDN);
}

BigFloat::BigFloat(const std::string& decimal, unsigned prec_bits) {
    mpfr_init2(v_, static_cast<mpfr_prec_t>(prec_bits));
    char* end = nullptr;
    mpfr_strtofr(v_, decimal.c_str(), &end, 10, MPFR_RNDN);
    if (decimal.empty() || end != decimal.c_str() + decimal.size() || !mpfr_number_p(v_)) {
        mpfr_clear(v_);
        throw ValidationError("malformed decimal literal '" + decimal + "'");
    }
}

BigFloat::BigFloat(const BigFloat& o) {
    mpfr_init2(v_, mpfr_get_prec(o.v_));
    mpfr_set(v_, o.v_, MPFR_RNDN);
}

BigFloat::BigFloat(BigFloat&& o) noexcept {
    mpfr_init2(v_, MPFR_PREC_MIN);
    mpfr_swap(v_, o.v_);
}

BigFloat& BigFloat::operator=(const BigFloat& o) {
    if (this != &o) {
        mpfr_set_prec(v_, mpfr_get_prec(o.v_));
        mpfr_set(v_, o.v_, MPFR_RNDN);
    }
    return *this;
}

BigFloat& BigFloat::operator=(BigFloat&& o) noexcept {
    if (this != &o) mpfr_swap(v_, o.v_);
    return *this;
}

BigFloat::~BigFloat() {
    mpfr_clear(v_);
}

unsigned BigFloat::precision() const {
    return static_cast<unsigned>(mpfr_get_prec(v_));
}

double BigFloat::to_double() const {
    return mpfr_get_d(v_, MPFR_RNDN);
}

std::string BigFloat::str(std::size_t digits) const {
    if (mpfr_zero_p(v_)) return "0";
    if (digits == 0) digits = roundtrip_digits_for_bits(precision());
    mpfr_exp_t exp = 0;
    char* s = mpfr_get_str(nullptr, &exp, 10, digits, v_, MPFR_RNDN);
    if (s == nullptr) throw IoError("mpfr_get_str failed");
    std::string mantissa(s);
    mpfr_free_str(s);

    std::string sign;
    if (!mantissa.empty() && mantissa[0] == '-') {
        sign = "-";
        mantissa.erase(0, 1);
    }
    std::size_t last = mantissa.find_last_not_of('0');
    if (last == std::string::npos) last = 0;
    mantissa.erase(last + 1);
    // Value is sign * 0.mantissa * 10^exp.
    return sign + "0." + mantissa + "e" + std::to_string(static_cast<long>(exp));
}

BigFloat operator+(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.precision(), b.precision()));
    mpfr_add(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
}

BigFloat operator-(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.precision(), b.precision()));
    mpfr_sub(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
}

BigFloat operator*(const BigFloat& a, const BigFloat& b) {
    BigFloat r(std::max(a.precision(), b.precision()));
    mpfr_mul(r.v_, a.v_, b.v_, MPFR_RNDN);
    return r;
}

BigFloat operator-(double a, const BigFloat& b) {
    BigFloat r(b.precision());
    mpfr_d_sub(r.v_, a, b.v_, MPFR_RNDN);
    return r;
}

BigFloat operator*(double a, const BigFloat& b) {
    BigFloat r(b.precision());
    mpfr_mul_d(r.v_, b.v_, a, MPFR_RNDN);
    return r;
}

BigFloat operator-(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_neg(r.v_, a.v_, MPFR_RNDN);
    return r;
}

int BigFloat::compare(const BigFloat& o) const {
    return mpfr_cmp(v_, o.v_);
}

int BigFloat::compare(double o) const {
    return mpfr_cmp_d(v_, o);
}

BigFloat floor(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_floor(r.v_, a.v_);
    return r;
}

// x - floor(x), in [0, 1) for every finite x (unlike mpfr_frac, which
// keeps the sign of x).
BigFloat frac(const BigFloat& a) {
    BigFloat r(a.precision());
    mpfr_floor(r.v_, a.v_);
    mpfr_sub(r.v_, a.v_, r.v_, MPFR_RNDN);
    return r;
}

PhaseValue PhaseValue::of(double v, PrecisionMode mode) {
    if (!std::isfinite(v)) throw ValidationError("phase value must be finite");
    if (mode.is_native()) return PhaseValue(v);
    return PhaseValue(BigFloat(v, mode.bits()));
}

PrecisionMode PhaseValue::mode() const {
    if (is_native()) return PrecisionMode::native();
    return PrecisionMode::extended(std::get<BigFloat>(v_).precision());
}

double PhaseValue::as_double() const {
    if (is_native()) return std::get<double>(v_);
    return std::get<BigFloat>(v_).to_double();
}

PhaseValue make_value(const std::string& decimal, PrecisionMode mode) {
    if (mode.is_native()) {
        if (decimal.empty()) throw ValidationError("empty decimal literal");
        char* end = nullptr;
        double v = std::strtod(decimal.c_str(), &end);
        if (end != decimal.c_str() + decimal.size() || !std::isfinite(v)) {
            throw ValidationError("malformed decimal literal '" + decimal + "'");
        }
        if (v < 0.0 || v > 1.0) {
            throw ValidationError("value " + decimal + " outside the unit interval");
        }
        return PhaseValue::of(v, mode);
    }
    BigFloat v(decimal, mode.bits());
    if (v.compare(0.0) < 0 || v.compare(1.0) > 0) {
        throw ValidationError("value " + decimal + " outside the unit interval");
    }
    return PhaseValue(std::move(v));
}

namespace {

void check_frac_bits_args(unsigned n) {
    if (n < 1 || n > 64) {
        throw ValidationError("bit count must be in [1, 64], got " + std::to_string(n));
    }
}

} // namespace

std::uint64_t frac_bits(double x, unsigned n) {
    check_frac_bits_args(n);
    if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
        throw ValidationError("frac_bits argument outside [0, 1]");
    }
    if (x == 1.0) return 0;
    auto u = static_cast<std::uint64_t>(std::ldexp(x, static_cast<int>(n)));
    return n == 64 ? u : (u & ((std::uint64_t{1} << n) - 1));
}

std::uint64_t frac_bits(const BigFloat& x, unsigned n) {
    check_frac_bits_args(n);
    if (x.compare(0.0) < 0 || x.compare(1.0) > 0) {
        throw ValidationError("frac_bits argument outside [0, 1]");
    }
    if (x.compare(1.0) == 0) return 0;
    BigFloat t(x.precision());
    mpfr_mul_2ui(t.raw(), x.raw(), n, MPFR_RNDN); // exact, exponent shift only
    auto u = static_cast<std::uint64_t>(mpfr_get_uj(t.raw(), MPFR_RNDD));
    return n == 64 ? u : (u & ((std::uint64_t{1} << n) - 1));
}

std::uint64_t frac_bits(const PhaseValue& x, unsigned n) {
    if (x.is_native()) return frac_bits(std::get<double>(x.repr()), n);
    return frac_bits(std::get<BigFloat>(x.repr()), n);
}

std::string to_decimal_string(const PhaseValue& x, std::size_t digits) {
    if (x.is_native()) {
        char buf[64];
        int w = digits == 0 ? 17 : static_cast<int>(digits);
        std::snprintf(buf, sizeof(buf), "%.*g", w, std::get<double>(x.repr()));
        return buf;
    }
    return std::get<BigFloat>(x.repr()).str(digits);
}

} // namespace kmap
