#include "kmap/dynamics.hpp"

#include <cmath>
#include <random>

namespace kmap {

namespace {

// Exact binary64 powers of ten (10^n is representable up to n = 22).
constexpr double kPow10[] = {
    1e0,  1e1,  1e2,  1e3,  1e4,  1e5,  1e6,  1e7,  1e8,  1e9,  1e10, 1e11,
    1e12, 1e13, 1e14, 1e15, 1e16, 1e17, 1e18, 1e19, 1e20, 1e21, 1e22,
};
constexpr unsigned kMaxNativePow10 = 22;

} // namespace

unsigned max_zoom(PrecisionMode mode) {
    if (mode.is_native()) return 6;
    return mode.decimal_digits() - 8;
}

void OrbitSpec::validate() const {
    kmap::validate(params);
    if (length < 1) throw ValidationError("orbit length must be at least 1");
    if (k > max_zoom(precision)) {
        throw ValidationError("zoom depth " + std::to_string(k) + " exceeds the budget of " +
                              precision.str() + " precision (max " +
                              std::to_string(max_zoom(precision)) + ")");
    }
    (void)seed();
}

PhaseValue OrbitSpec::seed() const {
    PhaseValue v = make_value(x0, precision);
    bool interior;
    if (v.is_native()) {
        double d = v.as_double();
        interior = d > 0.0 && d < 1.0;
    } else {
        const auto& b = std::get<BigFloat>(v.repr());
        interior = b.compare(0.0) > 0 && b.compare(1.0) < 0;
    }
    if (!interior) throw ValidationError("seed " + x0 + " must lie strictly inside (0, 1)");
    return v;
}

double deep_zoom(double x, unsigned k) {
    if (!std::isfinite(x)) throw ValidationError("deep_zoom argument must be finite");
    if (k == 0) return x;
    if (k > max_zoom(PrecisionMode::native())) {
        throw ValidationError("zoom depth " + std::to_string(k) +
                              " exceeds the native precision budget");
    }
    static_assert(sizeof(kPow10) / sizeof(kPow10[0]) == kMaxNativePow10 + 1);
    double y = x * kPow10[k];
    y -= std::floor(y);
    if (y >= 1.0) y = 0.0; // subtraction may round up at the wrap point
    return y;
}

PhaseValue deep_zoom(const PhaseValue& x, unsigned k) {
    if (x.is_native()) {
        return PhaseValue::of(deep_zoom(x.as_double(), k), PrecisionMode::native());
    }
    const auto& bx = std::get<BigFloat>(x.repr());
    if (k > max_zoom(PrecisionMode::extended(bx.precision()))) {
        throw ValidationError("zoom depth " + std::to_string(k) +
                              " exceeds the precision budget of extended:" +
                              std::to_string(bx.precision()));
    }
    if (k == 0) return x;
    // 10^k needs about 3.33*k bits to be exact; build it wide enough,
    // then spend a single rounding on the product.
    BigFloat pw(std::max(64u, k * 4 + 8));
    mpfr_ui_pow_ui(pw.raw(), 10, k, MPFR_RNDN);
    BigFloat y(bx.precision());
    mpfr_mul(y.raw(), bx.raw(), pw.raw(), MPFR_RNDN);
    BigFloat f(bx.precision());
    mpfr_floor(f.raw(), y.raw());
    mpfr_sub(y.raw(), y.raw(), f.raw(), MPFR_RNDN);
    if (y.compare(1.0) >= 0) mpfr_set_zero(y.raw(), 1);
    return PhaseValue(std::move(y));
}

OrbitWalker::OrbitWalker(MapId id, const Params& p, const PhaseValue& x0)
    : id_(id), native_(x0.is_native()) {
    kmap::validate(p);
    if (native_) {
        x_ = x0.as_double();
        mu_ = p.mu;
        gamma_ = p.gamma;
    } else {
        const auto& bx = std::get<BigFloat>(x0.repr());
        const unsigned bits = bx.precision();
        bx_.emplace(bx);
        bz_.emplace(bits);
        bmu_.emplace(p.mu, bits);
        bgamma_.emplace(p.gamma, bits);
        bpow_.emplace(bits);
        scratch_.emplace(bits);
    }
}

void OrbitWalker::advance() {
    if (native_) {
        x_ = step(id_, x_, Params{mu_, gamma_});
    } else {
        maps::step_inplace(id_, *bx_, *bmu_, *bgamma_, *scratch_);
    }
    zoom_fresh_ = false;
}

double OrbitWalker::current_double() const {
    return native_ ? x_ : bx_->to_double();
}

void OrbitWalker::ensure_zoom(unsigned k) {
    if (zoom_fresh_ && zoom_k_ == k) return;
    zoom_fresh_ = true;
    zoom_k_ = k;
    if (native_) {
        if (k == 0) {
            if (x_ >= 0.0 && x_ <= 1.0) { // identity; wrap only escapees
                z_ = x_;
            } else {
                z_ = x_ - std::floor(x_);
                if (z_ >= 1.0) z_ = 0.0;
            }
            return;
        }
        double y = x_ * kPow10[k];
        y -= std::floor(y);
        if (y >= 1.0) y = 0.0;
        z_ = y;
        return;
    }
    if (k == 0) {
        if (bx_->compare(0.0) >= 0 && bx_->compare(1.0) <= 0) {
            mpfr_set(bz_->raw(), bx_->raw(), MPFR_RNDN);
        } else {
            mpfr_floor(bz_->raw(), bx_->raw());
            mpfr_sub(bz_->raw(), bx_->raw(), bz_->raw(), MPFR_RNDN);
            if (bz_->compare(1.0) >= 0) mpfr_set_zero(bz_->raw(), 1);
        }
        return;
    }
    if (pow_k_ != k) {
        BigFloat pw(std::max(64u, k * 4 + 8));
        mpfr_ui_pow_ui(pw.raw(), 10, k, MPFR_RNDN);
        mpfr_set_prec(bpow_->raw(), mpfr_get_prec(pw.raw()));
        mpfr_set(bpow_->raw(), pw.raw(), MPFR_RNDN);
        pow_k_ = k;
    }
    mpfr_mul(bz_->raw(), bx_->raw(), bpow_->raw(), MPFR_RNDN);
    mpfr_floor(scratch_->a.raw(), bz_->raw());
    mpfr_sub(bz_->raw(), bz_->raw(), scratch_->a.raw(), MPFR_RNDN);
    if (bz_->compare(1.0) >= 0) mpfr_set_zero(bz_->raw(), 1);
}

double OrbitWalker::zoomed_double(unsigned k) {
    ensure_zoom(k);
    return native_ ? z_ : bz_->to_double();
}

PhaseValue OrbitWalker::current(unsigned k) {
    ensure_zoom(k);
    if (native_) return PhaseValue::of(z_, PrecisionMode::native());
    return PhaseValue(BigFloat(*bz_));
}

std::uint32_t OrbitWalker::zoomed_digit(unsigned k, unsigned d) {
    if (d < 1 || d > 9) throw ValidationError("digit width must be in [1, 9]");
    ensure_zoom(k);
    const auto limit = static_cast<std::uint32_t>(kPow10[d]) - 1;
    std::uint32_t v;
    if (native_) {
        v = static_cast<std::uint32_t>(z_ * kPow10[d]);
    } else {
        mpfr_mul_ui(scratch_->a.raw(), bz_->raw(), static_cast<unsigned long>(kPow10[d]),
                    MPFR_RNDN);
        v = static_cast<std::uint32_t>(mpfr_get_uj(scratch_->a.raw(), MPFR_RNDD));
    }
    return v > limit ? limit : v; // guards the half-ulp-below-1 edge
}

std::uint32_t OrbitWalker::zoomed_word32(unsigned k) {
    ensure_zoom(k);
    if (native_) return static_cast<std::uint32_t>(frac_bits(z_, 32));
    return static_cast<std::uint32_t>(frac_bits(*bz_, 32));
}

std::vector<PhaseValue> iterate_orbit(const OrbitSpec& spec) {
    spec.validate();
    OrbitWalker w(spec.map, spec.params, spec.seed());
    for (std::uint64_t i = 0; i < spec.transient; ++i) w.advance();
    std::vector<PhaseValue> out;
    out.reserve(spec.length);
    for (std::uint64_t i = 0; i < spec.length; ++i) {
        w.advance();
        out.push_back(w.current(spec.k));
    }
    return out;
}

LyapunovEstimate lyapunov(MapId id, const Params& p, const PhaseValue& x0,
                          std::uint64_t transient, std::uint64_t T) {
    kmap::validate(p);
    if (T < 1) throw ValidationError("lyapunov needs at least one derivative term");
    OrbitWalker w(id, p, x0);
    for (std::uint64_t i = 0; i < transient; ++i) w.advance();
    double sum = 0.0;
    LyapunovEstimate est;
    for (std::uint64_t i = 0; i < T; ++i) {
        const double g = deriv(id, w.current_double(), p);
        if (g == 0.0) {
            ++est.zero_skips;
        } else {
            sum += std::log(std::fabs(g));
            ++est.terms;
        }
        w.advance();
    }
    if (est.terms == 0) {
        throw DegenerateError("derivative is zero along the entire sampled orbit; "
                              "the exponent is -infinity (superstable collapse)");
    }
    est.lambda = sum / static_cast<double>(est.terms);
    return est;
}

std::vector<std::pair<PhaseValue, PhaseValue>> divergence_trace(
    MapId id, const Params& p, const PhaseValue& x0, const PhaseValue& x0p,
    std::uint64_t steps) {
    kmap::validate(p);
    if (steps < 1) throw ValidationError("divergence trace needs at least one step");
    if (x0.is_native() != x0p.is_native()) {
        throw ValidationError("divergence seeds must share a precision");
    }
    bool equal;
    if (x0.is_native()) {
        equal = x0.as_double() == x0p.as_double();
    } else {
        equal = std::get<BigFloat>(x0.repr()) == std::get<BigFloat>(x0p.repr());
    }
    if (equal) {
        throw ValidationError("divergence seeds are identical; the trace would be trivial");
    }
    OrbitWalker a(id, p, x0), b(id, p, x0p);
    std::vector<std::pair<PhaseValue, PhaseValue>> out;
    out.reserve(steps);
    for (std::uint64_t t = 0; t < steps; ++t) {
        a.advance();
        b.advance();
        out.emplace_back(a.current(0), b.current(0));
    }
    return out;
}

std::string random_seed_decimal(std::uint64_t source_seed) {
    std::mt19937_64 eng(source_seed);
    // 18 decimal digits; redraw the (vanishingly rare) values within
    // 1e-6 of either endpoint.
    std::uniform_int_distribution<std::uint64_t> dist(1, 999'999'999'999'999'999ULL);
    std::uint64_t v;
    do {
        v = dist(eng);
    } while (v <= 1'000'000'000'000ULL || v >= 999'999'000'000'000'000ULL);
    std::string digits = std::to_string(v);
    return "0." + std::string(18 - digits.size(), '0') + digits;
}

} // namespace kmap
