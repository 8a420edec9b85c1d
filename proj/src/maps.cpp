#include "kmap/maps.hpp"

#include <cmath>

namespace kmap {

MapId map_from_string(const std::string& id) {
    if (id == "logistic") return MapId::Logistic;
    if (id == "tent") return MapId::Tent;
    if (id == "fog") return MapId::Fog;
    if (id == "gof") return MapId::Gof;
    if (id == "gof-as-printed") return MapId::GofAsPrinted;
    throw ValidationError("unknown map '" + id +
                          "' (expected logistic, tent, fog, gof, or gof-as-printed)");
}

std::string to_string(MapId id) {
    switch (id) {
        case MapId::Logistic: return "logistic";
        case MapId::Tent: return "tent";
        case MapId::Fog: return "fog";
        case MapId::Gof: return "gof";
        case MapId::GofAsPrinted: return "gof-as-printed";
    }
    throw ValidationError("invalid map id");
}

void validate(const Params& p) {
    if (!std::isfinite(p.mu) || p.mu < 0.0 || p.mu > 4.0) {
        throw ValidationError("mu must lie in [0, 4], got " + std::to_string(p.mu));
    }
    if (!std::isfinite(p.gamma) || p.gamma < 0.0 || p.gamma > 2.0) {
        throw ValidationError("gamma must lie in [0, 2], got " + std::to_string(p.gamma));
    }
}

namespace maps {

double logistic_step(double x, double mu) {
    return mu * (x * (1.0 - x));
}

double tent_step(double x, double gamma) {
    return x < 0.5 ? gamma * x : gamma * (1.0 - x);
}

double fog_step(double x, double mu, double gamma) {
    return logistic_step(tent_step(x, gamma), mu);
}

double gof_step(double x, double mu, double gamma) {
    return tent_step(logistic_step(x, mu), gamma);
}

double gof_as_printed_step(double x, double mu, double gamma) {
    // Products associate left to right, matching the printed form.
    if (x < 0.5) return gamma * mu * x * (1.0 - x);
    return gamma * (1.0 - mu * x * (1.0 - x));
}

double logistic_deriv(double x, double mu) {
    return mu * (1.0 - 2.0 * x);
}

double tent_deriv(double x, double gamma) {
    return x < 0.5 ? gamma : -gamma;
}

double fog_deriv(double x, double mu, double gamma) {
    const double mg = mu * gamma;
    if (x < 0.5) return mg * (1.0 - 2.0 * gamma * x);
    return mg * (2.0 * gamma - 2.0 * gamma * x - 1.0);
}

double gof_deriv(double x, double mu, double gamma) {
    // Chain rule: the tent factor is +gamma or -gamma depending on
    // which side of 1/2 the inner logistic value lands.
    const double inner = logistic_step(x, mu);
    const double sign = inner >= 0.5 ? -1.0 : 1.0;
    return sign * gamma * mu * (1.0 - 2.0 * x);
}

double gof_as_printed_deriv(double x, double mu, double gamma) {
    // Differentiates the printed branches themselves; the right branch
    // is constant in x only because the printed form is malformed.
    if (x < 0.5) return gamma * mu * (1.0 - 2.0 * x);
    return -gamma * (mu + 1.0);
}

namespace {

// out := mu * (x * (1 - x)); out may alias x. Uses s.a only.
void big_logistic(BigFloat& out, const BigFloat& x, const BigFloat& mu, BigScratch& s) {
    mpfr_ui_sub(s.a.raw(), 1, x.raw(), MPFR_RNDN);
    mpfr_mul(s.a.raw(), s.a.raw(), x.raw(), MPFR_RNDN);
    mpfr_mul(out.raw(), s.a.raw(), mu.raw(), MPFR_RNDN);
}

// out := gamma * x or gamma * (1 - x); out may alias x. Uses s.a only.
void big_tent(BigFloat& out, const BigFloat& x, const BigFloat& gamma, BigScratch& s) {
    if (x < 0.5) {
        mpfr_mul(out.raw(), x.raw(), gamma.raw(), MPFR_RNDN);
    } else {
        mpfr_ui_sub(s.a.raw(), 1, x.raw(), MPFR_RNDN);
        mpfr_mul(out.raw(), s.a.raw(), gamma.raw(), MPFR_RNDN);
    }
}

void big_gof_as_printed(BigFloat& out, const BigFloat& x, const BigFloat& mu,
                        const BigFloat& gamma, BigScratch& s) {
    if (x < 0.5) {
        mpfr_mul(s.a.raw(), gamma.raw(), mu.raw(), MPFR_RNDN);
        mpfr_mul(s.a.raw(), s.a.raw(), x.raw(), MPFR_RNDN);
        mpfr_ui_sub(s.b.raw(), 1, x.raw(), MPFR_RNDN);
        mpfr_mul(out.raw(), s.a.raw(), s.b.raw(), MPFR_RNDN);
    } else {
        mpfr_mul(s.a.raw(), mu.raw(), x.raw(), MPFR_RNDN);
        mpfr_ui_sub(s.b.raw(), 1, x.raw(), MPFR_RNDN);
        mpfr_mul(s.a.raw(), s.a.raw(), s.b.raw(), MPFR_RNDN);
        mpfr_ui_sub(s.a.raw(), 1, s.a.raw(), MPFR_RNDN);
        mpfr_mul(out.raw(), gamma.raw(), s.a.raw(), MPFR_RNDN);
    }
}

} // namespace

void step_inplace(MapId id, BigFloat& x, const BigFloat& mu, const BigFloat& gamma,
                  BigScratch& s) {
    switch (id) {
        case MapId::Logistic:
            big_logistic(x, x, mu, s);
            return;
        case MapId::Tent:
            big_tent(x, x, gamma, s);
            return;
        case MapId::Fog:
            // Literal composition: the same tent and logistic kernels,
            // chained, so fog(x) == logistic(tent(x)) bit for bit.
            big_tent(s.c, x, gamma, s);
            big_logistic(x, s.c, mu, s);
            return;
        case MapId::Gof:
            big_logistic(s.c, x, mu, s);
            big_tent(x, s.c, gamma, s);
            return;
        case MapId::GofAsPrinted:
            big_gof_as_printed(s.c, x, mu, gamma, s);
            x = s.c;
            return;
    }
    throw ValidationError("invalid map id");
}

} // namespace maps

double step(MapId id, double x, const Params& p) {
    switch (id) {
        case MapId::Logistic: return maps::logistic_step(x, p.mu);
        case MapId::Tent: return maps::tent_step(x, p.gamma);
        case MapId::Fog: return maps::fog_step(x, p.mu, p.gamma);
        case MapId::Gof: return maps::gof_step(x, p.mu, p.gamma);
        case MapId::GofAsPrinted: return maps::gof_as_printed_step(x, p.mu, p.gamma);
    }
    throw ValidationError("invalid map id");
}

PhaseValue step(MapId id, const PhaseValue& x, const Params& p) {
    if (x.is_native()) {
        return PhaseValue::of(step(id, x.as_double(), p), PrecisionMode::native());
    }
    const auto& bx = std::get<BigFloat>(x.repr());
    const unsigned bits = bx.precision();
    BigFloat v(bx);
    BigFloat mu(p.mu, bits), gamma(p.gamma, bits);
    maps::BigScratch s(bits);
    maps::step_inplace(id, v, mu, gamma, s);
    return PhaseValue(std::move(v));
}

double deriv(MapId id, double x, const Params& p) {
    switch (id) {
        case MapId::Logistic: return maps::logistic_deriv(x, p.mu);
        case MapId::Tent: return maps::tent_deriv(x, p.gamma);
        case MapId::Fog: return maps::fog_deriv(x, p.mu, p.gamma);
        case MapId::Gof: return maps::gof_deriv(x, p.mu, p.gamma);
        case MapId::GofAsPrinted: return maps::gof_as_printed_deriv(x, p.mu, p.gamma);
    }
    throw ValidationError("invalid map id");
}

double deriv(MapId id, const PhaseValue& x, const Params& p) {
    return deriv(id, x.as_double(), p);
}

} // namespace kmap
