#pragma once

#include <string>

#include "kmap/numerics.hpp"

namespace kmap {

// The map family. Fog is logistic-after-tent, Gof is tent-after-logistic.
// GofAsPrinted is a deliberately preserved variant of Gof whose second
// branch drops a bracket; it is not surjective onto [0,1] and can leave
// the unit interval. It exists for side-by-side comparison only and is
// quarantined behind its own id.
enum class MapId { Logistic, Tent, Fog, Gof, GofAsPrinted };

MapId map_from_string(const std::string& id);
std::string to_string(MapId id);

struct Params {
    double mu = 4.0;    // logistic height, in [0, 4]
    double gamma = 2.0; // tent slope, in [0, 2]
};

// Throws ValidationError unless mu in [0,4] and gamma in [0,2], both finite.
void validate(const Params& p);

namespace maps {

// binary64 kernels. Branch points use the convention: left branch for
// x < 1/2, right branch for x >= 1/2.
double logistic_step(double x, double mu);
double tent_step(double x, double gamma);
double fog_step(double x, double mu, double gamma);    // logistic(tent(x))
double gof_step(double x, double mu, double gamma);    // tent(logistic(x))
double gof_as_printed_step(double x, double mu, double gamma);

double logistic_deriv(double x, double mu);
double tent_deriv(double x, double gamma);
double fog_deriv(double x, double mu, double gamma);
double gof_deriv(double x, double mu, double gamma);
double gof_as_printed_deriv(double x, double mu, double gamma);

// Scratch space for extended-precision stepping; reused across
// iterations so long orbits do not allocate per step.
struct BigScratch {
    BigFloat a, b, c;
    explicit BigScratch(unsigned bits) : a(bits), b(bits), c(bits) {}
};

// x := map(x) at x's precision. mu and gamma must already be promoted
// to the working precision (binary64 -> BigFloat promotion is exact).
void step_inplace(MapId id, BigFloat& x, const BigFloat& mu, const BigFloat& gamma,
                  BigScratch& s);

} // namespace maps

// One-shot stepping and differentiation with dispatch on map id.
double step(MapId id, double x, const Params& p);
PhaseValue step(MapId id, const PhaseValue& x, const Params& p);

// Derivatives are consumed only through log|.| sums, so they are always
// evaluated in binary64 regardless of the orbit's precision.
double deriv(MapId id, double x, const Params& p);
double deriv(MapId id, const PhaseValue& x, const Params& p);

} // namespace kmap
