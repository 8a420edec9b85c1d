#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "kmap/maps.hpp"

namespace kmap {

// Largest zoom depth the arithmetic can support. A native orbit carries
// roughly 16 meaningful decimal digits, of which the zoom discards k;
// depths past 6 would emit mostly rounding noise, so they are rejected.
// Extended orbits must keep at least 8 significant digits after the shift.
unsigned max_zoom(PrecisionMode mode);

struct OrbitSpec {
    MapId map = MapId::Fog;
    Params params{};
    std::string x0 = "0.1";      // decimal seed, must parse into (0, 1)
    std::uint64_t transient = 0; // iterates discarded before emission
    std::uint64_t length = 1;    // iterates emitted
    unsigned k = 0;              // zoom depth applied at emission
    PrecisionMode precision = PrecisionMode::native();

    void validate() const;
    PhaseValue seed() const; // parsed and range-checked x0
};

// phi_k: x -> frac(x * 10^k), evaluated at x's precision. k = 0 is the
// identity. Zooming is an emission-time transform only; iteration always
// runs on the raw orbit.
double deep_zoom(double x, unsigned k);
PhaseValue deep_zoom(const PhaseValue& x, unsigned k);

// Single-step orbit cursor at a fixed precision. Parameters are promoted
// once and scratch is reused, so advancing does not allocate.
class OrbitWalker {
public:
    OrbitWalker(MapId id, const Params& p, const PhaseValue& x0);

    void advance(); // x := map(x)

    double current_double() const;          // raw orbit point, binary64
    double zoomed_double(unsigned k);       // phi_k(x), binary64
    PhaseValue current(unsigned k);         // phi_k(x) at full precision
    // floor(phi_k(x) * 10^d), an integer in [0, 10^d); d <= 9.
    std::uint32_t zoomed_digit(unsigned k, unsigned d);
    // First 32 binary fraction digits of phi_k(x).
    std::uint32_t zoomed_word32(unsigned k);

private:
    void ensure_zoom(unsigned k);

    MapId id_;
    bool native_;
    // native state
    double x_ = 0.0, z_ = 0.0;
    double mu_ = 0.0, gamma_ = 0.0;
    // extended state
    std::optional<BigFloat> bx_, bz_, bmu_, bgamma_, bpow_;
    std::optional<maps::BigScratch> scratch_;
    unsigned pow_k_ = ~0u;
    // zoom cache; several views of one orbit point share the transform
    bool zoom_fresh_ = false;
    unsigned zoom_k_ = ~0u;
};

// Emits x_{transient+1} .. x_{transient+length}, each through phi_k.
std::vector<PhaseValue> iterate_orbit(const OrbitSpec& spec);

struct LyapunovEstimate {
    double lambda = 0.0;
    std::uint64_t terms = 0;      // derivative terms actually summed
    std::uint64_t zero_skips = 0; // terms dropped because the derivative was 0
};

// Average of ln|map'(x_t)| over T points following the transient,
// always accumulated in binary64. Points with exactly zero derivative
// are skipped and counted; if every point has zero derivative the
// orbit pins to a superstable cycle and DegenerateError is thrown.
LyapunovEstimate lyapunov(MapId id, const Params& p, const PhaseValue& x0,
                          std::uint64_t transient, std::uint64_t T);

// Paired orbits from two distinct seeds at the same precision; entry t
// holds (x_{t+1}, x'_{t+1}) for t = 0 .. steps-1. No transient.
std::vector<std::pair<PhaseValue, PhaseValue>> divergence_trace(
    MapId id, const Params& p, const PhaseValue& x0, const PhaseValue& x0p,
    std::uint64_t steps);

// Reproducible seed in (1e-6, 1 - 1e-6), rendered as an 18-digit decimal
// so it parses identically at every precision.
std::string random_seed_decimal(std::uint64_t source_seed);

} // namespace kmap
