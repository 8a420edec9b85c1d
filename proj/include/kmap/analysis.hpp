#pragma once

#include <iosfwd>
#include <vector>

#include "kmap/dynamics.hpp"

namespace kmap {

enum class SweptParam { Mu, Gamma };

// A closed, uniformly spaced parameter grid plus the per-point orbit
// template. The grid is lo, lo+step, ..., and includes hi whenever
// (hi - lo) is an integral multiple of step.
struct SweepSpec {
    MapId map = MapId::Fog;
    SweptParam swept = SweptParam::Gamma;
    Params base{};                         // value of the non-swept parameter
    double lo = 0.0, hi = 2.0, step = 0.003;
    std::string x0 = "0.1";
    std::uint64_t transient = 200;
    std::uint64_t length = 1000;           // samples per point (or T for exponents)
    unsigned k = 0;
    PrecisionMode precision = PrecisionMode::native();
    unsigned workers = 1;

    void validate() const;
    std::size_t grid_size() const;
    double grid_value(std::size_t i) const; // lo + i * step
    Params params_at(std::size_t i) const;
};

struct BifurcationTable {
    std::vector<double> params;
    std::vector<std::vector<double>> samples; // samples[i] belongs to params[i]
};

// Post-transient orbit samples per grid point, zoom applied at emission.
// Per-point output is thinned to at most max_per_param values by a
// deterministic stride; max_per_param = 0 keeps everything. Results are
// merged in grid order, so worker count never changes the output.
BifurcationTable bifurcation_scan(const SweepSpec& spec, std::uint64_t max_per_param = 500);

enum class StabilityClass { Negative, Zero, Positive };
std::string to_string(StabilityClass c);
StabilityClass classify_lambda(double lambda);

struct LyapunovCurve {
    std::vector<double> params;
    std::vector<double> lambdas;
    std::vector<StabilityClass> classes;
};

// Lyapunov exponent per grid point (spec.length plays the role of T).
// A grid point whose orbit pins to a superstable cycle has an exponent
// of -infinity; it is recorded as such and classed Negative rather than
// aborting the sweep.
LyapunovCurve lyapunov_curve(const SweepSpec& spec);

struct Histogram {
    std::vector<std::uint64_t> counts; // uniform bins over [0, 1]
    std::uint64_t total = 0;

    unsigned bins() const { return static_cast<unsigned>(counts.size()); }
    double bin_lo(unsigned i) const { return static_cast<double>(i) / bins(); }
    double bin_hi(unsigned i) const { return static_cast<double>(i + 1) / bins(); }
};

// Occupancy of the emitted orbit over uniform bins; the counts always
// sum to spec.length (out-of-range points, possible only for the
// as-printed variant, are clamped to the edge bins).
Histogram frequency_histogram(const OrbitSpec& spec, unsigned bins);

enum class CobwebKind { Curve, Diagonal, Vertical, Horizontal };
std::string to_string(CobwebKind k);

struct CobwebSegment {
    double x0, y0, x1, y1;
    CobwebKind kind;
};

struct CobwebTrace {
    std::vector<CobwebSegment> curve; // sampled graph of the map
    CobwebSegment diagonal{0, 0, 1, 1, CobwebKind::Diagonal};
    std::vector<CobwebSegment> path;  // vertical/horizontal pairs, 2 per step
};

CobwebTrace cobweb_trace(MapId id, const Params& p, const PhaseValue& x0,
                         std::uint64_t steps, unsigned curve_samples = 512);

// CSV schemas:
//   bifurcation: param,x
//   lyapunov:    param,lambda,class
//   histogram:   bin_lo,bin_hi,count
//   cobweb:      x0,y0,x1,y1,kind
//   orbit:       x
void write_bifurcation_csv(std::ostream& os, const BifurcationTable& t);
void write_lyapunov_csv(std::ostream& os, const LyapunovCurve& c);
void write_histogram_csv(std::ostream& os, const Histogram& h);
void write_cobweb_csv(std::ostream& os, const CobwebTrace& t);
void write_orbit_csv(std::ostream& os, const std::vector<PhaseValue>& orbit);

} // namespace kmap
