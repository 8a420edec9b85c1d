#include "kmap/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "parallel.hpp"

namespace kmap {

using detail::parallel_for;

namespace {

// Grid points at lo + i*step. The closed upper endpoint is kept when it
// lands within one part in 1e9 of a grid node, which absorbs the usual
// decimal-step representation error (e.g. 0:2:0.003 has 667 points).
std::size_t grid_count(double lo, double hi, double step) {
    return static_cast<std::size_t>(std::floor((hi - lo) / step * (1.0 + 1e-9))) + 1;
}

void write_real(std::ostream& os, double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

} // namespace

void SweepSpec::validate() const {
    if (!std::isfinite(lo) || !std::isfinite(hi) || !std::isfinite(step)) {
        throw ValidationError("sweep bounds must be finite");
    }
    if (step <= 0.0) throw ValidationError("sweep step must be positive");
    if (hi < lo) throw ValidationError("sweep upper bound is below the lower bound");
    if (workers < 1) throw ValidationError("worker count must be at least 1");
    // Both grid endpoints must be admissible parameter values.
    kmap::validate(params_at(0));
    kmap::validate(params_at(grid_size() - 1));

    OrbitSpec probe;
    probe.map = map;
    probe.params = params_at(0);
    probe.x0 = x0;
    probe.transient = transient;
    probe.length = length;
    probe.k = k;
    probe.precision = precision;
    probe.validate();
}

std::size_t SweepSpec::grid_size() const {
    return grid_count(lo, hi, step);
}

double SweepSpec::grid_value(std::size_t i) const {
    return lo + static_cast<double>(i) * step;
}

Params SweepSpec::params_at(std::size_t i) const {
    Params p = base;
    if (swept == SweptParam::Mu) {
        p.mu = grid_value(i);
    } else {
        p.gamma = grid_value(i);
    }
    return p;
}

BifurcationTable bifurcation_scan(const SweepSpec& spec, std::uint64_t max_per_param) {
    spec.validate();
    const std::size_t n = spec.grid_size();
    const std::uint64_t stride =
        (max_per_param == 0 || spec.length <= max_per_param)
            ? 1
            : (spec.length + max_per_param - 1) / max_per_param;

    BifurcationTable table;
    table.params.resize(n);
    table.samples.resize(n);
    parallel_for(n, spec.workers, [&](std::size_t i) {
        const Params p = spec.params_at(i);
        OrbitWalker w(spec.map, p, make_value(spec.x0, spec.precision));
        for (std::uint64_t t = 0; t < spec.transient; ++t) w.advance();
        std::vector<double> xs;
        xs.reserve(static_cast<std::size_t>((spec.length + stride - 1) / stride));
        for (std::uint64_t t = 0; t < spec.length; ++t) {
            w.advance();
            if (t % stride == 0) xs.push_back(w.zoomed_double(spec.k));
        }
        table.params[i] = spec.grid_value(i);
        table.samples[i] = std::move(xs);
    });
    return table;
}

std::string to_string(StabilityClass c) {
    switch (c) {
        case StabilityClass::Negative: return "negative";
        case StabilityClass::Zero: return "zero";
        case StabilityClass::Positive: return "positive";
    }
    throw ValidationError("invalid stability class");
}

StabilityClass classify_lambda(double lambda) {
    if (std::fabs(lambda) < 1e-3) return StabilityClass::Zero;
    return lambda < 0.0 ? StabilityClass::Negative : StabilityClass::Positive;
}

LyapunovCurve lyapunov_curve(const SweepSpec& spec) {
    spec.validate();
    const std::size_t n = spec.grid_size();
    LyapunovCurve curve;
    curve.params.resize(n);
    curve.lambdas.resize(n);
    curve.classes.resize(n);
    parallel_for(n, spec.workers, [&](std::size_t i) {
        const Params p = spec.params_at(i);
        double lambda;
        try {
            lambda = lyapunov(spec.map, p, make_value(spec.x0, spec.precision),
                              spec.transient, spec.length)
                         .lambda;
        } catch (const DegenerateError&) {
            lambda = -INFINITY; // superstable collapse at this grid point
        }
        curve.params[i] = spec.grid_value(i);
        curve.lambdas[i] = lambda;
        curve.classes[i] = classify_lambda(lambda);
    });
    return curve;
}

Histogram frequency_histogram(const OrbitSpec& spec, unsigned bins) {
    spec.validate();
    if (bins < 2) throw ValidationError("histogram needs at least 2 bins");
    Histogram h;
    h.counts.assign(bins, 0);
    OrbitWalker w(spec.map, spec.params, spec.seed());
    for (std::uint64_t t = 0; t < spec.transient; ++t) w.advance();
    for (std::uint64_t t = 0; t < spec.length; ++t) {
        w.advance();
        const double x = w.zoomed_double(spec.k);
        auto idx = static_cast<long>(std::floor(x * bins));
        if (idx < 0) idx = 0;
        if (idx >= static_cast<long>(bins)) idx = bins - 1;
        ++h.counts[static_cast<std::size_t>(idx)];
    }
    h.total = spec.length;
    return h;
}

std::string to_string(CobwebKind k) {
    switch (k) {
        case CobwebKind::Curve: return "curve";
        case CobwebKind::Diagonal: return "diagonal";
        case CobwebKind::Vertical: return "vertical";
        case CobwebKind::Horizontal: return "horizontal";
    }
    throw ValidationError("invalid cobweb segment kind");
}

CobwebTrace cobweb_trace(MapId id, const Params& p, const PhaseValue& x0,
                         std::uint64_t steps, unsigned curve_samples) {
    validate(p);
    if (curve_samples < 2) throw ValidationError("curve needs at least 2 samples");
    CobwebTrace trace;

    trace.curve.reserve(curve_samples);
    double px = 0.0, py = step(id, 0.0, p);
    for (unsigned i = 1; i <= curve_samples; ++i) {
        const double x = static_cast<double>(i) / curve_samples;
        const double y = step(id, x, p);
        trace.curve.push_back({px, py, x, y, CobwebKind::Curve});
        px = x;
        py = y;
    }

    OrbitWalker w(id, p, x0);
    double x = x0.as_double();
    double base = 0.0; // the first riser starts on the x-axis
    trace.path.reserve(2 * steps);
    for (std::uint64_t t = 0; t < steps; ++t) {
        w.advance();
        const double y = w.current_double();
        trace.path.push_back({x, base, x, y, CobwebKind::Vertical});
        trace.path.push_back({x, y, y, y, CobwebKind::Horizontal});
        base = y;
        x = y;
    }
    return trace;
}

void write_bifurcation_csv(std::ostream& os, const BifurcationTable& t) {
    os << "param,x\n";
    for (std::size_t i = 0; i < t.params.size(); ++i) {
        for (double x : t.samples[i]) {
            write_real(os, t.params[i]);
            os << ',';
            write_real(os, x);
            os << '\n';
        }
    }
    if (!os) throw IoError("failed writing bifurcation table");
}

void write_lyapunov_csv(std::ostream& os, const LyapunovCurve& c) {
    os << "param,lambda,class\n";
    for (std::size_t i = 0; i < c.params.size(); ++i) {
        write_real(os, c.params[i]);
        os << ',';
        write_real(os, c.lambdas[i]);
        os << ',' << to_string(c.classes[i]) << '\n';
    }
    if (!os) throw IoError("failed writing lyapunov curve");
}

void write_histogram_csv(std::ostream& os, const Histogram& h) {
    os << "bin_lo,bin_hi,count\n";
    for (unsigned i = 0; i < h.bins(); ++i) {
        write_real(os, h.bin_lo(i));
        os << ',';
        write_real(os, h.bin_hi(i));
        os << ',' << h.counts[i] << '\n';
    }
    if (!os) throw IoError("failed writing histogram");
}

void write_cobweb_csv(std::ostream& os, const CobwebTrace& t) {
    os << "x0,y0,x1,y1,kind\n";
    auto row = [&](const CobwebSegment& s) {
        write_real(os, s.x0);
        os << ',';
        write_real(os, s.y0);
        os << ',';
        write_real(os, s.x1);
        os << ',';
        write_real(os, s.y1);
        os << ',' << to_string(s.kind) << '\n';
    };
    for (const auto& s : t.curve) row(s);
    row(t.diagonal);
    for (const auto& s : t.path) row(s);
    if (!os) throw IoError("failed writing cobweb trace");
}

void write_orbit_csv(std::ostream& os, const std::vector<PhaseValue>& orbit) {
    os << "x\n";
    for (const auto& v : orbit) os << to_decimal_string(v, 17) << '\n';
    if (!os) throw IoError("failed writing orbit");
}

} // namespace kmap
