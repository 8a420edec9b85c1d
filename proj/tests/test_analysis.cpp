#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "kmap/analysis.hpp"
#include "kmap/errors.hpp"
#include "kmap/randtests.hpp"

using kmap::MapId;
using kmap::Params;
using kmap::PrecisionMode;
using kmap::SweepSpec;
using kmap::SweptParam;

namespace {

SweepSpec sweep(MapId id, SweptParam which, Params base, double lo, double hi,
                double step) {
    SweepSpec s;
    s.map = id;
    s.swept = which;
    s.base = base;
    s.lo = lo;
    s.hi = hi;
    s.step = step;
    return s;
}

kmap::OrbitSpec orbit(MapId id, double mu, double gamma, const char* x0,
                      std::uint64_t transient, std::uint64_t length,
                      unsigned k = 0,
                      PrecisionMode prec = PrecisionMode::native()) {
    kmap::OrbitSpec s;
    s.map = id;
    s.params = Params{mu, gamma};
    s.x0 = x0;
    s.transient = transient;
    s.length = length;
    s.k = k;
    s.precision = prec;
    return s;
}

double span(const std::vector<double>& v) {
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    return *mx - *mn;
}

}  // namespace

TEST_CASE("grid sizing honours closed endpoints without drift") {
    // 2/0.003 is not integral, so the last point is 1.998, not 2.
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.0, 2.0, 0.003);
    CHECK(s.grid_size() == 667);
    CHECK(s.grid_value(666) == doctest::Approx(1.998));

    // An integral span includes both endpoints despite rounding.
    auto t = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.0, 2.0, 0.5);
    CHECK(t.grid_size() == 5);
    CHECK(t.grid_value(4) == doctest::Approx(2.0));

    auto u = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 1.2, 2.0, 0.05);
    CHECK(u.grid_size() == 17);

    auto single = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.7, 0.7, 1.0);
    CHECK(single.grid_size() == 1);
    CHECK(single.params_at(0).gamma == doctest::Approx(0.7));
    CHECK(single.params_at(0).mu == 4.0);
}

TEST_CASE("sweep validation rejects bad grids and endpoint params") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.0, 2.0, 0.003);
    CHECK_NOTHROW(s.validate());

    auto bad_step = s;
    bad_step.step = 0.0;
    CHECK_THROWS_AS(bad_step.validate(), kmap::ValidationError);

    auto inverted = s;
    inverted.lo = 2.0;
    inverted.hi = 0.0;
    CHECK_THROWS_AS(inverted.validate(), kmap::ValidationError);

    auto out_of_range = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2},
                              0.0, 2.5, 0.5);
    CHECK_THROWS_AS(out_of_range.validate(), kmap::ValidationError);

    auto mu_high = sweep(MapId::Fog, SweptParam::Mu, Params{4, 2}, 0.0, 4.5, 0.5);
    CHECK_THROWS_AS(mu_high.validate(), kmap::ValidationError);
}

TEST_CASE("bifurcation scan fills the interval at full slope") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 2.0, 2.0, 1.0);
    s.transient = 400;
    s.length = 100000;
    auto t = kmap::bifurcation_scan(s);
    REQUIRE(t.params.size() == 1);
    REQUIRE(t.samples[0].size() == 500);  // thinned deterministically
    CHECK(span(t.samples[0]) > 0.99);

    auto full = kmap::bifurcation_scan(s, 0);
    CHECK(full.samples[0].size() == 100000);
}

TEST_CASE("bifurcation scan near the contracting regime stays banded") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.25, 0.25, 1.0);
    s.transient = 200;
    s.length = 2000;
    auto t = kmap::bifurcation_scan(s, 0);
    REQUIRE(t.samples[0].size() == 2000);
    // mu*gamma = 1 makes the fixed point marginal; convergence is slow,
    // so the samples form a narrow band rather than a point.
    CHECK(span(t.samples[0]) < 0.05);
    for (double v : t.samples[0]) CHECK(v < 0.05);
}

TEST_CASE("zoomed scan spreads a microscopic window across the interval") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.6, 0.6, 1.0);
    s.transient = 400;
    s.length = 20000;
    s.k = 4;
    auto t = kmap::bifurcation_scan(s, 0);
    CHECK(span(t.samples[0]) > 0.99);

    // Without the zoom the same orbit is confined.
    s.k = 0;
    auto raw = kmap::bifurcation_scan(s, 0);
    CHECK(span(raw.samples[0]) < 0.9);
}

TEST_CASE("worker count never changes scan output") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 1.9, 2.0, 0.01);
    s.transient = 200;
    s.length = 2000;
    auto one = kmap::bifurcation_scan(s);
    s.workers = 4;
    auto four = kmap::bifurcation_scan(s);
    REQUIRE(one.params == four.params);
    REQUIRE(one.samples.size() == four.samples.size());
    for (std::size_t i = 0; i < one.samples.size(); ++i)
        CHECK(one.samples[i] == four.samples[i]);  // bitwise
}

TEST_CASE("exponent curve reproduces the tent closed form") {
    auto s = sweep(MapId::Tent, SweptParam::Gamma, Params{4, 2}, 1.2, 2.0, 0.1);
    s.length = 20000;
    auto c = kmap::lyapunov_curve(s);
    REQUIRE(c.params.size() == 9);
    for (std::size_t i = 0; i < c.params.size(); ++i) {
        CHECK(c.lambdas[i] ==
              doctest::Approx(std::log(c.params[i])).epsilon(1e-9));
        CHECK(c.classes[i] == kmap::StabilityClass::Positive);
    }
}

TEST_CASE("composed exponent rises with the tent slope") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 1.2, 2.0, 0.05);
    s.length = 20000;
    s.workers = 2;
    auto c = kmap::lyapunov_curve(s);
    REQUIRE(c.params.size() == 17);
    for (std::size_t i = 1; i < c.lambdas.size(); ++i)
        CHECK(c.lambdas[i] >= c.lambdas[i - 1] - 0.01);
    CHECK(c.lambdas.front() > 0.3);
    CHECK(c.lambdas.back() > 1.2);
}

TEST_CASE("marginal point classifies as zero exponent") {
    auto s = sweep(MapId::Fog, SweptParam::Gamma, Params{4, 2}, 0.25, 0.25, 1.0);
    s.length = 100000;
    auto c = kmap::lyapunov_curve(s);
    REQUIRE(c.lambdas.size() == 1);
    CHECK(std::fabs(c.lambdas[0]) < 1e-3);
    CHECK(c.classes[0] == kmap::StabilityClass::Zero);
}

TEST_CASE("superstable grid point yields -inf instead of aborting") {
    auto s = sweep(MapId::Logistic, SweptParam::Mu, Params{4, 2}, 2.0, 2.0, 1.0);
    s.x0 = "0.5";
    s.transient = 0;
    s.length = 100;
    auto c = kmap::lyapunov_curve(s);
    REQUIRE(c.lambdas.size() == 1);
    CHECK(std::isinf(c.lambdas[0]));
    CHECK(c.lambdas[0] < 0);
    CHECK(c.classes[0] == kmap::StabilityClass::Negative);
}

TEST_CASE("lambda classification bands") {
    CHECK(kmap::classify_lambda(0.5) == kmap::StabilityClass::Positive);
    CHECK(kmap::classify_lambda(-0.5) == kmap::StabilityClass::Negative);
    CHECK(kmap::classify_lambda(0.0005) == kmap::StabilityClass::Zero);
    CHECK(kmap::classify_lambda(-0.0005) == kmap::StabilityClass::Zero);
    CHECK(kmap::classify_lambda(0.002) == kmap::StabilityClass::Positive);
    CHECK(kmap::classify_lambda(-0.002) == kmap::StabilityClass::Negative);
}

TEST_CASE("histogram counts every emitted point exactly once") {
    auto h = kmap::frequency_histogram(
        orbit(MapId::Fog, 4, 2, "0.1", 400, 100000), 500);
    CHECK(h.bins() == 500);
    CHECK(h.total == 100000);
    CHECK(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}) ==
          100000);
}

TEST_CASE("full-slope density is U-shaped") {
    auto h = kmap::frequency_histogram(
        orbit(MapId::Fog, 4, 2, "0.1", 400, 100000), 500);
    auto mean_over = [&](unsigned lo, unsigned hi) {
        double s = 0.0;
        for (unsigned i = lo; i < hi; ++i) s += static_cast<double>(h.counts[i]);
        return s / static_cast<double>(hi - lo);
    };
    const double edges = 0.5 * (mean_over(0, 25) + mean_over(475, 500));
    const double middle = mean_over(225, 275);
    CHECK(edges / middle > 2.0);
}

TEST_CASE("an attracting orbit lands in a single bin") {
    // mu*gamma = 1: after a long transient the orbit is squeezed against
    // the origin, entirely inside the first of 500 bins.
    auto h = kmap::frequency_histogram(
        orbit(MapId::Fog, 4, 0.25, "0.1", 1000000, 10000), 500);
    CHECK(h.counts[0] == 10000);

    // The mu = 2 orbit parks on the rounded map's fixed point one ulp
    // below 1/2, so every sample falls in the bin just left of it.
    auto h2 = kmap::frequency_histogram(
        orbit(MapId::Logistic, 2, 2, "0.3", 100, 5000), 500);
    CHECK(h2.counts[249] == 5000);
}

TEST_CASE("zoomed emission flattens the histogram") {
    auto h = kmap::frequency_histogram(
        orbit(MapId::Fog, 4, 2, "0.1", 400, 200000, 6,
              PrecisionMode::extended(128)),
        10);
    std::vector<std::uint64_t> counts = h.counts;
    auto r = kmap::chi_square_uniform(counts);
    CHECK(r.p_value > 0.001);
}

TEST_CASE("histogram needs at least two bins") {
    CHECK_THROWS_AS(
        kmap::frequency_histogram(orbit(MapId::Fog, 4, 2, "0.1", 0, 10), 1),
        kmap::ValidationError);
    CHECK_THROWS_AS(
        kmap::frequency_histogram(orbit(MapId::Fog, 4, 2, "0.1", 0, 10), 0),
        kmap::ValidationError);
}

TEST_CASE("cobweb path alternates risers and runs through exact corners") {
    auto t = kmap::cobweb_trace(MapId::Logistic, Params{4, 2},
                                kmap::make_value("0.5", PrecisionMode::native()),
                                2);
    REQUIRE(t.path.size() == 4);

    CHECK(t.path[0].kind == kmap::CobwebKind::Vertical);
    CHECK(t.path[0].x0 == 0.5);
    CHECK(t.path[0].y0 == 0.0);
    CHECK(t.path[0].y1 == 1.0);

    CHECK(t.path[1].kind == kmap::CobwebKind::Horizontal);
    CHECK(t.path[1].x1 == 1.0);
    CHECK(t.path[1].y1 == 1.0);

    CHECK(t.path[2].kind == kmap::CobwebKind::Vertical);
    CHECK(t.path[2].x0 == 1.0);
    CHECK(t.path[2].y1 == 0.0);

    CHECK(t.path[3].kind == kmap::CobwebKind::Horizontal);
    CHECK(t.path[3].x1 == 0.0);

    CHECK(t.diagonal.x0 == 0.0);
    CHECK(t.diagonal.y1 == 1.0);
    CHECK(t.diagonal.kind == kmap::CobwebKind::Diagonal);
}

TEST_CASE("cobweb curve is a connected graph over the unit interval") {
    auto t = kmap::cobweb_trace(MapId::Fog, Params{4, 2},
                                kmap::make_value("0.3", PrecisionMode::native()),
                                0, 512);
    CHECK(t.path.empty());
    REQUIRE(t.curve.size() == 512);
    CHECK(t.curve.front().x0 == 0.0);
    CHECK(t.curve.back().x1 == 1.0);
    for (std::size_t i = 1; i < t.curve.size(); ++i) {
        CHECK(t.curve[i].x0 == t.curve[i - 1].x1);
        CHECK(t.curve[i].y0 == t.curve[i - 1].y1);
    }
    for (const auto& seg : t.curve) CHECK(seg.kind == kmap::CobwebKind::Curve);
}

TEST_CASE("cobweb contraction shrinks the staircase") {
    auto t = kmap::cobweb_trace(MapId::Fog, Params{4, 0.25},
                                kmap::make_value("0.3", PrecisionMode::native()),
                                1000);
    REQUIRE(t.path.size() == 2000);
    const auto& last = t.path[t.path.size() - 2];  // final vertical
    CHECK(last.kind == kmap::CobwebKind::Vertical);
    CHECK(std::fabs(last.y1 - last.y0) < 1e-4);
}

TEST_CASE("csv writers emit the documented schemas") {
    std::ostringstream os;

    kmap::BifurcationTable bt;
    bt.params = {1.5};
    bt.samples = {{0.25, 0.75}};
    kmap::write_bifurcation_csv(os, bt);
    const std::string bif_text = os.str();
    CHECK(bif_text.substr(0, 8) == "param,x\n");
    CHECK(std::count(bif_text.begin(), bif_text.end(), '\n') == 3);

    os.str("");
    kmap::LyapunovCurve lc;
    lc.params = {2.0};
    lc.lambdas = {-INFINITY};
    lc.classes = {kmap::StabilityClass::Negative};
    kmap::write_lyapunov_csv(os, lc);
    CHECK(os.str().find("param,lambda,class\n") == 0);
    CHECK(os.str().find("-inf") != std::string::npos);
    CHECK(os.str().find("negative") != std::string::npos);

    os.str("");
    kmap::Histogram h;
    h.counts = {2, 0, 3};
    h.total = 5;
    kmap::write_histogram_csv(os, h);
    const std::string hist_text = os.str();
    CHECK(hist_text.find("bin_lo,bin_hi,count\n") == 0);
    CHECK(std::count(hist_text.begin(), hist_text.end(), '\n') == 4);

    os.str("");
    auto cw = kmap::cobweb_trace(MapId::Tent, Params{4, 2},
                                 kmap::make_value("0.25", PrecisionMode::native()),
                                 1, 4);
    kmap::write_cobweb_csv(os, cw);
    CHECK(os.str().find("x0,y0,x1,y1,kind\n") == 0);
    CHECK(os.str().find("curve") != std::string::npos);
    CHECK(os.str().find("diagonal") != std::string::npos);
    CHECK(os.str().find("vertical") != std::string::npos);
    CHECK(os.str().find("horizontal") != std::string::npos);

    os.str("");
    std::vector<kmap::PhaseValue> pts = {
        kmap::make_value("0.5", PrecisionMode::native())};
    kmap::write_orbit_csv(os, pts);
    CHECK(os.str() == "x\n0.5\n");
}
