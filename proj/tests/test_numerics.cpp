#include <cmath>
#include <cstdint>
#include <random>
#include <variant>

#include "doctest.h"
#include "kmap/errors.hpp"
#include "kmap/maps.hpp"
#include "kmap/numerics.hpp"

using kmap::BigFloat;
using kmap::PhaseValue;
using kmap::PrecisionMode;

TEST_CASE("precision mode parsing and limits") {
    CHECK(PrecisionMode::parse("native").is_native());
    CHECK(PrecisionMode::parse("native").bits() == 53);
    CHECK(PrecisionMode::parse("extended").bits() == 512);
    CHECK(PrecisionMode::parse("extended:128").bits() == 128);
    CHECK(PrecisionMode::parse("extended:128").str() == "extended:128");
    CHECK(PrecisionMode::parse(PrecisionMode::extended(8192).str()) ==
          PrecisionMode::extended(8192));

    CHECK_THROWS_AS(PrecisionMode::parse("quad"), kmap::ValidationError);
    CHECK_THROWS_AS(PrecisionMode::parse("extended:"), kmap::ValidationError);
    CHECK_THROWS_AS(PrecisionMode::parse("extended:12x"), kmap::ValidationError);
    CHECK_THROWS_AS(PrecisionMode::extended(32), kmap::ValidationError);
    CHECK_THROWS_AS(PrecisionMode::extended(16384), kmap::ValidationError);
}

TEST_CASE("decimal capacity and round-trip widths") {
    // floor(bits * log10 2): 512 * 0.30103 = 154.1
    CHECK(PrecisionMode::extended(512).decimal_digits() == 154);
    CHECK(PrecisionMode::extended(64).decimal_digits() == 19);
    CHECK(PrecisionMode::native().decimal_digits() == 15);
    CHECK(PrecisionMode::native().roundtrip_digits() == 17);
    CHECK(PrecisionMode::extended(512).roundtrip_digits() >= 155);
}

TEST_CASE("make_value accepts the closed unit interval and rejects the rest") {
    CHECK(kmap::make_value("0", PrecisionMode::native()).as_double() == 0.0);
    CHECK(kmap::make_value("1", PrecisionMode::native()).as_double() == 1.0);
    CHECK(kmap::make_value("0.5", PrecisionMode::native()).as_double() == 0.5);
    CHECK(kmap::make_value("5e-1", PrecisionMode::native()).as_double() == 0.5);

    for (const char* bad : {"1.0000001", "-0.1", "abc", "", "0.5x", "0.5 0.6", "nan"}) {
        CAPTURE(bad);
        CHECK_THROWS_AS(kmap::make_value(bad, PrecisionMode::native()),
                        kmap::ValidationError);
        CHECK_THROWS_AS(kmap::make_value(bad, PrecisionMode::extended(128)),
                        kmap::ValidationError);
    }
}

TEST_CASE("extended parse keeps digits a double cannot") {
    // 0.1 is inexact in binary; at 512 bits the stored value sits much
    // closer to 1/10 than the double does.
    PhaseValue x = kmap::make_value("0.1", PrecisionMode::extended(512));
    CHECK(!x.is_native());
    CHECK(x.as_double() == doctest::Approx(0.1).epsilon(1e-15));
    const BigFloat& b = std::get<BigFloat>(x.repr());
    BigFloat ten_b = 10.0 * b;
    // 10 * (1/10 rounded at 512 bits) differs from 1 by < 2^-500.
    BigFloat err = 1.0 - ten_b;
    CHECK(std::fabs(err.to_double()) < 1e-140);
}

TEST_CASE("decimal round trip is exact in both modes") {
    std::mt19937_64 eng(11);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = uni(eng);
        PhaseValue x = PhaseValue::of(v, PrecisionMode::native());
        PhaseValue y = kmap::make_value(kmap::to_decimal_string(x),
                                        PrecisionMode::native());
        CHECK(y.as_double() == v);
    }

    // Extended: run a few chaotic steps so the low bits are populated,
    // then round trip through text at full width.
    PrecisionMode ext = PrecisionMode::extended(512);
    PhaseValue x = kmap::make_value("0.1234567", ext);
    kmap::Params p{4.0, 2.0};
    for (int i = 0; i < 40; ++i) x = kmap::step(kmap::MapId::Fog, x, p);
    PhaseValue y = kmap::make_value(kmap::to_decimal_string(x), ext);
    CHECK(std::get<BigFloat>(x.repr()) == std::get<BigFloat>(y.repr()));
}

TEST_CASE("frac_bits matches hand values") {
    CHECK(kmap::frac_bits(0.5, 1) == 1);
    CHECK(kmap::frac_bits(0.25, 2) == 1);
    CHECK(kmap::frac_bits(0.75, 2) == 3);
    CHECK(kmap::frac_bits(0.5, 32) == 0x80000000u);
    CHECK(kmap::frac_bits(0.75, 32) == 0xC0000000u);
    CHECK(kmap::frac_bits(0.0, 32) == 0);
    CHECK(kmap::frac_bits(1.0, 32) == 0);  // wraps
    CHECK(kmap::frac_bits(std::ldexp(1.0, -64), 64) == 1);
    CHECK(kmap::frac_bits(0.5, 64) == (std::uint64_t{1} << 63));

    CHECK_THROWS_AS(kmap::frac_bits(0.5, 0), kmap::ValidationError);
    CHECK_THROWS_AS(kmap::frac_bits(0.5, 65), kmap::ValidationError);
    CHECK_THROWS_AS(kmap::frac_bits(-0.1, 8), kmap::ValidationError);
    CHECK_THROWS_AS(kmap::frac_bits(1.1, 8), kmap::ValidationError);
}

TEST_CASE("frac_bits agrees across representations of the same double") {
    PrecisionMode ext = PrecisionMode::extended(256);
    std::mt19937_64 eng(12);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double v = uni(eng);
        for (unsigned n : {1u, 8u, 32u, 53u, 64u}) {
            CHECK(kmap::frac_bits(v, n) ==
                  kmap::frac_bits(PhaseValue::of(v, ext), n));
        }
    }
}

TEST_CASE("frac_bits is monotone on [0, 1)") {
    std::mt19937_64 eng(13);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 2000; ++i) {
        double a = uni(eng) * 0.999;
        double b = uni(eng) * 0.999;
        if (a > b) std::swap(a, b);
        for (unsigned n : {1u, 8u, 32u, 64u}) {
            CHECK(kmap::frac_bits(a, n) <= kmap::frac_bits(b, n));
        }
    }
}

TEST_CASE("single map steps agree between native and extended arithmetic") {
    // One step accumulates a handful of roundings on intermediates of
    // size O(1), amplified by slopes of at most mu * gamma = 8, so the
    // two arithmetics must agree to ~2^-50 absolutely. (Relative
    // agreement is impossible near the fold: tent's 1 - y cancels.)
    PrecisionMode ext = PrecisionMode::extended(512);
    const double tol = std::ldexp(1.0, -50);
    std::mt19937_64 eng(14);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double x = uni(eng);
        kmap::Params p{uni(eng) * 4.0, uni(eng) * 2.0};
        for (kmap::MapId id : {kmap::MapId::Logistic, kmap::MapId::Tent,
                               kmap::MapId::Fog, kmap::MapId::Gof}) {
            const double native = kmap::step(id, x, p);
            const double extended =
                kmap::step(id, PhaseValue::of(x, ext), p).as_double();
            CAPTURE(static_cast<int>(id));
            CAPTURE(x);
            CHECK(std::fabs(native - extended) <= tol);
        }
    }
}

TEST_CASE("phase values reject non-finite doubles") {
    CHECK_THROWS_AS(PhaseValue::of(std::nan(""), PrecisionMode::native()),
                    kmap::ValidationError);
    CHECK_THROWS_AS(PhaseValue::of(INFINITY, PrecisionMode::extended(64)),
                    kmap::ValidationError);
}

TEST_CASE("big float floor and frac cover negatives") {
    BigFloat a(-1.25, 128);
    CHECK(floor(a).to_double() == -2.0);
    CHECK(frac(a).to_double() == 0.75);
    BigFloat b(3.0, 128);
    CHECK(frac(b).to_double() == 0.0);
}
