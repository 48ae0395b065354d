#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"

#include "cumac/errors.hpp"
#include "cumac/speculation.hpp"

using namespace cumac;

namespace {

SpeculationConfig model(std::uint32_t p, std::uint32_t d, std::vector<std::int64_t> q16,
                        std::uint32_t mask = 0) {
    SpeculationConfig c;
    c.p = p;
    c.d = d;
    c.coeffs_q16 = std::move(q16);
    c.lsb_ignore = mask;
    return c;
}

std::string temp_path(const char* name) {
    return std::string("speculation_test_") + name + ".csv";
}

}  // namespace

TEST_CASE("persistence predicts the last observed value") {
    SpeculationConfig c = persistence_config();
    CHECK(c.p == 1);
    CHECK(c.d == 0);
    CHECK(c.coeffs_q16 == std::vector<std::int64_t>{1 << 16});
    CHECK(predict_next({10, 10, 10}, c) == 10);
    CHECK(predict_next({3, -7, 42}, c) == 42);
    CHECK(predict_next({-5}, c) == -5);
}

TEST_CASE("drift model extrapolates a linear trend one step") {
    SpeculationConfig c = model(1, 1, {1 << 16});
    CHECK(predict_next({1, 4, 7}, c) == 10);
    CHECK(predict_next({10, 10, 10}, c) == 10);
    CHECK(predict_next({100, 90, 80}, c) == 70);
    CHECK(predict_next({-6, -4, -2}, c) == 0);
}

TEST_CASE("short history degrades to persistence, empty history is an error") {
    SpeculationConfig wide = model(2, 1, {1 << 16, 0});
    CHECK(wide.history_min() == 3);
    CHECK(predict_next({5}, wide) == 5);
    CHECK(predict_next({2, 9}, wide) == 9);
    CHECK_THROWS_AS(predict_next({}, wide), ConfigError);
}

TEST_CASE("fixed point prediction rounds halves toward positive infinity") {
    SpeculationConfig half = model(1, 0, {32768});  // 0.5 * last value
    CHECK(predict_next({1}, half) == 1);
    CHECK(predict_next({-1}, half) == 0);
    CHECK(predict_next({3}, half) == 2);
    CHECK(predict_next({-3}, half) == -1);
    CHECK(predict_next({4}, half) == 2);
}

TEST_CASE("model parameters are validated") {
    CHECK_THROWS_AS(model(0, 0, {}).validate(), ConfigError);
    CHECK_THROWS_AS(model(17, 0, std::vector<std::int64_t>(17, 0)).validate(), ConfigError);
    CHECK_THROWS_AS(model(1, 5, {1 << 16}).validate(), ConfigError);
    CHECK_THROWS_AS(model(2, 0, {1 << 16}).validate(), ConfigError);
    CHECK_THROWS_AS(model(1, 0, {1 << 16}, 65).validate(), ConfigError);
    CHECK_NOTHROW(model(1, 4, {1 << 16}, 64).validate());
}

TEST_CASE("masked comparison uses an arithmetic shift") {
    CHECK(masked_equal(12, 12, 0));
    CHECK_FALSE(masked_equal(3, 4, 0));
    CHECK(masked_equal(4, 7, 2));
    CHECK(masked_equal(-5, -8, 2));   // both shift to -2
    CHECK_FALSE(masked_equal(-5, 8, 2));
    CHECK(masked_equal(7, -9, 64));   // everything collapses
    CHECK(masked_equal(INT64_MIN, INT64_MAX, 64));
}

TEST_CASE("fitting a constant trace falls back to persistence") {
    Trace t = make_constant_trace(42, 512);
    SpeculationConfig c = fit_ar(t, 1, 1);
    CHECK(c.fallback_persistence);
    CHECK(predict_next({42, 42}, c) == 42);
    CHECK(speculation_error_rate(t, c) == 0.0);
}

TEST_CASE("fitting a pure drift recovers the exact slope model") {
    Trace t = make_drift_trace(0, 3, 1024);
    SpeculationConfig c = fit_ar(t, 1, 1);
    CHECK_FALSE(c.fallback_persistence);
    CHECK(c.coeffs_q16 == std::vector<std::int64_t>{1 << 16});
    CHECK(predict_next({0, 3, 6}, c) == 9);
    CHECK(speculation_error_rate(t, c) == 0.0);
}

TEST_CASE("fitting a noiseless ar trace recovers the generator coefficients") {
    Trace t = make_ar_trace({0.5, -0.3, 0.1}, 1, 4096, 1e6, 0.0, 99);
    SpeculationConfig c = fit_ar(t, 3, 1);
    REQUIRE(c.coeffs_q16.size() == 3);
    CHECK_FALSE(c.fallback_persistence);
    const std::int64_t targets[3] = {32768, -19661, 6554};
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::llabs(c.coeffs_q16[i] - targets[i]) <= 64);
    }
}

TEST_CASE("error rate walk on a jittery ramp, with and without masking") {
    // Ramp of slope 8 with Bernoulli(0.2) unit jitter. The drift model cannot
    // predict the jitter bit, so the raw disagreement rate sits near
    // 2 p (1 - p) (1 + p); masking low bits absorbs most of it.
    Trace t = make_jitter_ramp_trace(8, 0.2, 100000, 77);
    SpeculationConfig drift = model(1, 1, {1 << 16});
    double raw = speculation_error_rate(t, drift);
    CHECK(raw == doctest::Approx(0.4784).epsilon(1e-9));
    CHECK(raw > 0.40);
    CHECK(raw < 0.56);

    SpeculationConfig masked = model(1, 1, {1 << 16}, 3);
    double coarse = speculation_error_rate(t, masked);
    CHECK(coarse == doctest::Approx(0.1591).epsilon(1e-9));
    CHECK(coarse <= raw);

    // Widening the mask can only remove disagreements.
    double prev = raw;
    for (std::uint32_t bits : {1u, 2u, 3u, 8u, 64u}) {
        SpeculationConfig c = model(1, 1, {1 << 16}, bits);
        double r = speculation_error_rate(t, c);
        CHECK(r <= prev + 1e-12);
        prev = r;
    }
    CHECK(prev == 0.0);  // 64-bit mask collapses every comparison
}

TEST_CASE("error rate walk validates its arguments") {
    Trace t = make_drift_trace(0, 1, 100);
    SpeculationConfig c = persistence_config();
    CHECK_THROWS_AS(speculation_error_rate(t, c, 0.0), ConfigError);
    CHECK_THROWS_AS(speculation_error_rate(t, c, 1.0), ConfigError);
    // A split that leaves less history than the model needs is rejected.
    Trace tiny = make_drift_trace(0, 1, 4);
    CHECK_THROWS_AS(speculation_error_rate(tiny, model(2, 1, {1 << 16, 0}), 0.5), ConfigError);
}

TEST_CASE("autocorrelation of white noise is flat") {
    Trace t = make_ar_trace({0.0}, 0, 10000, 1000.0, 1000.0, 31);
    auto a = acf(t.values, 20);
    CHECK(a[0] == doctest::Approx(1.0));
    for (std::size_t k = 1; k <= 20; ++k) {
        CHECK(std::abs(a[k]) < 0.05);
    }
}

TEST_CASE("autocorrelation of an ar(1) process decays geometrically") {
    Trace t = make_ar_trace({0.8}, 0, 20000, 1000.0, 1000.0, 32);
    auto a = acf(t.values, 8);
    for (std::size_t k = 1; k <= 5; ++k) {
        CHECK(a[k] == doctest::Approx(std::pow(0.8, static_cast<double>(k))).epsilon(0.08));
    }
    auto p = pacf(t.values, 8);
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.8).epsilon(0.05));
    for (std::size_t k = 2; k <= 6; ++k) {
        CHECK(std::abs(p[k]) < 0.05);
    }
}

TEST_CASE("partial autocorrelation cuts off at the ar order") {
    Trace t = make_ar_trace({0.5, 0.3}, 0, 20000, 1000.0, 1000.0, 33);
    auto p = pacf(t.values, 8);
    // For an AR(2) process pacf[1] = phi1 / (1 - phi2) and pacf[2] = phi2.
    CHECK(p[1] == doctest::Approx(0.5 / 0.7).epsilon(0.05));
    CHECK(p[2] == doctest::Approx(0.3).epsilon(0.1));
    for (std::size_t k = 3; k <= 8; ++k) {
        CHECK(std::abs(p[k]) < 0.05);
    }
}

TEST_CASE("correlation helpers reject degenerate series") {
    std::vector<std::int64_t> flat(64, 9);
    CHECK_THROWS_AS(acf(flat, 4), ConfigError);
    std::vector<std::int64_t> tiny = {1, 2, 3};
    CHECK_THROWS_AS(acf(tiny, 10), ConfigError);
}

TEST_CASE("trace csv round trips through save and load") {
    Trace t = make_torque_trace(257, 5, 20.0);
    std::string path = temp_path("roundtrip");
    save_trace_csv(t, path);
    Trace back = load_trace_csv(path);
    CHECK(back.values == t.values);
    CHECK(back.period_ms == doctest::Approx(20.0));
    CHECK(back.name == path);  // loader names the trace after the file
    std::remove(path.c_str());
}

TEST_CASE("trace csv loader rejects malformed files") {
    CHECK_THROWS_AS(load_trace_csv("no_such_trace_file.csv"), FormatError);

    std::string bad_header = temp_path("bad_header");
    {
        std::FILE* f = std::fopen(bad_header.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("time,value\n0,1\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_trace_csv(bad_header), FormatError);
    std::remove(bad_header.c_str());

    std::string bad_row = temp_path("bad_row");
    {
        std::FILE* f = std::fopen(bad_row.c_str(), "w");
        REQUIRE(f != nullptr);
        std::fputs("timestamp_ms,value\n0,1\nten,2\n", f);
        std::fclose(f);
    }
    CHECK_THROWS_AS(load_trace_csv(bad_row), FormatError);
    std::remove(bad_row.c_str());
}

TEST_CASE("synthetic generators produce the advertised shapes") {
    Trace c = make_constant_trace(-4, 10);
    CHECK(c.values == std::vector<std::int64_t>(10, -4));

    Trace d = make_drift_trace(5, -2, 4);
    CHECK(d.values == std::vector<std::int64_t>{5, 3, 1, -1});

    Trace j = make_jitter_ramp_trace(8, 0.0, 5, 1);
    CHECK(j.values == std::vector<std::int64_t>{0, 8, 16, 24, 32});

    // Deterministic for a fixed seed.
    Trace t1 = make_torque_trace(500, 9);
    Trace t2 = make_torque_trace(500, 9);
    CHECK(t1.values == t2.values);
    CHECK_THROWS_AS(make_ar_trace({}, 0, 16, 1.0, 0.0, 1), ConfigError);
}
