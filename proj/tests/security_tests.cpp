#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "doctest.h"

#include "cumac/errors.hpp"
#include "cumac/mac.hpp"
#include "cumac/scheme.hpp"
#include "cumac/security.hpp"
#include "cumac/speculation.hpp"

using namespace cumac;

namespace {

const SecretKey& test_key() {
    static SecretKey key = key_gen(128, 7);
    return key;
}

SchemeParams cumulative_params(SchemeKind kind, std::uint32_t n = 4) {
    SchemeParams p;
    p.kind = kind;
    p.mac = MacParams{128, n, 128 / n};
    p.algo = MacAlgo::aes_cmac;
    if (kind == SchemeKind::cumac_spec) {
        p.speculation = persistence_config();
    }
    return p;
}

ExperimentConfig toy_experiment(AttackStrategy strategy, std::uint32_t r,
                                std::size_t trials, std::uint64_t seed) {
    ExperimentConfig c;
    c.kind = SchemeKind::cumac;
    c.mac = MacParams{8, 4, 2};
    c.algo = MacAlgo::toy;
    c.lambda_bits = 64;
    c.r = r;
    c.strategy = strategy;
    c.trials = trials;
    c.seed = seed;
    c.payload_bits = 16;
    return c;
}

// Three-sigma binomial window around a target rate.
bool within_3_sigma(double observed, double rate, std::size_t trials) {
    double sigma = std::sqrt(rate * (1.0 - rate) / static_cast<double>(trials));
    return observed >= rate - 3.0 * sigma && observed <= rate + 3.0 * sigma;
}

}  // namespace

TEST_CASE("recovered segments reproduce the true mac rows") {
    SchemeParams p = cumulative_params(SchemeKind::cumac);  // n=4, l=32
    std::vector<BitString> payloads;
    for (std::int64_t i = 1; i <= 12; ++i) {
        payloads.push_back(value_payload(i * 501, 32));
    }
    auto transcript = run_cumulative(p, test_key(), payloads);

    for (std::uint32_t i_star = 1; i_star <= 9; ++i_star) {
        for (std::uint32_t k = 1; k <= 4; ++k) {
            BitString segment =
                recover_segment_cumac(transcript, p.mac, i_star, k);
            CHECK(segment ==
                  transcript.sigma[i_star - 1].slice((k - 1) * 32, 32));
        }
    }
}

TEST_CASE("a single segment geometry degenerates to reading the tag") {
    MacParams geometry{8, 1, 8};
    SchemeParams p;
    p.kind = SchemeKind::cumac;
    p.mac = geometry;
    p.algo = MacAlgo::toy;
    auto transcript = run_cumulative(p, test_key(),
                                     {value_payload(3, 16), value_payload(9, 16)});
    CHECK(recover_segment_cumac(transcript, geometry, 2, 1) == transcript.sigma[1]);
    CHECK(transcript.tags[1] == transcript.sigma[1]);
}

TEST_CASE("recovery validates its arguments and its transcript") {
    SchemeParams p = cumulative_params(SchemeKind::cumac);
    auto transcript = run_cumulative(
        p, test_key(), {value_payload(1, 16), value_payload(2, 16)});

    CHECK_THROWS_AS(recover_segment_cumac(transcript, p.mac, 0, 1), ConfigError);
    CHECK_THROWS_AS(recover_segment_cumac(transcript, p.mac, 1, 0), ConfigError);
    CHECK_THROWS_AS(recover_segment_cumac(transcript, p.mac, 1, 5), ConfigError);
    // The covering tag for (i_star=2, k=2) was never emitted.
    CHECK_THROWS_AS(recover_segment_cumac(transcript, p.mac, 2, 2), ConfigError);

    SchemeParams s = cumulative_params(SchemeKind::cumac_spec);
    std::vector<BitString> constant(7, value_payload(4, 16));
    auto spec_transcript = run_cumulative(s, test_key(), constant);
    CHECK_THROWS_AS(recover_segment_cumacs(spec_transcript, constant, s.mac,
                                           6, 1, 0),
                    ConfigError);
    CHECK_THROWS_AS(recover_segment_cumacs(spec_transcript, constant, s.mac,
                                           6, 1, 5),
                    ConfigError);
    // Backward recovery of a message the transcript starts after.
    CHECK_THROWS_AS(recover_segment_cumacs(spec_transcript, constant, s.mac,
                                           2, 4, 2),
                    ConfigError);
}

TEST_CASE("speculative recovery assembles the whole mac when predictions hit") {
    SchemeParams p = cumulative_params(SchemeKind::cumac_spec);  // n=4
    std::vector<BitString> constant(7, value_payload(42, 16));   // 2n-1 messages
    auto transcript = run_cumulative(p, test_key(), constant);

    for (std::uint32_t r = 1; r <= 4; ++r) {
        std::uint32_t i_star = 2 * 4 - r;
        BitString assembled;
        for (std::uint32_t k = 1; k <= 4; ++k) {
            auto segment =
                recover_segment_cumacs(transcript, constant, p.mac, i_star, k, r);
            REQUIRE(segment.has_value());
            assembled.append(*segment);
        }
        CHECK(assembled == transcript.sigma[i_star - 1]);
    }
}

TEST_CASE("speculative recovery yields nothing for segments behind a miss") {
    SchemeParams p = cumulative_params(SchemeKind::cumac_spec);
    std::vector<BitString> ramp;  // strictly increasing: every prediction misses
    for (std::int64_t i = 1; i <= 7; ++i) {
        ramp.push_back(value_payload(i * 1000, 16));
    }
    auto transcript = run_cumulative(p, test_key(), ramp);

    const std::uint32_t r = 2;
    const std::uint32_t i_star = 2 * 4 - r;  // 6
    for (std::uint32_t k = 1; k <= 4; ++k) {
        auto segment = recover_segment_cumacs(transcript, ramp, p.mac, i_star, k, r);
        if (k <= r) {
            // Forward segments still come out of the held tags exactly.
            REQUIRE(segment.has_value());
            CHECK(*segment == transcript.sigma[i_star - 1].slice((k - 1) * 32, 32));
        } else {
            CHECK_FALSE(segment.has_value());
        }
    }
}

TEST_CASE("experiment configurations are validated") {
    ExperimentConfig c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    CHECK_NOTHROW(c.validate());

    c.kind = SchemeKind::truncated;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    c.mac = MacParams{8, 1, 8};
    CHECK_THROWS_AS(c.validate(), ConfigError);  // needs two segments

    c = toy_experiment(AttackStrategy::recovery, 0, 1000, 1);
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = toy_experiment(AttackStrategy::recovery, 5, 1000, 1);
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    c.beta = -0.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.beta = 1.1;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    c.payload_bits = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.payload_bits = 65;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    c.lambda_bits = 12;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c.lambda_bits = 64;
    c.algo = MacAlgo::aes_cmac;
    CHECK_THROWS_AS(c.validate(), ConfigError);  // full MAC takes a 128-bit key

    // Success rates below measurability are rejected with guidance.
    c = toy_experiment(AttackStrategy::recovery, 2, 1000, 1);
    c.mac = MacParams{128, 8, 16};
    try {
        c.validate();
        FAIL("expected a measurability rejection");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("shrink") != std::string::npos);
    }

    c = toy_experiment(AttackStrategy::recovery, 1, 200'000'000, 1);
    CHECK_THROWS_AS(c.validate(), ConfigError);

    c = toy_experiment(AttackStrategy::recovery, 1, 1000, 1);
    c.kind = SchemeKind::cumac_spec;
    c.speculation.p = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);

    CHECK(std::string(attack_strategy_name(AttackStrategy::random_guess)) ==
          "random_guess");
    CHECK(std::string(attack_strategy_name(AttackStrategy::recovery)) == "recovery");
}

TEST_CASE("predicted rates follow the closed forms") {
    ExperimentConfig c = toy_experiment(AttackStrategy::random_guess, 2, 1000, 1);
    CHECK(predicted_success_rate(c) == doctest::Approx(1.0 / 16));
    c.strategy = AttackStrategy::recovery;
    CHECK(predicted_success_rate(c) == doctest::Approx(1.0 / 16));

    c.kind = SchemeKind::cumac_spec;
    c.r = 1;
    c.beta = 0.0;
    CHECK(predicted_success_rate(c) == doctest::Approx(1.0));
    c.beta = 1.0;
    CHECK(predicted_success_rate(c) == doctest::Approx(1.0 / 64));
    c.beta = 0.5;
    CHECK(predicted_success_rate(c) == doctest::Approx(0.5 + 0.5 / 64));
}

TEST_CASE("tag guessing succeeds at the predicted rate") {
    auto r1 = run_ufcma_r(toy_experiment(AttackStrategy::random_guess, 1, 50000, 3));
    CHECK(r1.predicted_rate == doctest::Approx(0.25));
    CHECK(r1.i_star == 4);  // n - r + 1
    CHECK(within_3_sigma(r1.empirical_rate, 0.25, r1.trials));

    auto r2 = run_ufcma_r(toy_experiment(AttackStrategy::random_guess, 2, 50000, 4));
    CHECK(within_3_sigma(r2.empirical_rate, 0.0625, r2.trials));
    CHECK(r2.empirical_rate < r1.empirical_rate);
}

TEST_CASE("structural forgery against the plain scheme gains nothing") {
    auto result = run_ufcma_r(toy_experiment(AttackStrategy::recovery, 2, 50000, 5));
    CHECK(result.predicted_rate == doctest::Approx(0.0625));
    CHECK(result.i_star == 3);
    CHECK(result.oracle_queries == 3);  // every row but the target's
    CHECK(within_3_sigma(result.empirical_rate, 0.0625, result.trials));
}

TEST_CASE("speculative forgery rates interpolate with the miss rate") {
    ExperimentConfig base = toy_experiment(AttackStrategy::recovery, 1, 0, 6);
    base.kind = SchemeKind::cumac_spec;
    base.speculation = persistence_config();

    base.beta = 0.0;
    base.trials = 2000;
    auto all_hits = run_ufcma_r(base);
    CHECK(all_hits.predicted_rate == doctest::Approx(1.0));
    CHECK(all_hits.empirical_rate == 1.0);
    CHECK(all_hits.i_star == 7);  // 2n - r
    CHECK(all_hits.oracle_queries == 7);

    base.beta = 1.0;
    base.trials = 200000;
    auto all_misses = run_ufcma_r(base);
    CHECK(all_misses.predicted_rate == doctest::Approx(1.0 / 64));
    CHECK(within_3_sigma(all_misses.empirical_rate, 1.0 / 64, all_misses.trials));

    base.beta = 0.5;
    base.trials = 50000;
    auto mixed = run_ufcma_r(base);
    CHECK(mixed.predicted_rate == doctest::Approx(0.5 + 0.5 / 64));
    CHECK(within_3_sigma(mixed.empirical_rate, 0.5 + 0.5 / 64, mixed.trials));
}

TEST_CASE("zero trials auto scale to a measurable budget") {
    ExperimentConfig c = toy_experiment(AttackStrategy::random_guess, 1, 0, 7);
    auto floor_run = run_ufcma_r(c);
    CHECK(floor_run.trials == 1000);  // floor dominates 30 / 0.25

    ExperimentConfig wide = toy_experiment(AttackStrategy::random_guess, 2, 0, 8);
    wide.mac = MacParams{16, 4, 4};
    auto scaled = run_ufcma_r(wide);
    CHECK(scaled.trials == 7680);  // ceil(30 * 2^8)
    CHECK(scaled.empirical_rate > 0.0);
    CHECK(within_3_sigma(scaled.empirical_rate, 1.0 / 256, scaled.trials));
}

TEST_CASE("experiments are reproducible for a fixed seed") {
    ExperimentConfig c = toy_experiment(AttackStrategy::random_guess, 1, 20000, 9);
    auto a = run_ufcma_r(c);
    auto b = run_ufcma_r(c);
    CHECK(a.successes == b.successes);
    CHECK(a.empirical_rate == b.empirical_rate);

    c.seed = 10;
    auto other = run_ufcma_r(c);
    CHECK(other.successes != a.successes);
}
