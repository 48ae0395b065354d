#include "cumac/security.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "cumac/errors.hpp"

namespace cumac {

const char* attack_strategy_name(AttackStrategy strategy) {
    switch (strategy) {
        case AttackStrategy::random_guess: return "random_guess";
        case AttackStrategy::recovery: return "recovery";
    }
    throw ConfigError("unknown attack strategy");
}

namespace {

// Transcript accessor that enforces the experiment's hygiene: the column row
// of the message under recovery must never be read (pass forbidden = 0 for
// columns where any row is fair game).
const BitString& row_at(const std::vector<BitString>& column, std::uint32_t counter,
                        std::uint32_t forbidden, const char* what) {
    if (counter != 0 && counter == forbidden) {
        throw Error(std::string("recovery tried to read the protected ") + what);
    }
    if (counter == 0 || counter > column.size() || column[counter - 1].empty()) {
        throw ConfigError(std::string("transcript is missing ") + what + " " +
                          std::to_string(counter));
    }
    return column[counter - 1];
}

}  // namespace

BitString recover_segment_cumac(const CumulativeTranscript& transcript,
                                const MacParams& geometry, std::uint32_t i_star,
                                std::uint32_t k) {
    geometry.validate();
    const std::uint32_t n = geometry.segment_count;
    const std::uint32_t l = geometry.segment_bits;
    if (i_star == 0 || k == 0 || k > n) {
        throw ConfigError("segment recovery needs i_star >= 1 and k in [1, n]");
    }
    const std::uint32_t tag_counter = i_star + k - 1;
    BitString segment = row_at(transcript.tags, tag_counter, 0, "tag");
    for (std::uint32_t j = 1; j <= n; ++j) {
        if (j == k || tag_counter < j) continue;
        std::uint32_t c = tag_counter - j + 1;
        segment ^= row_at(transcript.sigma, c, i_star, "MAC row")
                       .slice((j - 1) * l, l);
    }
    return segment;
}

std::optional<BitString> recover_segment_cumacs(
    const CumulativeTranscript& transcript, const std::vector<BitString>& payloads,
    const MacParams& geometry, std::uint32_t i_star, std::uint32_t k,
    std::uint32_t r) {
    geometry.validate();
    const std::uint32_t n = geometry.segment_count;
    const std::uint32_t l = geometry.segment_bits;
    if (i_star == 0 || k == 0 || k > n || r == 0 || r > n) {
        throw ConfigError("segment recovery needs i_star >= 1 and k, r in [1, n]");
    }

    if (k <= r) {
        // Forward: the tag emitted k - 1 steps after the message carries its
        // k-th segment; strip the other real rows and the speculated rows
        // that same tag mixed in for messages still to come.
        const std::uint32_t tag_counter = i_star + k - 1;
        BitString segment = row_at(transcript.tags, tag_counter, 0, "tag");
        for (std::uint32_t j = 1; j <= n; ++j) {
            if (j == k || tag_counter < j) continue;
            std::uint32_t c = tag_counter - j + 1;
            segment ^= row_at(transcript.sigma, c, i_star, "MAC row")
                           .slice((j - 1) * l, l);
        }
        for (std::uint32_t j = 2; j <= n; ++j) {
            std::uint32_t c = tag_counter + j - 1;
            segment ^= row_at(transcript.sigma_hat, c, i_star, "speculated MAC row")
                           .slice((j - 1) * l, l);
        }
        return segment;
    }

    // Backward: this segment only ever travelled inside a tag emitted before
    // the message arrived, as part of its speculated MAC. That equals the
    // real MAC exactly when the prediction matched the message.
    if (i_star > payloads.size() || payloads[i_star - 1].empty()) {
        throw ConfigError("the payload of the recovered message is missing");
    }
    if (i_star > transcript.predicted.size() ||
        transcript.predicted[i_star - 1].empty() ||
        !(transcript.predicted[i_star - 1] == payloads[i_star - 1])) {
        return std::nullopt;
    }
    if (i_star < k) {
        throw ConfigError("the transcript starts too late for backward recovery");
    }
    const std::uint32_t tag_counter = i_star - k + 1;
    BitString segment = row_at(transcript.tags, tag_counter, 0, "tag");
    for (std::uint32_t j = 1; j <= n; ++j) {
        if (tag_counter < j) continue;
        std::uint32_t c = tag_counter - j + 1;
        segment ^= row_at(transcript.sigma, c, i_star, "MAC row")
                       .slice((j - 1) * l, l);
    }
    for (std::uint32_t j = 2; j <= n; ++j) {
        if (j == k) continue;
        std::uint32_t c = tag_counter + j - 1;
        segment ^= row_at(transcript.sigma_hat, c, i_star, "speculated MAC row")
                       .slice((j - 1) * l, l);
    }
    return segment;
}

void ExperimentConfig::validate() const {
    mac.validate();
    if (kind != SchemeKind::cumac && kind != SchemeKind::cumac_spec) {
        throw ConfigError("experiments cover the cumulative schemes");
    }
    if (mac.segment_count < 2) {
        throw ConfigError("experiments need at least two segments");
    }
    if (r == 0 || r > mac.segment_count) {
        throw ConfigError("r must lie in [1, n]");
    }
    if (beta < 0.0 || beta > 1.0) {
        throw ConfigError("beta is a probability");
    }
    if (payload_bits == 0 || payload_bits > 64) {
        throw ConfigError("experiment payloads are 1 to 64 bits");
    }
    if (lambda_bits == 0 || lambda_bits % 8 != 0) {
        throw ConfigError("key length must be a positive multiple of 8");
    }
    if (algo == MacAlgo::aes_cmac && lambda_bits != 128) {
        throw ConfigError("the full-width MAC takes a 128-bit key");
    }
    const std::uint32_t l = mac.segment_bits;
    const std::uint32_t n = mac.segment_count;
    if (r * l > 20 || (n - r) * l > 20) {
        throw ConfigError(
            "success rates below 2^-20 are not measurable at desk scale; "
            "shrink the MAC geometry");
    }
    if (trials > 100'000'000) {
        throw ConfigError("trial budget is capped at 10^8");
    }
    if (kind == SchemeKind::cumac_spec) {
        speculation.validate();
    }
}

double predicted_success_rate(const ExperimentConfig& config) {
    config.validate();
    const double l = config.mac.segment_bits;
    const double n = config.mac.segment_count;
    const double r = config.r;
    if (config.strategy == AttackStrategy::random_guess ||
        config.kind == SchemeKind::cumac) {
        return std::pow(2.0, -r * l);
    }
    return (1.0 - config.beta) + config.beta * std::pow(2.0, -l * (n - r));
}

namespace {

SecretKey fresh_key(std::mt19937_64& rng, std::uint32_t lambda_bits) {
    SecretKey key;
    key.lambda_bits = lambda_bits;
    key.bytes.resize(lambda_bits / 8);
    for (auto& b : key.bytes) {
        b = static_cast<std::uint8_t>(rng());
    }
    return key;
}

SchemeParams scheme_for(const ExperimentConfig& config) {
    SchemeParams params;
    params.kind = config.kind;
    params.mac = config.mac;
    params.algo = config.algo;
    if (config.kind == SchemeKind::cumac_spec) {
        params.speculation = config.speculation;
    }
    return params;
}

// The attacker replays an honestly tagged prefix, then guesses the withheld
// tags outright. Every guessed tag must match the one the verifier expects,
// so each costs 2^-l.
bool trial_tag_guess(std::mt19937_64& rng, const ExperimentConfig& config,
                     std::uint32_t i_star, std::size_t& queries) {
    const std::uint32_t n = config.mac.segment_count;
    const std::uint32_t l = config.mac.segment_bits;
    SecretKey key = fresh_key(rng, config.lambda_bits);
    SchemeParams params = scheme_for(config);

    std::vector<BitString> payloads;
    payloads.reserve(n);
    for (std::uint32_t t = 1; t <= n; ++t) {
        payloads.push_back(BitString::random(config.payload_bits, rng));
    }
    std::vector<BitString> prefix(payloads.begin(), payloads.begin() + (i_star - 1));
    auto transcript = run_cumulative(params, key, prefix);
    queries += i_star - 1;

    auto receiver = make_receiver(params, key);
    for (std::uint32_t t = 1; t <= n; ++t) {
        BitString tag =
            t < i_star ? transcript.tags[t - 1] : BitString::random(l, rng);
        auto outcome = receiver->deliver(Packet{t, payloads[t - 1], tag, false});
        if (outcome.status != VerifyStatus::valid) return false;
    }
    return true;
}

// Structural forgery against the plain cumulative scheme: with every MAC row
// but the target's in hand, each withheld tag is known up to one segment of
// the target MAC, so the attack reduces to guessing r*l bits.
bool trial_structured_cumac(std::mt19937_64& rng, const ExperimentConfig& config,
                            std::uint32_t i_star, std::size_t& queries) {
    const std::uint32_t n = config.mac.segment_count;
    const std::uint32_t l = config.mac.segment_bits;
    SecretKey key = fresh_key(rng, config.lambda_bits);
    MacContext mac(key, config.algo, config.mac);

    std::vector<BitString> payloads;
    payloads.reserve(n);
    for (std::uint32_t t = 1; t <= n; ++t) {
        payloads.push_back(BitString::random(config.payload_bits, rng));
    }
    std::vector<BitString> sigma(n);
    for (std::uint32_t j = 1; j <= n; ++j) {
        if (j == i_star) continue;  // the target message is never queried
        sigma[j - 1] = mac.mac(j, payloads[j - 1].bytes());
        ++queries;
    }
    if (!sigma[i_star - 1].empty()) {
        throw Error("the target's MAC row leaked into the forgery");
    }
    BitString guess = BitString::random(config.r * l, rng);

    auto receiver = make_receiver(scheme_for(config), key);
    for (std::uint32_t t = 1; t <= n; ++t) {
        BitString tag(l);
        for (std::uint32_t j = 1; j <= n; ++j) {
            if (t < j) continue;
            std::uint32_t c = t - j + 1;
            tag ^= c == i_star ? guess.slice((j - 1) * l, l)
                               : sigma[c - 1].slice((j - 1) * l, l);
        }
        auto outcome = receiver->deliver(Packet{t, payloads[t - 1], tag, false});
        if (outcome.status != VerifyStatus::valid) return false;
    }
    return true;
}

// The prediction the sender forms for counter c, replayed from the values
// seen so far. Counter c first enters a tag window at step max(1, c - n + 1),
// which is when the sender predicts it; from there it is an iterated
// one-step-ahead walk.
std::int64_t predicted_value_for(const std::vector<std::int64_t>& values,
                                 std::uint32_t c, std::uint32_t n,
                                 const SpeculationConfig& spec) {
    std::uint32_t s = c > n ? c - n + 1 : 1;
    std::vector<std::int64_t> scratch(values.begin(), values.begin() + s);
    for (std::uint32_t h = 0; h < c - s; ++h) {
        scratch.push_back(predict_next(scratch, spec));
    }
    return scratch.back();
}

// Measurement against the speculative scheme: a verifier holding the last r
// tags recovers the target MAC segment by segment. Forward segments come out
// exactly; backward ones ride on the prediction of the target message and
// must be guessed when it missed.
bool trial_recovery_cumacs(std::mt19937_64& rng, const ExperimentConfig& config,
                           std::uint32_t i_star, std::size_t& queries) {
    const std::uint32_t n = config.mac.segment_count;
    const std::uint32_t l = config.mac.segment_bits;
    const std::uint32_t horizon = 2 * n - 1;
    SecretKey key = fresh_key(rng, config.lambda_bits);
    SchemeParams params = scheme_for(config);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    // Message process realizing the miss rate: each sample equals the
    // sender's prediction with probability 1 - beta and is drawn fresh
    // (never colliding with the prediction) otherwise.
    std::vector<BitString> payloads;
    payloads.reserve(horizon);
    std::vector<std::int64_t> values;
    values.reserve(horizon);
    for (std::uint32_t c = 1; c <= horizon; ++c) {
        BitString payload;
        if (c == 1) {
            payload = BitString::random(config.payload_bits, rng);
        } else {
            std::int64_t predicted =
                predicted_value_for(values, c, n, config.speculation);
            if (unit(rng) < 1.0 - config.beta) {
                payload = value_payload(predicted, config.payload_bits);
            } else {
                do {
                    payload = BitString::random(config.payload_bits, rng);
                } while (payload_value(payload) == predicted);
            }
        }
        values.push_back(payload_value(payload));
        payloads.push_back(std::move(payload));
    }

    auto transcript = run_cumulative(params, key, payloads);
    queries += horizon;

    BitString assembled;
    for (std::uint32_t k = 1; k <= n; ++k) {
        auto segment = recover_segment_cumacs(transcript, payloads, config.mac,
                                              i_star, k, config.r);
        assembled.append(segment.has_value() ? *segment
                                             : BitString::random(l, rng));
    }
    return assembled == transcript.sigma[i_star - 1];
}

}  // namespace

ExperimentResult run_ufcma_r(const ExperimentConfig& config) {
    config.validate();
    ExperimentResult result;
    result.predicted_rate = predicted_success_rate(config);

    const std::uint32_t n = config.mac.segment_count;
    const bool spec_recovery = config.kind == SchemeKind::cumac_spec &&
                               config.strategy == AttackStrategy::recovery;
    result.i_star = spec_recovery ? 2 * n - config.r : n - config.r + 1;
    result.trials =
        config.trials != 0
            ? config.trials
            : std::max<std::size_t>(
                  1000, static_cast<std::size_t>(
                            std::ceil(30.0 / result.predicted_rate)));

    std::mt19937_64 rng(config.seed);
    std::size_t queries = 0;
    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t trial = 0; trial < result.trials; ++trial) {
        bool success = false;
        if (config.strategy == AttackStrategy::random_guess) {
            success = trial_tag_guess(rng, config, result.i_star, queries);
        } else if (config.kind == SchemeKind::cumac) {
            success = trial_structured_cumac(rng, config, result.i_star, queries);
        } else {
            success = trial_recovery_cumacs(rng, config, result.i_star, queries);
        }
        if (success) ++result.successes;
    }
    auto t1 = std::chrono::steady_clock::now();
    result.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    result.empirical_rate = static_cast<double>(result.successes) /
                            static_cast<double>(result.trials);
    result.oracle_queries = queries / result.trials;
    return result;
}

}  // namespace cumac
