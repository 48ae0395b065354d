#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cumac/mac.hpp"
#include "cumac/scheme.hpp"

namespace cumac {

// ---------------------------------------------------------------------------
// Segment recovery
//
// Each tag is an XOR of known contributions plus, possibly, one segment we
// care about, so that segment can be reconstructed by stripping everything
// else. These helpers work over a recorded transcript and never read the MAC
// row of the message under recovery - that row is what is being derived.
// ---------------------------------------------------------------------------

// Segment k of message i_star under the plain cumulative scheme, recovered
// from the tag emitted k - 1 steps later. The transcript must hold that tag
// and the MACs of the other messages it aggregates.
BitString recover_segment_cumac(const CumulativeTranscript& transcript,
                                const MacParams& geometry, std::uint32_t i_star,
                                std::uint32_t k);

// Segment k of message i_star under the speculative scheme, where the last r
// tags of the transcript are the ones covering i_star directly. Segments up
// to r come out of the forward tags exactly as in the plain scheme (with the
// speculated contributions stripped as well). Segments beyond r exist only
// inside tags emitted before the message arrived, so they can be recovered
// exactly when the sender's prediction of this message was right; when it
// was not, there is nothing to recover and the result is empty.
std::optional<BitString> recover_segment_cumacs(
    const CumulativeTranscript& transcript, const std::vector<BitString>& payloads,
    const MacParams& geometry, std::uint32_t i_star, std::uint32_t k,
    std::uint32_t r);

// ---------------------------------------------------------------------------
// Forgery experiments
// ---------------------------------------------------------------------------

enum class AttackStrategy {
    random_guess,  // guess the withheld tags outright
    recovery,      // exploit the aggregation structure segment by segment
};
const char* attack_strategy_name(AttackStrategy strategy);

// One Monte Carlo experiment measuring the probability that a message
// holding only r of its n covering tags is accepted with a wrong or
// unauthenticated MAC. The downscaled MAC keeps success rates measurable;
// the products r*l and l*(n-r) are capped so the expected number of
// successes stays within desk-scale trial budgets.
struct ExperimentConfig {
    SchemeKind kind = SchemeKind::cumac;  // cumac or cumac-s
    MacParams mac{8, 4, 2};
    MacAlgo algo = MacAlgo::toy;
    std::uint32_t lambda_bits = 64;
    std::uint32_t r = 1;  // covering tags the verifier actually holds
    AttackStrategy strategy = AttackStrategy::random_guess;
    double beta = 0.0;  // cumac-s: probability a prediction misses
    // 0 means auto-scale so that about 30 successes are expected.
    std::size_t trials = 0;
    std::uint64_t seed = 1;
    std::size_t payload_bits = 16;
    SpeculationConfig speculation;  // cumac-s message model

    void validate() const;
};

struct ExperimentResult {
    std::size_t trials = 0;
    std::size_t successes = 0;
    double empirical_rate = 0.0;
    double predicted_rate = 0.0;
    double wall_seconds = 0.0;  // terminal-only; kept out of serialized reports
    std::uint32_t i_star = 0;
    std::size_t oracle_queries = 0;  // MAC material obtained per trial
};

// The success rate the analysis predicts for this configuration: 2^(-r*l)
// for tag guessing and for structural forgery against the plain scheme, and
// (1 - beta) + beta * 2^(-l*(n-r)) for recovery against the speculative
// scheme, whose leftover segments ride on predictions that hit with
// probability 1 - beta.
double predicted_success_rate(const ExperimentConfig& config);

// Runs the experiment. Every trial draws a fresh key; the message under
// attack is never queried to the tag oracle (the helpers enforce this), so a
// success is a genuine acceptance of unauthenticated material.
ExperimentResult run_ufcma_r(const ExperimentConfig& config);

}  // namespace cumac
