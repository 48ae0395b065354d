#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "cumac/scheme.hpp"
#include "cumac/speculation.hpp"

namespace cumac {

// ---------------------------------------------------------------------------
// Lossy-channel simulation
// ---------------------------------------------------------------------------

struct ChannelConfig {
    double drop_rate = 0.0;   // per-packet Bernoulli loss probability
    bool retransmit = false;  // resend each lost packet until it gets through
    std::uint64_t rng_seed = 1;
    std::size_t num_messages = 1000;
    std::size_t payload_bits = 64;
    // Arithmetic right-shift applied to trace samples before encoding, for
    // applications that quantize away noisy low bits.
    std::uint32_t value_shift = 0;
    // How many per-message rows the report keeps (aggregates always cover
    // every message).
    std::size_t max_message_reports = 1024;

    void validate() const;
};

struct MessageOutcome {
    std::uint32_t counter = 0;
    bool delivered = false;      // the message's own packet got through
    bool authenticated = false;  // see run_lossy for the per-scheme meaning
    AuthReport report;           // final standing (zeroed when undelivered)
};

struct LossReport {
    SchemeKind kind = SchemeKind::cumac;
    std::size_t messages_sent = 0;
    std::size_t messages_delivered = 0;
    std::size_t messages_authenticated = 0;
    std::size_t packets_emitted = 0;  // retransmissions included
    double authenticated_fraction = 0.0;
    // Final standing of the delivered messages, indexed like AuthLevel.
    std::array<std::size_t, 4> level_histogram{};
    double mean_final_bits = 0.0;       // over delivered messages
    double mean_at_arrival_bits = 0.0;  // over delivered messages
    // Wall-clock measurement; reported on the terminal but kept out of
    // serialized reports so reruns are byte-identical.
    double wall_seconds = 0.0;
    double messages_per_second = 0.0;
    std::vector<MessageOutcome> first_messages;
};

// Drives one sender/receiver pair over a Bernoulli-loss channel. Payloads
// are uniform random bits unless a trace is given, in which case samples are
// carried as two's-complement values (repeating the trace when it is shorter
// than the run). A message counts as authenticated when its own tag verifies
// on arrival (truncated, cumac, cumac-s) or when its unit completes and
// verifies (compound, aggregate, trailing). The rewinding schemes hand a
// lost counter back to the sender, so survivors verify cleanly; the
// committed schemes leave holes that spoil the enclosing unit instead.
LossReport run_lossy(const SchemeParams& params, const SecretKey& key,
                     const ChannelConfig& channel, const Trace* trace = nullptr);

// ---------------------------------------------------------------------------
// Strength / delay trade-off
// ---------------------------------------------------------------------------

struct StrengthCurvePoint {
    std::size_t packets_seen = 0;  // the message's own packet plus later ones
    std::size_t bits = 0;
};

std::vector<StrengthCurvePoint> strength_delay_curve(const SchemeParams& params,
                                                     std::size_t max_packets,
                                                     bool speculation_correct = false);

// ---------------------------------------------------------------------------
// Shared-bus load model
// ---------------------------------------------------------------------------

// Traffic profile of one node on a shared broadcast bus, as distributions
// over payload size and transmission period.
struct CanWorkload {
    std::vector<std::pair<double, double>> payload_bytes;  // (bytes, share)
    std::vector<std::pair<double, double>> period_ms;      // (milliseconds, share)
    double bus_speed_bps = 500000.0;
    double frame_overhead_bits = 47.0;  // header, checksum, framing per packet
    double stuffing_factor = 1.0;

    void validate() const;
    double expected_payload_bits() const;
    double expected_rate_hz() const;  // packets per second from one node
};

// What a tagging mode adds to each message: bits appended to the message
// packet itself, plus any standalone packets.
struct TagCost {
    std::size_t tag_bits = 0;
    std::size_t extra_packets = 0;
    std::size_t extra_bits = 0;  // payload bits of each standalone packet
};

// The bus cost of running a scheme: per-message average tag bits for the
// per-message and block schemes, standalone packets for the trailing one.
TagCost tag_cost(const SchemeParams& params);

// Fraction of bus capacity consumed by `nodes` identical senders.
double bus_load(const CanWorkload& workload, const TagCost& cost, std::size_t nodes);

// Largest node count whose load stays at or under the cap.
std::size_t supported_nodes(const CanWorkload& workload, const TagCost& cost,
                            double load_cap);

// ---------------------------------------------------------------------------
// Battery-life model
// ---------------------------------------------------------------------------

// Duty-cycled device on a fixed energy budget: a constant idle draw per day
// plus a per-message cost that grows with the bits on the air.
struct EnergyParams {
    double battery_capacity = 28800.0;
    double idle_cost_per_day = 0.11;
    double messages_per_day = 24.0;
    double fixed_cost_per_message = 0.20;
    double cost_per_bit = 0.002;

    void validate() const;
};

double service_life_days(const EnergyParams& params, std::size_t message_bits,
                         std::size_t tag_bits);

}  // namespace cumac
