#include "cumac/simkit.hpp"

#include <chrono>
#include <cmath>
#include <random>

#include "cumac/errors.hpp"

namespace cumac {

void ChannelConfig::validate() const {
    if (drop_rate < 0.0 || drop_rate >= 1.0) {
        throw ConfigError("drop_rate must lie in [0, 1)");
    }
    if (num_messages == 0 || num_messages > (std::size_t{1} << 30)) {
        throw ConfigError("num_messages must be between 1 and 2^30");
    }
    if (payload_bits == 0 || payload_bits > 0xffff) {
        throw ConfigError("payload_bits must fit the packet length field");
    }
    if (value_shift > 63) {
        throw ConfigError("value_shift must be below 64");
    }
}

LossReport run_lossy(const SchemeParams& params, const SecretKey& key,
                     const ChannelConfig& channel, const Trace* trace) {
    params.validate();
    channel.validate();
    if (trace != nullptr && trace->values.empty()) {
        throw ConfigError("the driving trace has no samples");
    }

    auto sender = make_sender(params, key);
    auto receiver = make_receiver(params, key);
    std::mt19937_64 rng(channel.rng_seed);
    std::bernoulli_distribution drop(channel.drop_rate);
    const bool committed = committed_units(params.kind);

    LossReport report;
    report.kind = params.kind;
    report.messages_sent = channel.num_messages;

    // (counter, own packet delivered) per message; final standings are read
    // back once the run ends and every unit has settled.
    std::vector<std::pair<std::uint32_t, bool>> sent;
    sent.reserve(channel.num_messages);
    std::vector<char> own_tag_valid(channel.num_messages, 0);

    auto t0 = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < channel.num_messages; ++i) {
        BitString payload;
        if (trace != nullptr) {
            std::int64_t v = trace->values[i % trace->values.size()];
            payload = value_payload(v >> channel.value_shift, channel.payload_bits);
        } else {
            payload = BitString::random(channel.payload_bits, rng);
        }

        if (committed) {
            // Block and trailing units stand once emitted; each packet takes
            // its own chances on the channel.
            auto packets = sender->send(payload);
            std::uint32_t counter = packets.front().counter;
            sender->ack(counter, true);
            bool message_delivered = false;
            for (std::size_t k = 0; k < packets.size(); ++k) {
                ++report.packets_emitted;
                bool through = !drop(rng);
                while (!through && channel.retransmit) {
                    ++report.packets_emitted;
                    through = !drop(rng);
                }
                if (through) {
                    if (k == 0) message_delivered = true;
                    receiver->deliver(packets[k]);
                }
            }
            sent.emplace_back(counter, message_delivered);
        } else {
            // Rewinding schemes: a failed delivery hands the counter back,
            // so the receiver always sees a gapless stream.
            std::uint32_t counter = 0;
            bool through = false;
            while (true) {
                auto packets = sender->send(payload);
                counter = packets.front().counter;
                ++report.packets_emitted;
                through = !drop(rng);
                sender->ack(counter, through);
                if (through) {
                    auto outcome = receiver->deliver(packets.front());
                    own_tag_valid[i] = outcome.status == VerifyStatus::valid;
                    break;
                }
                if (!channel.retransmit) break;
            }
            sent.emplace_back(counter, through);
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    report.wall_seconds = std::chrono::duration<double>(t1 - t0).count();
    if (report.wall_seconds > 0.0) {
        report.messages_per_second =
            static_cast<double>(channel.num_messages) / report.wall_seconds;
    }

    double bits_total = 0.0, arrival_bits_total = 0.0;
    for (std::size_t i = 0; i < sent.size(); ++i) {
        MessageOutcome out;
        out.counter = sent[i].first;
        out.delivered = sent[i].second;
        if (out.delivered) {
            out.report = receiver->auth_status(out.counter);
            out.authenticated = committed ? out.report.level == AuthLevel::full
                                          : own_tag_valid[i] != 0;
            ++report.messages_delivered;
            ++report.level_histogram[static_cast<std::size_t>(out.report.level)];
            bits_total += static_cast<double>(out.report.bits);
            arrival_bits_total += static_cast<double>(out.report.at_arrival_bits);
        } else {
            out.report = AuthReport{out.counter, 0, 0, AuthLevel::none};
        }
        if (out.authenticated) {
            ++report.messages_authenticated;
        }
        if (report.first_messages.size() < channel.max_message_reports) {
            report.first_messages.push_back(out);
        }
    }
    report.authenticated_fraction =
        static_cast<double>(report.messages_authenticated) /
        static_cast<double>(report.messages_sent);
    if (report.messages_delivered > 0) {
        report.mean_final_bits =
            bits_total / static_cast<double>(report.messages_delivered);
        report.mean_at_arrival_bits =
            arrival_bits_total / static_cast<double>(report.messages_delivered);
    }
    return report;
}

std::vector<StrengthCurvePoint> strength_delay_curve(const SchemeParams& params,
                                                     std::size_t max_packets,
                                                     bool speculation_correct) {
    auto bits = strength_profile(params, max_packets, speculation_correct);
    std::vector<StrengthCurvePoint> out;
    out.reserve(bits.size());
    for (std::size_t r = 1; r <= bits.size(); ++r) {
        out.push_back({r, bits[r - 1]});
    }
    return out;
}

void CanWorkload::validate() const {
    if (payload_bytes.empty() || period_ms.empty()) {
        throw ConfigError("workload distributions must not be empty");
    }
    double payload_total = 0.0, period_total = 0.0;
    for (const auto& [bytes, share] : payload_bytes) {
        if (bytes < 0.0 || share < 0.0) {
            throw ConfigError("payload sizes and shares must be non-negative");
        }
        payload_total += share;
    }
    for (const auto& [period, share] : period_ms) {
        if (period <= 0.0 || share < 0.0) {
            throw ConfigError("periods must be positive with non-negative shares");
        }
        period_total += share;
    }
    if (std::fabs(payload_total - 1.0) > 1e-9 || std::fabs(period_total - 1.0) > 1e-9) {
        throw ConfigError("distribution shares must each sum to 1");
    }
    if (bus_speed_bps <= 0.0) {
        throw ConfigError("bus speed must be positive");
    }
    if (frame_overhead_bits < 0.0) {
        throw ConfigError("frame overhead must be non-negative");
    }
    if (stuffing_factor < 1.0) {
        throw ConfigError("stuffing can only expand a frame");
    }
}

double CanWorkload::expected_payload_bits() const {
    double bits = 0.0;
    for (const auto& [bytes, share] : payload_bytes) {
        bits += share * bytes * 8.0;
    }
    return bits;
}

double CanWorkload::expected_rate_hz() const {
    double rate = 0.0;
    for (const auto& [period, share] : period_ms) {
        rate += share / (period / 1000.0);
    }
    return rate;
}

TagCost tag_cost(const SchemeParams& params) {
    params.validate();
    switch (params.kind) {
        case SchemeKind::truncated:
        case SchemeKind::cumac:
        case SchemeKind::cumac_spec:
            return {params.mac.segment_bits, 0, 0};
        case SchemeKind::compound:
        case SchemeKind::aggregate:
            // One L-bit tag per n messages averages out to one segment each.
            return {params.mac.segment_bits, 0, 0};
        case SchemeKind::trailing:
            return {0, params.trailing_split,
                    params.mac.total_bits / params.trailing_split};
    }
    throw ConfigError("unknown scheme kind");
}

double bus_load(const CanWorkload& workload, const TagCost& cost, std::size_t nodes) {
    workload.validate();
    double per_message_bits =
        workload.stuffing_factor *
        (workload.frame_overhead_bits + workload.expected_payload_bits() +
         static_cast<double>(cost.tag_bits) +
         static_cast<double>(cost.extra_packets) *
             (workload.frame_overhead_bits + static_cast<double>(cost.extra_bits)));
    return static_cast<double>(nodes) * workload.expected_rate_hz() *
           per_message_bits / workload.bus_speed_bps;
}

std::size_t supported_nodes(const CanWorkload& workload, const TagCost& cost,
                            double load_cap) {
    if (load_cap < 0.0) {
        throw ConfigError("the load cap must be non-negative");
    }
    double per_node = bus_load(workload, cost, 1);
    if (per_node <= 0.0) {
        throw ConfigError("the workload carries no bits");
    }
    return static_cast<std::size_t>(std::floor(load_cap / per_node + 1e-12));
}

void EnergyParams::validate() const {
    if (battery_capacity <= 0.0) {
        throw ConfigError("battery capacity must be positive");
    }
    if (idle_cost_per_day < 0.0 || messages_per_day < 0.0 ||
        fixed_cost_per_message < 0.0 || cost_per_bit < 0.0) {
        throw ConfigError("energy costs must be non-negative");
    }
}

double service_life_days(const EnergyParams& params, std::size_t message_bits,
                         std::size_t tag_bits) {
    params.validate();
    double per_day = params.idle_cost_per_day +
                     params.messages_per_day *
                         (params.fixed_cost_per_message +
                          params.cost_per_bit *
                              static_cast<double>(message_bits + tag_bits));
    if (per_day <= 0.0) {
        throw ConfigError("the device draws no energy; life would be unbounded");
    }
    return params.battery_capacity / per_day;
}

}  // namespace cumac
