#include "cumac/cli.hpp"

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "cumac/errors.hpp"
#include "cumac/mac.hpp"
#include "cumac/report.hpp"
#include "cumac/scheme.hpp"
#include "cumac/security.hpp"
#include "cumac/simkit.hpp"
#include "cumac/speculation.hpp"

namespace cumac::cli {
namespace {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Config plumbing
// ---------------------------------------------------------------------------

// Navigates a dotted path ("simulate.trace.source") through nested objects.
const json& config_at(const json& root, const std::string& dotted) {
    const json* node = &root;
    std::size_t start = 0;
    while (true) {
        std::size_t dot = dotted.find('.', start);
        std::string key = dot == std::string::npos ? dotted.substr(start)
                                                   : dotted.substr(start, dot - start);
        if (!node->is_object() || !node->contains(key)) {
            throw ConfigError("missing config entry: " + dotted);
        }
        node = &node->at(key);
        if (dot == std::string::npos) return *node;
        start = dot + 1;
    }
}

template <typename T>
T config_get(const json& root, const std::string& dotted) {
    const json& node = config_at(root, dotted);
    try {
        return node.get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config entry has the wrong type: " + dotted);
    }
}

// Same as config_get but for one key of an array element, so the error can
// point at the element ("attack.runs[3].trials").
template <typename T>
T item_get(const json& item, const std::string& key, const std::string& where) {
    if (!item.is_object() || !item.contains(key)) {
        throw ConfigError("missing config entry: " + where + "." + key);
    }
    try {
        return item.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config entry has the wrong type: " + where + "." + key);
    }
}

std::uint64_t resolve_seed(const json& root, const std::string& dotted,
                           const std::optional<std::uint64_t>& override_seed) {
    if (override_seed) return *override_seed;
    return config_get<std::uint64_t>(root, dotted);
}

// ---------------------------------------------------------------------------
// Builders from config sections
// ---------------------------------------------------------------------------

MacAlgo algo_from_name(const std::string& name) {
    if (name == "aes-cmac") return MacAlgo::aes_cmac;
    if (name == "toy") return MacAlgo::toy;
    throw ConfigError("unknown MAC algorithm '" + name + "' (expected aes-cmac or toy)");
}

MacParams mac_params_from(const json& root, const std::string& prefix) {
    MacParams mac;
    mac.total_bits = config_get<std::uint32_t>(root, prefix + ".total_bits");
    mac.segment_count = config_get<std::uint32_t>(root, prefix + ".segment_count");
    mac.segment_bits = config_get<std::uint32_t>(root, prefix + ".segment_bits");
    mac.validate();
    return mac;
}

SpeculationConfig speculation_from(const json& root, const std::string& prefix) {
    SpeculationConfig spec;
    spec.p = config_get<std::uint32_t>(root, prefix + ".p");
    spec.d = config_get<std::uint32_t>(root, prefix + ".d");
    spec.coeffs_q16 = config_get<std::vector<std::int64_t>>(root, prefix + ".coeffs_q16");
    spec.lsb_ignore = config_get<std::uint32_t>(root, prefix + ".lsb_ignore");
    spec.validate();
    return spec;
}

SchemeParams scheme_params_from(const json& root, SchemeKind kind) {
    SchemeParams params;
    params.kind = kind;
    params.mac = mac_params_from(root, "mac");
    params.algo = algo_from_name(config_get<std::string>(root, "mac.algo"));
    params.trailing_split = config_get<std::uint32_t>(root, "schemes.trailing_split");
    if (kind == SchemeKind::cumac_spec) {
        params.speculation = speculation_from(root, "schemes.speculation");
    }
    params.validate();
    return params;
}

SecretKey key_from(const json& root) {
    auto bits = config_get<std::uint32_t>(root, "mac.key_bits");
    auto seed = config_get<std::uint64_t>(root, "mac.key_seed");
    return key_gen(bits, seed);
}

// Trace sections look like {"source": "torque", "count": 4096}. The source
// is one of the built-in generators, a path to a CSV capture, or empty for
// "no trace" (random payloads where that is allowed).
std::optional<Trace> trace_from(const json& root, const std::string& prefix,
                                std::uint64_t seed) {
    auto source = config_get<std::string>(root, prefix + ".source");
    if (source.empty()) return std::nullopt;
    auto count = config_get<std::size_t>(root, prefix + ".count");
    if (count == 0) {
        throw ConfigError("trace sample count must be positive: " + prefix + ".count");
    }
    if (source == "constant") return make_constant_trace(42, count);
    if (source == "drift") return make_drift_trace(0, 3, count);
    if (source == "torque") return make_torque_trace(count, seed);
    if (source.size() >= 4 && source.compare(source.size() - 4, 4, ".csv") == 0) {
        if (!std::filesystem::exists(source)) {
            throw ConfigError("trace file not found: " + source);
        }
        return load_trace_csv(source);
    }
    throw ConfigError("unknown trace source '" + source +
                      "' (constant, drift, torque, or a .csv path)");
}

AttackStrategy strategy_from_name(const std::string& name) {
    if (name == attack_strategy_name(AttackStrategy::random_guess)) {
        return AttackStrategy::random_guess;
    }
    if (name == attack_strategy_name(AttackStrategy::recovery)) {
        return AttackStrategy::recovery;
    }
    throw ConfigError("unknown attack strategy '" + name +
                      "' (expected random_guess or recovery)");
}

// ---------------------------------------------------------------------------
// Report emission
// ---------------------------------------------------------------------------

// Collects the named tables of one command and writes them all at once: one
// file per table under out_dir, or a concatenated dump on the output stream.
// Timing never passes through here, so reruns are byte-identical.
struct ReportSink {
    const CommonOptions& options;
    std::string digest;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, Table>> tables;

    void add(const std::string& name, Table table) {
        tables.emplace_back(name, std::move(table));
    }

    void flush(std::ostream& out) const {
        if (!options.out_dir.empty()) {
            for (const auto& [name, table] : tables) {
                auto path = std::filesystem::path(options.out_dir) /
                            (name + "." + options.format);
                write_text_file(path.string(), render_file(table));
            }
            return;
        }
        if (options.format == "json") {
            json doc;
            doc["config_digest"] = digest;
            doc["seed"] = seed;
            json tabs = json::object();
            for (const auto& [name, table] : tables) {
                tabs[name] = json::parse(to_json_summary(table, digest, seed))["rows"];
            }
            doc["tables"] = std::move(tabs);
            out << doc.dump(2) << "\n";
            return;
        }
        out << "# config_digest=" << digest << " seed=" << seed << "\n";
        for (const auto& [name, table] : tables) {
            out << "# table: " << name << "\n" << to_csv(table) << "\n";
        }
    }

    std::string render_file(const Table& table) const {
        if (options.format == "json") return to_json_summary(table, digest, seed);
        // CSV files carry the provenance stamp as a leading comment line.
        return "# config_digest=" + digest + " seed=" + std::to_string(seed) + "\n" +
               to_csv(table);
    }
};

Cell icell(std::uint64_t v) { return Cell{static_cast<std::int64_t>(v)}; }
Cell scell(const char* s) { return Cell{std::string(s)}; }

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

int cmd_simulate(const json& cfg, const CommonOptions& options, std::ostream& out,
                 std::ostream& err) {
    std::uint64_t seed = resolve_seed(cfg, "simulate.seed", options.seed);
    SchemeKind kind = scheme_from_name(config_get<std::string>(cfg, "simulate.scheme"));
    SchemeParams params = scheme_params_from(cfg, kind);
    SecretKey key = key_from(cfg);

    ChannelConfig channel;
    channel.drop_rate = config_get<double>(cfg, "simulate.drop_rate");
    channel.retransmit = config_get<bool>(cfg, "simulate.retransmit");
    channel.rng_seed = seed;
    channel.num_messages = config_get<std::size_t>(cfg, "simulate.num_messages");
    channel.payload_bits = config_get<std::size_t>(cfg, "simulate.payload_bits");
    channel.value_shift = config_get<std::uint32_t>(cfg, "simulate.value_shift");
    channel.max_message_reports = config_get<std::size_t>(cfg, "simulate.message_rows");
    channel.validate();

    std::optional<Trace> trace = trace_from(cfg, "simulate.trace", seed);
    LossReport report = run_lossy(params, key, channel, trace ? &*trace : nullptr);

    Table summary;
    summary.columns = {"scheme",
                       "messages_sent",
                       "messages_delivered",
                       "messages_authenticated",
                       "packets_emitted",
                       "authenticated_fraction",
                       "mean_final_bits",
                       "mean_at_arrival_bits",
                       "level_none",
                       "level_real_time",
                       "level_partially_accumulated",
                       "level_full"};
    summary.add_row({scell(scheme_name(kind)), icell(report.messages_sent),
                     icell(report.messages_delivered),
                     icell(report.messages_authenticated), icell(report.packets_emitted),
                     Cell{report.authenticated_fraction}, Cell{report.mean_final_bits},
                     Cell{report.mean_at_arrival_bits}, icell(report.level_histogram[0]),
                     icell(report.level_histogram[1]), icell(report.level_histogram[2]),
                     icell(report.level_histogram[3])});

    Table messages;
    messages.columns = {"counter", "delivered", "authenticated",
                        "level",   "bits",      "at_arrival_bits"};
    for (const MessageOutcome& m : report.first_messages) {
        messages.add_row({icell(m.counter), icell(m.delivered ? 1 : 0),
                          icell(m.authenticated ? 1 : 0),
                          scell(auth_level_name(m.report.level)), icell(m.report.bits),
                          icell(m.report.at_arrival_bits)});
    }

    ReportSink sink{options, config_digest(cfg), seed, {}};
    sink.add("simulate_summary", std::move(summary));
    sink.add("simulate_messages", std::move(messages));
    sink.flush(out);
    err << "simulate: " << report.messages_sent << " messages in "
        << format_double(report.wall_seconds) << " s ("
        << format_double(report.messages_per_second) << " msg/s)\n";
    return 0;
}

int cmd_busload(const json& cfg, const CommonOptions& options, std::ostream& out,
                std::ostream&) {
    CanWorkload workload;
    workload.payload_bytes = config_get<std::vector<std::pair<double, double>>>(
        cfg, "busload.payload_bytes");
    workload.period_ms =
        config_get<std::vector<std::pair<double, double>>>(cfg, "busload.period_ms");
    workload.bus_speed_bps = config_get<double>(cfg, "busload.bus_speed_bps");
    workload.frame_overhead_bits = config_get<double>(cfg, "busload.frame_overhead_bits");
    workload.stuffing_factor = config_get<double>(cfg, "busload.stuffing_factor");
    workload.validate();

    auto caps = config_get<std::vector<double>>(cfg, "busload.load_caps");
    if (caps.empty()) {
        throw ConfigError("busload.load_caps must list at least one load cap");
    }
    const json& modes = config_at(cfg, "busload.modes");
    if (!modes.is_array() || modes.empty()) {
        throw ConfigError("busload.modes must be a non-empty array");
    }

    Table table;
    table.columns = {"mode",     "tag_bits",         "extra_packets", "extra_bits",
                     "load_cap", "single_node_load", "supported_nodes"};
    std::size_t index = 0;
    for (const json& mode : modes) {
        std::string where = "busload.modes[" + std::to_string(index) + "]";
        auto name = item_get<std::string>(mode, "name", where);
        TagCost cost;
        cost.tag_bits = item_get<std::size_t>(mode, "tag_bits", where);
        cost.extra_packets = item_get<std::size_t>(mode, "extra_packets", where);
        cost.extra_bits = item_get<std::size_t>(mode, "extra_bits", where);
        for (double cap : caps) {
            table.add_row({Cell{name}, icell(cost.tag_bits), icell(cost.extra_packets),
                           icell(cost.extra_bits), Cell{cap},
                           Cell{bus_load(workload, cost, 1)},
                           icell(supported_nodes(workload, cost, cap))});
        }
        ++index;
    }

    ReportSink sink{options, config_digest(cfg), options.seed.value_or(0), {}};
    sink.add("busload", std::move(table));
    sink.flush(out);
    return 0;
}

int cmd_energy(const json& cfg, const CommonOptions& options, std::ostream& out,
               std::ostream&) {
    EnergyParams params;
    params.battery_capacity = config_get<double>(cfg, "energy.battery_capacity");
    params.idle_cost_per_day = config_get<double>(cfg, "energy.idle_cost_per_day");
    params.messages_per_day = config_get<double>(cfg, "energy.messages_per_day");
    params.fixed_cost_per_message = config_get<double>(cfg, "energy.fixed_cost_per_message");
    params.cost_per_bit = config_get<double>(cfg, "energy.cost_per_bit");
    params.validate();

    auto message_bits = config_get<std::size_t>(cfg, "energy.message_bits");
    auto tag_sizes = config_get<std::vector<std::size_t>>(cfg, "energy.tag_bits");
    if (tag_sizes.empty()) {
        throw ConfigError("energy.tag_bits must list at least one tag size");
    }

    // Reductions are measured against the untagged baseline.
    double baseline = service_life_days(params, message_bits, 0);
    Table table;
    table.columns = {"message_bits", "tag_bits", "service_days", "reduction_pct"};
    for (std::size_t tag_bits : tag_sizes) {
        double days = service_life_days(params, message_bits, tag_bits);
        table.add_row({icell(message_bits), icell(tag_bits), Cell{days},
                       Cell{(1.0 - days / baseline) * 100.0}});
    }

    ReportSink sink{options, config_digest(cfg), options.seed.value_or(0), {}};
    sink.add("energy", std::move(table));
    sink.flush(out);
    return 0;
}

int cmd_speculate(const json& cfg, const CommonOptions& options, std::ostream& out,
                  std::ostream& err) {
    std::uint64_t seed = resolve_seed(cfg, "speculate.seed", options.seed);
    std::optional<Trace> trace = trace_from(cfg, "speculate.trace", seed);
    if (!trace) {
        throw ConfigError("speculate.trace.source must name a trace");
    }
    double train_fraction = config_get<double>(cfg, "speculate.train_fraction");
    auto orders = config_get<std::vector<std::pair<std::uint32_t, std::uint32_t>>>(
        cfg, "speculate.orders");
    auto masks = config_get<std::vector<std::uint32_t>>(cfg, "speculate.lsb_ignore");
    auto max_lag = config_get<std::uint32_t>(cfg, "speculate.max_lag");
    if (orders.empty()) throw ConfigError("speculate.orders must list model orders");
    if (masks.empty()) throw ConfigError("speculate.lsb_ignore must list mask widths");

    auto t0 = std::chrono::steady_clock::now();
    Table rates;
    rates.columns = {"trace", "p", "d", "lsb_ignore", "fallback", "coeffs_q16",
                     "error_rate"};
    std::string trace_label = config_get<std::string>(cfg, "speculate.trace.source");
    for (auto [p, d] : orders) {
        SpeculationConfig fitted = fit_ar(*trace, p, d, train_fraction);
        std::string coeffs;
        for (std::size_t i = 0; i < fitted.coeffs_q16.size(); ++i) {
            if (i > 0) coeffs += ';';
            coeffs += std::to_string(fitted.coeffs_q16[i]);
        }
        for (std::uint32_t mask : masks) {
            SpeculationConfig probe = fitted;
            probe.lsb_ignore = mask;
            double rate = speculation_error_rate(*trace, probe, train_fraction);
            rates.add_row({Cell{trace_label}, icell(p), icell(d), icell(mask),
                           icell(fitted.fallback_persistence ? 1 : 0), Cell{coeffs},
                           Cell{rate}});
        }
    }

    Table correlation;
    correlation.columns = {"lag", "acf", "pacf"};
    auto auto_corr = acf(trace->values, max_lag);
    auto partial_corr = pacf(trace->values, max_lag);
    for (std::uint32_t lag = 0; lag <= max_lag; ++lag) {
        correlation.add_row({icell(lag), Cell{auto_corr[lag]}, Cell{partial_corr[lag]}});
    }
    auto t1 = std::chrono::steady_clock::now();

    ReportSink sink{options, config_digest(cfg), seed, {}};
    sink.add("speculate_error_rates", std::move(rates));
    sink.add("speculate_correlation", std::move(correlation));
    sink.flush(out);
    err << "speculate: " << trace->values.size() << " samples in "
        << format_double(std::chrono::duration<double>(t1 - t0).count()) << " s\n";
    return 0;
}

int cmd_attack(const json& cfg, const CommonOptions& options, std::ostream& out,
               std::ostream& err) {
    std::uint64_t seed = resolve_seed(cfg, "attack.seed", options.seed);
    MacParams mac = mac_params_from(cfg, "attack.mac");
    MacAlgo algo = algo_from_name(config_get<std::string>(cfg, "attack.algo"));
    auto lambda_bits = config_get<std::uint32_t>(cfg, "attack.lambda_bits");
    auto payload_bits = config_get<std::size_t>(cfg, "attack.payload_bits");
    SpeculationConfig speculation = speculation_from(cfg, "attack.speculation");
    const json& runs = config_at(cfg, "attack.runs");
    if (!runs.is_array() || runs.empty()) {
        throw ConfigError("attack.runs must be a non-empty array");
    }

    Table table;
    table.columns = {"name",   "scheme",    "strategy",       "r",
                     "beta",   "trials",    "successes",      "empirical_rate",
                     "predicted_rate", "i_star", "oracle_queries"};
    std::size_t index = 0;
    for (const json& run : runs) {
        std::string where = "attack.runs[" + std::to_string(index) + "]";
        ExperimentConfig experiment;
        experiment.kind = scheme_from_name(item_get<std::string>(run, "kind", where));
        experiment.mac = mac;
        experiment.algo = algo;
        experiment.lambda_bits = lambda_bits;
        experiment.r = item_get<std::uint32_t>(run, "r", where);
        experiment.strategy =
            strategy_from_name(item_get<std::string>(run, "strategy", where));
        experiment.beta = run.contains("beta") ? item_get<double>(run, "beta", where) : 0.0;
        experiment.trials = item_get<std::size_t>(run, "trials", where);
        if (experiment.trials == 0) {
            throw ConfigError(where + ".trials must be positive");
        }
        // Each run gets its own stream so reordering runs cannot couple them.
        experiment.seed = seed + index;
        experiment.payload_bits = payload_bits;
        experiment.speculation = speculation;

        auto name = item_get<std::string>(run, "name", where);
        ExperimentResult result = run_ufcma_r(experiment);
        table.add_row({Cell{name}, scell(scheme_name(experiment.kind)),
                       scell(attack_strategy_name(experiment.strategy)),
                       icell(experiment.r), Cell{experiment.beta}, icell(result.trials),
                       icell(result.successes), Cell{result.empirical_rate},
                       Cell{result.predicted_rate}, icell(result.i_star),
                       icell(result.oracle_queries)});
        err << "attack: " << name << ": " << result.trials << " trials in "
            << format_double(result.wall_seconds) << " s\n";
        ++index;
    }

    ReportSink sink{options, config_digest(cfg), seed, {}};
    sink.add("attack", std::move(table));
    sink.flush(out);
    return 0;
}

int cmd_compare(const json& cfg, const CommonOptions& options, std::ostream& out,
                std::ostream& err) {
    std::uint64_t seed = resolve_seed(cfg, "compare.seed", options.seed);
    auto scheme_names = config_get<std::vector<std::string>>(cfg, "compare.schemes");
    if (scheme_names.empty()) {
        throw ConfigError("compare.schemes must list at least one scheme");
    }
    std::vector<SchemeKind> kinds;
    for (const std::string& name : scheme_names) {
        SchemeKind kind = scheme_from_name(name);
        for (SchemeKind seen : kinds) {
            if (seen == kind) {
                throw ConfigError("compare.schemes repeats '" + name + "'");
            }
        }
        kinds.push_back(kind);
    }
    auto max_packets = config_get<std::size_t>(cfg, "compare.max_packets");
    auto accumulation_packets = config_get<std::size_t>(cfg, "compare.accumulation_packets");
    if (max_packets == 0 || accumulation_packets == 0) {
        throw ConfigError("compare packet horizons must be positive");
    }
    auto drop_rates = config_get<std::vector<double>>(cfg, "compare.drop_rates");
    if (drop_rates.empty()) {
        throw ConfigError("compare.drop_rates must list at least one loss rate");
    }
    auto num_messages = config_get<std::size_t>(cfg, "compare.num_messages");
    auto payload_bits = config_get<std::size_t>(cfg, "compare.payload_bits");
    SecretKey key = key_from(cfg);
    std::optional<Trace> trace = trace_from(cfg, "compare.trace", seed);

    auto t0 = std::chrono::steady_clock::now();

    // Verified bits as a function of how long a message waits. The
    // speculative scheme contributes its hit curve under its own name and
    // the miss curve as a separate series.
    Table strength;
    strength.columns = {"scheme", "delay_packets", "bits"};
    auto emit_curve = [&](const std::string& label, const SchemeParams& params,
                          bool speculation_correct) {
        auto profile = strength_profile(params, max_packets, speculation_correct);
        for (std::size_t i = 0; i < profile.size(); ++i) {
            strength.add_row({Cell{label}, icell(i), icell(profile[i])});
        }
    };
    for (SchemeKind kind : kinds) {
        SchemeParams params = scheme_params_from(cfg, kind);
        if (kind == SchemeKind::cumac_spec) {
            emit_curve(scheme_name(kind), params, true);
            emit_curve(std::string(scheme_name(kind)) + "-miss", params, false);
        } else {
            emit_curve(scheme_name(kind), params, false);
        }
    }

    // Headline strengths: on arrival, after a fixed accumulation window, and
    // once every covering packet has arrived.
    Table summary;
    summary.columns = {"scheme", "real_time_bits", "accumulation_packets",
                       "accumulated_bits", "full_bits"};
    for (SchemeKind kind : kinds) {
        SchemeParams params = scheme_params_from(cfg, kind);
        bool hit = kind == SchemeKind::cumac_spec;
        summary.add_row({scell(scheme_name(kind)),
                         icell(strength_after(params, 1, hit)),
                         icell(accumulation_packets),
                         icell(strength_after(params, accumulation_packets, hit)),
                         icell(strength_after(params, max_packets, hit))});
    }

    // Authenticated fraction across the loss sweep, one run per point.
    Table loss;
    loss.columns = {"scheme",
                    "drop_rate",
                    "messages_sent",
                    "messages_delivered",
                    "messages_authenticated",
                    "authenticated_fraction",
                    "packets_emitted"};
    for (SchemeKind kind : kinds) {
        SchemeParams params = scheme_params_from(cfg, kind);
        for (double rho : drop_rates) {
            ChannelConfig channel;
            channel.drop_rate = rho;
            channel.retransmit = false;
            channel.rng_seed = seed;
            channel.num_messages = num_messages;
            channel.payload_bits = payload_bits;
            channel.max_message_reports = 0;
            channel.validate();
            LossReport report = run_lossy(params, key, channel, trace ? &*trace : nullptr);
            loss.add_row({scell(scheme_name(kind)), Cell{rho},
                          icell(report.messages_sent), icell(report.messages_delivered),
                          icell(report.messages_authenticated),
                          Cell{report.authenticated_fraction},
                          icell(report.packets_emitted)});
        }
    }
    auto t1 = std::chrono::steady_clock::now();

    ReportSink sink{options, config_digest(cfg), seed, {}};
    sink.add("compare_strength", std::move(strength));
    sink.add("compare_summary", std::move(summary));
    sink.add("compare_loss", std::move(loss));
    sink.flush(out);
    err << "compare: " << kinds.size() << " schemes, " << drop_rates.size()
        << " loss rates in "
        << format_double(std::chrono::duration<double>(t1 - t0).count()) << " s\n";
    return 0;
}

}  // namespace

// ---------------------------------------------------------------------------
// Public entry points
// ---------------------------------------------------------------------------

json default_config() {
    json mac = {
        {"total_bits", 128}, {"segment_count", 8}, {"segment_bits", 16},
        {"algo", "aes-cmac"}, {"key_bits", 128},   {"key_seed", 7},
    };
    json schemes = {
        {"trailing_split", 2},
        {"speculation",
         {{"p", 1}, {"d", 1}, {"coeffs_q16", json::array({65536})}, {"lsb_ignore", 0}}},
    };
    json simulate = {
        {"scheme", "cumac"},
        {"seed", 1},
        {"num_messages", 10000},
        {"payload_bits", 64},
        {"drop_rate", 0.1},
        {"retransmit", false},
        {"value_shift", 0},
        {"message_rows", 64},
        {"trace", {{"source", ""}, {"count", 4096}}},
    };
    json busload = {
        {"bus_speed_bps", 500000.0},
        {"frame_overhead_bits", 47.0},
        {"stuffing_factor", 1.0},
        {"payload_bytes", json::array({{1, 0.35}, {2, 0.49}, {4, 0.13}, {6, 0.03}})},
        {"period_ms", json::array({{5, 0.07},
                                   {10, 0.25},
                                   {20, 0.25},
                                   {50, 0.03},
                                   {100, 0.2},
                                   {200, 0.01},
                                   {1000, 0.19}})},
        {"load_caps", json::array({0.4, 0.8})},
        {"modes",
         json::array(
             {{{"name", "none"}, {"tag_bits", 0}, {"extra_packets", 0}, {"extra_bits", 0}},
              {{"name", "short"}, {"tag_bits", 16}, {"extra_packets", 0}, {"extra_bits", 0}},
              {{"name", "trailing"},
               {"tag_bits", 0},
               {"extra_packets", 2},
               {"extra_bits", 64}},
              {{"name", "full"},
               {"tag_bits", 128},
               {"extra_packets", 0},
               {"extra_bits", 0}}})},
    };
    json energy = {
        {"battery_capacity", 28800.0},
        {"idle_cost_per_day", 0.11},
        {"messages_per_day", 24.0},
        {"fixed_cost_per_message", 0.2},
        {"cost_per_bit", 0.002},
        {"message_bits", 48},
        {"tag_bits", json::array({0, 16, 32, 64, 128})},
    };
    json speculate = {
        {"seed", 5},
        {"trace", {{"source", "torque"}, {"count", 4096}}},
        {"train_fraction", 0.9},
        {"max_lag", 12},
        {"orders", json::array({{1, 0}, {1, 1}, {2, 0}, {2, 1}, {3, 1}})},
        {"lsb_ignore", json::array({0, 2, 4})},
    };
    json attack = {
        {"seed", 11},
        {"mac", {{"total_bits", 8}, {"segment_count", 4}, {"segment_bits", 2}}},
        {"algo", "toy"},
        {"lambda_bits", 64},
        {"payload_bits", 16},
        {"speculation",
         {{"p", 1}, {"d", 0}, {"coeffs_q16", json::array({65536})}, {"lsb_ignore", 0}}},
        {"runs",
         json::array(
             {{{"name", "cumac-guess-r1"},
               {"kind", "cumac"},
               {"strategy", "random_guess"},
               {"r", 1},
               {"beta", 0.0},
               {"trials", 50000}},
              {{"name", "cumac-recover-r1"},
               {"kind", "cumac"},
               {"strategy", "recovery"},
               {"r", 1},
               {"beta", 0.0},
               {"trials", 200000}},
              {{"name", "cumac-recover-r2"},
               {"kind", "cumac"},
               {"strategy", "recovery"},
               {"r", 2},
               {"beta", 0.0},
               {"trials", 400000}},
              {{"name", "cumac-recover-r3"},
               {"kind", "cumac"},
               {"strategy", "recovery"},
               {"r", 3},
               {"beta", 0.0},
               {"trials", 400000}},
              {{"name", "cumac-recover-r4"},
               {"kind", "cumac"},
               {"strategy", "recovery"},
               {"r", 4},
               {"beta", 0.0},
               {"trials", 1000000}},
              {{"name", "cumacs-recover-b00"},
               {"kind", "cumac-s"},
               {"strategy", "recovery"},
               {"r", 1},
               {"beta", 0.0},
               {"trials", 300000}},
              {{"name", "cumacs-recover-b05"},
               {"kind", "cumac-s"},
               {"strategy", "recovery"},
               {"r", 1},
               {"beta", 0.5},
               {"trials", 300000}},
              {{"name", "cumacs-recover-b10"},
               {"kind", "cumac-s"},
               {"strategy", "recovery"},
               {"r", 1},
               {"beta", 1.0},
               {"trials", 300000}}})},
    };
    json compare = {
        {"seed", 3},
        {"schemes", json::array({"truncated", "trailing", "compound", "aggregate",
                                 "cumac", "cumac-s"})},
        {"max_packets", 16},
        {"accumulation_packets", 4},
        {"drop_rates", json::array({0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4,
                                    0.45, 0.5})},
        {"num_messages", 1000},
        {"payload_bits", 64},
        {"trace", {{"source", "drift"}, {"count", 4096}}},
    };
    return json{{"mac", mac},       {"schemes", schemes}, {"simulate", simulate},
                {"busload", busload}, {"energy", energy},   {"speculate", speculate},
                {"attack", attack},   {"compare", compare}};
}

json effective_config(const std::string& config_path) {
    json config = default_config();
    if (config_path.empty()) return config;
    std::ifstream in(config_path, std::ios::binary);
    if (!in) {
        throw ConfigError("cannot open config file: " + config_path);
    }
    json user;
    try {
        user = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + config_path + " is not valid JSON: " +
                          e.what());
    }
    if (!user.is_object()) {
        throw ConfigError("config file must hold a JSON object: " + config_path);
    }
    config.merge_patch(user);
    return config;
}

std::string config_digest(const json& config) { return fnv1a_hex(config.dump()); }

int run_command(const std::string& command, const CommonOptions& options,
                std::ostream& out, std::ostream& err) {
    try {
        if (options.format != "csv" && options.format != "json") {
            throw ConfigError("unknown output format '" + options.format +
                              "' (expected csv or json)");
        }
        json config = effective_config(options.config_path);
        if (command == "simulate") return cmd_simulate(config, options, out, err);
        if (command == "busload") return cmd_busload(config, options, out, err);
        if (command == "energy") return cmd_energy(config, options, out, err);
        if (command == "speculate") return cmd_speculate(config, options, out, err);
        if (command == "attack") return cmd_attack(config, options, out, err);
        if (command == "compare") return cmd_compare(config, options, out, err);
        throw ConfigError("unknown command '" + command + "'");
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace cumac::cli
