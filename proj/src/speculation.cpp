#include "cumac/speculation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "cumac/errors.hpp"

namespace cumac {

void SpeculationConfig::validate() const {
    if (p == 0 || p > 16) {
        throw ConfigError("AR order p must be in [1, 16]");
    }
    if (d > 4) {
        throw ConfigError("differencing order d must be at most 4");
    }
    if (coeffs_q16.size() != p) {
        throw ConfigError("coefficient count must equal p");
    }
    if (lsb_ignore > 64) {
        throw ConfigError("lsb_ignore must be at most 64");
    }
}

SpeculationConfig persistence_config() {
    SpeculationConfig c;
    c.p = 1;
    c.d = 0;
    c.coeffs_q16 = {1 << 16};
    return c;
}

namespace {

// d-th difference of the tail of the history, exact integer arithmetic.
// Returns the difference series (chronological) and the last value of each
// intermediate level, needed to integrate a predicted difference back up.
struct DifferenceState {
    std::vector<std::int64_t> diffs;        // level-d series
    std::vector<std::int64_t> last_levels;  // last value at levels 0..d-1
};

DifferenceState difference(const std::vector<std::int64_t>& values, std::uint32_t d) {
    DifferenceState st;
    std::vector<std::int64_t> cur = values;
    for (std::uint32_t level = 0; level < d; ++level) {
        st.last_levels.push_back(cur.back());
        std::vector<std::int64_t> next(cur.size() - 1);
        for (std::size_t i = 0; i + 1 < cur.size(); ++i) {
            next[i] = cur[i + 1] - cur[i];
        }
        cur = std::move(next);
    }
    st.diffs = std::move(cur);
    return st;
}

// Fixed-point half-up rounding: floor(x / 2^16 + 1/2), ties toward +inf.
std::int64_t round_q16(__int128 x) {
    return static_cast<std::int64_t>((x + 32768) >> 16);
}

}  // namespace

bool masked_equal(std::int64_t a, std::int64_t b, std::uint32_t lsb_ignore) {
    if (lsb_ignore >= 64) {
        return true;
    }
    return (a >> lsb_ignore) == (b >> lsb_ignore);
}

std::int64_t predict_next(const std::vector<std::int64_t>& history,
                          const SpeculationConfig& config) {
    config.validate();
    if (history.empty()) {
        throw ConfigError("prediction requires at least one observation");
    }
    if (history.size() < config.history_min()) {
        return history.back();
    }

    // Only the last p + d samples matter.
    std::vector<std::int64_t> tail(history.end() - config.history_min(), history.end());
    auto st = difference(tail, config.d);

    // AR step on the level-d series, Q16 accumulation.
    __int128 acc = 0;
    for (std::uint32_t a = 0; a < config.p; ++a) {
        acc += static_cast<__int128>(config.coeffs_q16[a]) *
               st.diffs[st.diffs.size() - 1 - a];
    }

    // Integrate the predicted difference back through the levels. Level
    // values are exact integers, so they enter the Q16 domain shifted.
    for (auto it = st.last_levels.rbegin(); it != st.last_levels.rend(); ++it) {
        acc += static_cast<__int128>(*it) << 16;
    }
    return round_q16(acc);
}

SpeculationConfig fit_ar(const Trace& trace, std::uint32_t p, std::uint32_t d,
                         double train_fraction) {
    if (train_fraction <= 0.0 || train_fraction > 1.0) {
        throw ConfigError("train_fraction must be in (0, 1]");
    }
    SpeculationConfig config;
    config.p = p;
    config.d = d;
    config.coeffs_q16.assign(p, 0);
    config.validate();

    std::size_t train_count =
        static_cast<std::size_t>(trace.values.size() * train_fraction);
    if (train_count < p + d + p) {
        throw ConfigError("trace too short for the requested model order");
    }
    std::vector<std::int64_t> train(trace.values.begin(),
                                    trace.values.begin() + static_cast<long>(train_count));
    auto st = difference(train, d);
    const auto& w = st.diffs;

    // Normal equations for w[t] ~ sum_a phi_a * w[t-a].
    std::vector<double> a_mat(p * p, 0.0), b_vec(p, 0.0);
    for (std::size_t t = p; t < w.size(); ++t) {
        for (std::uint32_t i = 0; i < p; ++i) {
            double xi = static_cast<double>(w[t - 1 - i]);
            b_vec[i] += xi * static_cast<double>(w[t]);
            for (std::uint32_t j = 0; j < p; ++j) {
                a_mat[i * p + j] += xi * static_cast<double>(w[t - 1 - j]);
            }
        }
    }

    // Gaussian elimination with partial pivoting; a vanishing pivot means the
    // regression is rank deficient (e.g. an exactly constant difference).
    double scale = 0.0;
    for (double v : a_mat) scale = std::max(scale, std::fabs(v));
    bool degenerate = scale == 0.0;
    std::vector<double> phi(p, 0.0);
    if (!degenerate) {
        for (std::uint32_t col = 0; col < p && !degenerate; ++col) {
            std::uint32_t pivot = col;
            for (std::uint32_t r = col + 1; r < p; ++r) {
                if (std::fabs(a_mat[r * p + col]) > std::fabs(a_mat[pivot * p + col])) {
                    pivot = r;
                }
            }
            if (std::fabs(a_mat[pivot * p + col]) < 1e-9 * scale) {
                degenerate = true;
                break;
            }
            if (pivot != col) {
                for (std::uint32_t j = 0; j < p; ++j) {
                    std::swap(a_mat[col * p + j], a_mat[pivot * p + j]);
                }
                std::swap(b_vec[col], b_vec[pivot]);
            }
            for (std::uint32_t r = col + 1; r < p; ++r) {
                double f = a_mat[r * p + col] / a_mat[col * p + col];
                for (std::uint32_t j = col; j < p; ++j) {
                    a_mat[r * p + j] -= f * a_mat[col * p + j];
                }
                b_vec[r] -= f * b_vec[col];
            }
        }
        if (!degenerate) {
            for (int r = static_cast<int>(p) - 1; r >= 0; --r) {
                double s = b_vec[r];
                for (std::uint32_t j = r + 1; j < p; ++j) {
                    s -= a_mat[r * p + j] * phi[j];
                }
                phi[r] = s / a_mat[r * p + r];
            }
        }
    }

    if (degenerate) {
        config.coeffs_q16.assign(p, 0);
        config.coeffs_q16[0] = 1 << 16;
        config.fallback_persistence = true;
        return config;
    }
    for (std::uint32_t i = 0; i < p; ++i) {
        config.coeffs_q16[i] =
            static_cast<std::int64_t>(std::floor(phi[i] * 65536.0 + 0.5));
    }
    return config;
}

double speculation_error_rate(const Trace& trace, const SpeculationConfig& config,
                              double train_fraction) {
    config.validate();
    if (train_fraction <= 0.0 || train_fraction >= 1.0) {
        throw ConfigError("train_fraction must leave a held-out segment");
    }
    std::size_t split = static_cast<std::size_t>(trace.values.size() * train_fraction);
    if (split < config.history_min() || split >= trace.values.size()) {
        throw ConfigError("trace too short for a held-out walk");
    }
    std::size_t errors = 0, total = 0;
    std::vector<std::int64_t> history(trace.values.begin(),
                                      trace.values.begin() + static_cast<long>(split));
    for (std::size_t t = split; t < trace.values.size(); ++t) {
        std::int64_t predicted = predict_next(history, config);
        if (!masked_equal(predicted, trace.values[t], config.lsb_ignore)) {
            ++errors;
        }
        ++total;
        history.push_back(trace.values[t]);
    }
    return static_cast<double>(errors) / static_cast<double>(total);
}

std::vector<double> acf(const std::vector<std::int64_t>& values, std::uint32_t max_lag) {
    if (values.size() < 2 || max_lag >= values.size()) {
        throw ConfigError("series too short for the requested lags");
    }
    double mean = 0.0;
    for (auto v : values) mean += static_cast<double>(v);
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (auto v : values) {
        double c = static_cast<double>(v) - mean;
        var += c * c;
    }
    if (var == 0.0) {
        throw ConfigError("zero-variance series has no autocorrelation");
    }
    std::vector<double> out(max_lag + 1, 0.0);
    for (std::uint32_t k = 0; k <= max_lag; ++k) {
        double s = 0.0;
        for (std::size_t t = 0; t + k < values.size(); ++t) {
            s += (static_cast<double>(values[t]) - mean) *
                 (static_cast<double>(values[t + k]) - mean);
        }
        out[k] = s / var;
    }
    return out;
}

std::vector<double> pacf(const std::vector<std::int64_t>& values, std::uint32_t max_lag) {
    auto rho = acf(values, max_lag);
    std::vector<double> out(max_lag + 1, 0.0);
    out[0] = 1.0;
    if (max_lag == 0) return out;

    // Durbin-Levinson recursion.
    std::vector<double> phi_prev(max_lag + 1, 0.0), phi_cur(max_lag + 1, 0.0);
    double v = 1.0;
    for (std::uint32_t k = 1; k <= max_lag; ++k) {
        double num = rho[k];
        for (std::uint32_t j = 1; j < k; ++j) {
            num -= phi_prev[j] * rho[k - j];
        }
        double alpha = (v == 0.0) ? 0.0 : num / v;
        phi_cur = phi_prev;
        phi_cur[k] = alpha;
        for (std::uint32_t j = 1; j < k; ++j) {
            phi_cur[j] = phi_prev[j] - alpha * phi_prev[k - j];
        }
        v *= (1.0 - alpha * alpha);
        out[k] = alpha;
        phi_prev = phi_cur;
    }
    return out;
}

void save_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out.good()) {
        throw FormatError("cannot open trace file for writing: " + path);
    }
    out << "timestamp_ms,value\n";
    for (std::size_t i = 0; i < trace.values.size(); ++i) {
        long long ts = llround(static_cast<double>(i) * trace.period_ms);
        out << ts << "," << trace.values[i] << "\n";
    }
}

Trace load_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in.good()) {
        throw FormatError("cannot open trace file: " + path);
    }
    std::string line;
    if (!std::getline(in, line) || line.rfind("timestamp_ms,value", 0) != 0) {
        throw FormatError("trace file missing 'timestamp_ms,value' header: " + path);
    }
    Trace t;
    auto slash = path.find_last_of('/');
    t.name = slash == std::string::npos ? path : path.substr(slash + 1);
    std::vector<long long> stamps;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::istringstream ss(line);
        long long ts;
        std::int64_t v;
        char comma;
        if (!(ss >> ts >> comma >> v) || comma != ',') {
            throw FormatError("bad trace row at " + path + ":" + std::to_string(line_no));
        }
        stamps.push_back(ts);
        t.values.push_back(v);
    }
    if (stamps.size() >= 2) {
        t.period_ms = static_cast<double>(stamps[1] - stamps[0]);
    }
    return t;
}

Trace make_constant_trace(std::int64_t value, std::size_t count, double period_ms) {
    Trace t{"constant", std::vector<std::int64_t>(count, value), period_ms};
    return t;
}

Trace make_drift_trace(std::int64_t start, std::int64_t slope, std::size_t count,
                       double period_ms) {
    Trace t{"drift", {}, period_ms};
    t.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        t.values.push_back(start + slope * static_cast<std::int64_t>(i));
    }
    return t;
}

Trace make_ar_trace(const std::vector<double>& phi, std::uint32_t d, std::size_t count,
                    double amplitude, double noise_sd, std::uint64_t seed,
                    double period_ms) {
    if (phi.empty()) {
        throw ConfigError("AR generator needs at least one coefficient");
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> init(0.5, 1.0);
    std::normal_distribution<double> noise(0.0, noise_sd);

    std::vector<double> w;
    w.reserve(count);
    for (std::size_t i = 0; i < phi.size(); ++i) {
        // Alternate signs so every transient mode is excited.
        double sign = (i % 2 == 0) ? 1.0 : -1.0;
        w.push_back(sign * amplitude * init(rng));
    }
    while (w.size() < count) {
        double v = noise_sd > 0.0 ? noise(rng) : 0.0;
        for (std::size_t a = 0; a < phi.size(); ++a) {
            v += phi[a] * w[w.size() - 1 - a];
        }
        w.push_back(v);
    }

    // Integrate d times.
    std::vector<double> series = w;
    for (std::uint32_t level = 0; level < d; ++level) {
        std::vector<double> integrated(series.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < series.size(); ++i) {
            acc += series[i];
            integrated[i] = acc;
        }
        series = std::move(integrated);
    }

    Trace t{"ar_synthetic", {}, period_ms};
    t.values.reserve(count);
    for (double v : series) {
        t.values.push_back(static_cast<std::int64_t>(std::llround(v)));
    }
    return t;
}

Trace make_torque_trace(std::size_t count, std::uint64_t seed, double period_ms) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::int64_t> jitter(-2, 2);
    Trace t{"torque", {}, period_ms};
    t.values.reserve(count);
    std::int64_t level = 0;
    std::size_t phase = 0, phase_len = 40;
    int mode = 0;  // 0 ramp up, 1 hold, 2 ramp down, 3 idle
    for (std::size_t i = 0; i < count; ++i) {
        switch (mode) {
            case 0: level += 250; break;
            case 2: level -= 250; break;
            default: break;
        }
        t.values.push_back(level + jitter(rng));
        if (++phase == phase_len) {
            phase = 0;
            mode = (mode + 1) % 4;
        }
    }
    return t;
}

Trace make_jitter_ramp_trace(std::int64_t slope, double jitter_prob, std::size_t count,
                             std::uint64_t seed, double period_ms) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution jitter(jitter_prob);
    Trace t{"jitter_ramp", {}, period_ms};
    t.values.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::int64_t base = slope * static_cast<std::int64_t>(i);
        t.values.push_back(base + (jitter(rng) ? 1 : 0));
    }
    return t;
}

}  // namespace cumac
