#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cumac {

// Deterministic autoregressive predictor over integer samples. The model is
// AR(p) applied to the d-th difference of the series. Coefficients are fixed
// point with scale 2^16 so that two endpoints computing predictions from the
// same history always agree bit for bit.
struct SpeculationConfig {
    std::uint32_t p = 1;
    std::uint32_t d = 0;
    std::vector<std::int64_t> coeffs_q16 = {1 << 16};  // lag 1 first
    std::uint32_t lsb_ignore = 0;   // low bits masked off in error-rate checks
    bool fallback_persistence = false;  // set when fitting degenerated

    std::uint32_t history_min() const { return p + d; }
    void validate() const;
};

// Simple persistence model: next value = last value.
SpeculationConfig persistence_config();

struct Trace {
    std::string name;
    std::vector<std::int64_t> values;
    double period_ms = 10.0;
};

// One-step prediction from chronological history. With fewer than p + d
// samples the prediction degrades to the last observed value; an empty
// history is a configuration error. Rounding of the fixed-point result is
// half-toward-positive-infinity.
std::int64_t predict_next(const std::vector<std::int64_t>& history,
                          const SpeculationConfig& config);

// Least-squares AR(p) fit on the d-th difference of the leading
// train_fraction of the trace. A rank-deficient regression falls back to
// persistence coefficients and sets fallback_persistence.
SpeculationConfig fit_ar(const Trace& trace, std::uint32_t p, std::uint32_t d,
                         double train_fraction = 0.9);

// Fraction of held-out points whose one-step prediction disagrees with the
// observed value after shifting both right by lsb_ignore bits. The walk
// always feeds true observed values forward.
double speculation_error_rate(const Trace& trace, const SpeculationConfig& config,
                              double train_fraction = 0.9);

// Sample autocorrelation for lags 0..max_lag (acf[0] == 1). A zero-variance
// series is rejected.
std::vector<double> acf(const std::vector<std::int64_t>& values, std::uint32_t max_lag);

// Partial autocorrelation via Durbin-Levinson, same indexing (pacf[0] == 1).
std::vector<double> pacf(const std::vector<std::int64_t>& values, std::uint32_t max_lag);

// Masked equality used by the error-rate walk: arithmetic shift by
// lsb_ignore (64 or more collapses everything to equal).
bool masked_equal(std::int64_t a, std::int64_t b, std::uint32_t lsb_ignore);

// ---- Trace I/O -----------------------------------------------------------

// CSV with header "timestamp_ms,value"; timestamps are index * period_ms.
void save_trace_csv(const Trace& trace, const std::string& path);
Trace load_trace_csv(const std::string& path);

// ---- Synthetic generators -------------------------------------------------

Trace make_constant_trace(std::int64_t value, std::size_t count, double period_ms = 10.0);
Trace make_drift_trace(std::int64_t start, std::int64_t slope, std::size_t count,
                       double period_ms = 10.0);

// AR(p) recursion (double precision, optional Gaussian noise) applied to the
// d-th difference, then integrated and rounded to integers. With zero noise
// and a large amplitude the integer rounding is negligible relative to the
// signal, so a fit recovers the coefficients almost exactly.
Trace make_ar_trace(const std::vector<double>& phi, std::uint32_t d, std::size_t count,
                    double amplitude, double noise_sd, std::uint64_t seed,
                    double period_ms = 10.0);

// Ramp / plateau / release profile with small proportional noise, shaped like
// an actuation torque command.
Trace make_torque_trace(std::size_t count, std::uint64_t seed, double period_ms = 10.0);

// Linear ramp plus Bernoulli(jitter_prob) +1 jitter on the least significant
// bit region.
Trace make_jitter_ramp_trace(std::int64_t slope, double jitter_prob, std::size_t count,
                             std::uint64_t seed, double period_ms = 10.0);

}  // namespace cumac
