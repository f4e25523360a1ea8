#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/core.hpp"
#include "isac/feedback.hpp"

// Evaluation quantities computed from scenario traces: Eq-13 detection
// probability, average sensing latency, and the sensing-to-communications
// power-reallocation ratio.

namespace isac::metrics {

enum class ProtocolKind { ssf, earq, openloop };

inline const char* protocol_name(ProtocolKind p) {
    switch (p) {
    case ProtocolKind::ssf: return "ssf";
    case ProtocolKind::earq: return "earq";
    case ProtocolKind::openloop: return "openloop";
    }
    return "?";
}

// Per-scan protocol outcome label. SSF records H0..H3, e-ARQ its three
// categories, open-loop none.
enum class HypoLabel { h0, h1, h2, h3, ack, nack, lost, none };

inline const char* hypo_name(HypoLabel h) {
    switch (h) {
    case HypoLabel::h0: return "H0";
    case HypoLabel::h1: return "H1";
    case HypoLabel::h2: return "H2";
    case HypoLabel::h3: return "H3";
    case HypoLabel::ack: return "ACK";
    case HypoLabel::nack: return "NACK";
    case HypoLabel::lost: return "LOST";
    case HypoLabel::none: return "NONE";
    }
    return "?";
}

inline const char* report_name(feedback::ReportKind r) {
    switch (r) {
    case feedback::ReportKind::binary: return "binary";
    case feedback::ReportKind::state_id: return "state_id";
    case feedback::ReportKind::state_plus_peak: return "state_plus_peak";
    case feedback::ReportKind::full_measurement: return "full_measurement";
    }
    return "?";
}

struct ScanRecord {
    int scan = 0;
    double time_s = 0.0;
    int beam = 0;
    HypoLabel hypothesis = HypoLabel::none;
    double resi = 0.0;
    double p_used_dbm = 0.0;
    double p_budget_dbm = 0.0;
    bool tg_in_region = false;
    bool tg_in_beam = false;
    feedback::ReportKind report = feedback::ReportKind::full_measurement;
};

struct TraceMeta {
    ProtocolKind protocol = ProtocolKind::openloop;
    double top_threshold = 0.0; // T1: eta2 for SSF, eta1 for e-ARQ, config value for open-loop
    double scan_duration_s = 0.01;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string code_version;
};

struct ScenarioTrace {
    TraceMeta meta;
    std::vector<ScanRecord> records;
};

struct MetricError : std::runtime_error {
    explicit MetricError(const std::string& what) : std::runtime_error(what) {}
};

// The protocol's "detected" state, mapped per protocol so the latency metric
// is comparable: SSF H3, e-ARQ ACK, open-loop geometric alignment with a
// RESI above the configured detection threshold.
inline bool detected_state(const ScanRecord& r, const TraceMeta& m) {
    switch (m.protocol) {
    case ProtocolKind::ssf: return r.hypothesis == HypoLabel::h3;
    case ProtocolKind::earq: return r.hypothesis == HypoLabel::ack;
    case ProtocolKind::openloop: return r.tg_in_beam && r.resi > m.top_threshold;
    }
    return false;
}

// Eq-13 ratio: scans with (target in the illuminated beam AND RESI > T1)
// over scans with the target inside the sensing region.
inline double detection_probability(const ScenarioTrace& trace) {
    std::size_t num = 0, den = 0;
    for (const auto& r : trace.records) {
        if (!r.tg_in_region) continue;
        ++den;
        if (r.tg_in_beam && r.resi > trace.meta.top_threshold) ++num;
    }
    if (den == 0) throw MetricError("detection_probability: target never inside the region");
    return static_cast<double>(num) / static_cast<double>(den);
}

struct LatencyStats {
    std::optional<double> mean_scans; // absent when no interval completed
    std::optional<double> mean_seconds;
    int completed = 0;
    int censored = 0;
};

// Latency intervals start when the target enters the region or when the
// protocol drops out of its detected state while the target is inside, and
// end (inclusive) at the next detected-state scan. Intervals cut short by
// the target leaving or by the trace ending are censored.
inline LatencyStats average_sensing_latency(const ScenarioTrace& trace) {
    LatencyStats out;
    bool prev_in_region = false, prev_detected = false;
    long open_len = -1;
    double sum = 0.0;
    for (const auto& r : trace.records) {
        const bool det = detected_state(r, trace.meta);
        if (!r.tg_in_region) {
            if (open_len >= 0) {
                ++out.censored;
                open_len = -1;
            }
        } else {
            if (open_len < 0 && (!prev_in_region || (prev_detected && !det)))
                open_len = 0;
            if (open_len >= 0) {
                ++open_len;
                if (det) {
                    sum += static_cast<double>(open_len);
                    ++out.completed;
                    open_len = -1;
                }
            }
        }
        prev_in_region = r.tg_in_region;
        prev_detected = det;
    }
    if (open_len >= 0) ++out.censored;
    if (out.completed > 0) {
        out.mean_scans = sum / out.completed;
        out.mean_seconds = *out.mean_scans * trace.meta.scan_duration_s;
    }
    return out;
}

// Mean over scans of (budget - used) / budget in linear power units: the
// fraction of the sensing budget returned to communications.
inline double power_reallocation_ratio(const ScenarioTrace& trace) {
    if (trace.records.empty()) throw MetricError("power_reallocation_ratio: empty trace");
    double acc = 0.0;
    for (const auto& r : trace.records) {
        const double budget = dbm_to_watts(r.p_budget_dbm);
        const double used = dbm_to_watts(r.p_used_dbm);
        acc += (budget - used) / budget;
    }
    return acc / trace.records.size();
}

// Transitions into the detected state (lock events).
inline int lock_unlock_cycles(const ScenarioTrace& trace) {
    int locks = 0;
    bool prev = false;
    for (const auto& r : trace.records) {
        const bool det = detected_state(r, trace.meta);
        if (det && !prev) ++locks;
        prev = det;
    }
    return locks;
}

// Average consumed sensing power in dBm (linear mean, then back to dB).
inline double consumed_power_dbm(const ScenarioTrace& trace) {
    if (trace.records.empty()) throw MetricError("consumed_power_dbm: empty trace");
    double acc = 0.0;
    for (const auto& r : trace.records) acc += dbm_to_watts(r.p_used_dbm);
    return watts_to_dbm(acc / trace.records.size());
}

struct ScenarioMetrics {
    double p_det = 0.0;
    LatencyStats latency;
    double realloc_ratio = 0.0;
    int lock_cycles = 0;
    double consumed_dbm = 0.0;
};

inline ScenarioMetrics compute_all(const ScenarioTrace& trace) {
    ScenarioMetrics m;
    m.p_det = detection_probability(trace);
    m.latency = average_sensing_latency(trace);
    m.realloc_ratio = power_reallocation_ratio(trace);
    m.lock_cycles = lock_unlock_cycles(trace);
    m.consumed_dbm = consumed_power_dbm(trace);
    return m;
}

} // namespace isac::metrics
