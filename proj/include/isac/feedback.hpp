#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <utility>

#include "isac/core.hpp"

// The three closed-loop protocols as deterministic state machines: open-loop
// sweep, e-ARQ (ACK/NACK/Lost), and the four-state SSF machine. Steps are
// pure: (state, inputs) -> (action, next state).

namespace isac::feedback {

enum class Hypothesis { h0 = 0, h1 = 1, h2 = 2, h3 = 3 };

struct ThresholdVector {
    double eta0, eta1, eta2;

    ThresholdVector(double e0, double e1, double e2) : eta0(e0), eta1(e1), eta2(e2) {
        if (!(eta0 < eta1 && eta1 < eta2))
            throw std::invalid_argument("thresholds must satisfy eta0 < eta1 < eta2");
    }
};

struct EArqThresholds {
    double eta0, eta1;

    EArqThresholds(double e0, double e1) : eta0(e0), eta1(e1) {
        if (!(eta0 < eta1))
            throw std::invalid_argument("e-ARQ thresholds must satisfy eta0 < eta1");
    }
};

enum class BeamDirective { stay, next_adjacent, adjacent_higher_resi, restart };
enum class ReportKind { binary, state_id, state_plus_peak, full_measurement };

struct FeedbackAction {
    BeamDirective beam_directive = BeamDirective::stay;
    double power_delta_db = 0.0; // requested; the applied power is clamped
    std::optional<bool> scanning;
    ReportKind report = ReportKind::binary;
};

struct PowerPolicy {
    double min_dbm = -20.0;
    double max_dbm = -3.0; // per-run sensing budget
    double step_down_db = 1.0;
    double step_up_db = 2.0;
};

struct SsfOptions {
    // Where the H0 restart branch sends the sweep.
    bool restart_at_last_detected = true;
    // sticky: previously_detected persists through the reacquisition sweep
    // (power keeps climbing each fruitless scan) until re-detection or
    // give-up. one_shot: the flag is cleared by the first restart, as a
    // single power bump.
    bool sticky_reacquire = true;
    int search_giveup_scans = 35;
};

struct ProtocolState {
    int beam = 0;
    double power_dbm = -3.0;
    bool scanning = true;
    bool previously_detected = false;
    int sweep_dir = +1;
    int last_detected_beam = 0;

    // reacquisition bookkeeping (SSF sticky mode)
    bool searching = false;
    int scans_since_loss = 0;

    // Latched on the first H3. Until first contact the sweep holds the
    // granted budget; the Eq-12 power reductions apply only afterwards.
    bool ever_detected = false;

    // H2 neighbor-probe sub-state: 0 idle, 1 probing anchor+1, 2 probing anchor-1
    int probe_phase = 0;
    int probe_anchor = 0;
    double probe_right_resi = 0.0;
};

// Multi-hypothesis test: H3 above eta2, H0 at or below eta0, bands between.
inline Hypothesis classify(double resi, const ThresholdVector& t) {
    if (resi > t.eta2) return Hypothesis::h3;
    if (resi > t.eta1) return Hypothesis::h2;
    if (resi > t.eta0) return Hypothesis::h1;
    return Hypothesis::h0;
}

enum class EArqCategory { ack, nack, lost };

inline EArqCategory classify_earq(double resi, const EArqThresholds& t) {
    if (resi > t.eta1) return EArqCategory::ack;
    if (resi > t.eta0) return EArqCategory::nack;
    return EArqCategory::lost;
}

namespace detail {

inline double clamp_power(double dbm, const PowerPolicy& p) {
    return std::clamp(dbm, p.min_dbm, p.max_dbm);
}

inline int wrap_beam(int b, int n_beam) {
    b %= n_beam;
    return b < 0 ? b + n_beam : b;
}

} // namespace detail

// One SSF transition. `resi` is the measurement that produced `h` (kept for
// the neighbor-probe bookkeeping); `resi_neighbors` carries fresh left/right
// RESI values when the caller has them, letting H2 commit without probing.
inline std::pair<FeedbackAction, ProtocolState>
ssf_step(const ProtocolState& state, Hypothesis h, double resi,
         std::optional<std::pair<double, double>> resi_neighbors, int n_beam,
         const PowerPolicy& power, const SsfOptions& opt = {}) {
    if (n_beam < 2) throw std::invalid_argument("ssf_step: n_beam must be >= 2");
    FeedbackAction a;
    ProtocolState s = state;

    auto lower = [&] {
        if (!s.ever_detected) return; // budget funds the initial search
        if (s.searching) return;      // the A0 recovery owns power while reacquiring
        a.power_delta_db = -power.step_down_db;
        s.power_dbm = detail::clamp_power(s.power_dbm - power.step_down_db, power);
    };
    auto raise = [&] {
        a.power_delta_db = power.step_up_db;
        s.power_dbm = detail::clamp_power(s.power_dbm + power.step_up_db, power);
    };
    auto advance = [&] { s.beam = detail::wrap_beam(s.beam + s.sweep_dir, n_beam); };

    // H3 short-circuits everything, including an active probe.
    if (h == Hypothesis::h3) {
        s.probe_phase = 0;
        s.ever_detected = true;
        s.previously_detected = true;
        s.searching = false;
        s.scans_since_loss = 0;
        s.last_detected_beam = s.beam;
        s.scanning = false;
        lower();
        a.beam_directive = BeamDirective::stay;
        a.scanning = false;
        a.report = ReportKind::state_plus_peak;
        return {a, s};
    }

    if (s.searching) ++s.scans_since_loss;

    // Active probe: finish the two-scan neighbor sweep at held power.
    if (s.probe_phase == 1) {
        s.probe_right_resi = resi; // measured at anchor+1 this scan
        s.probe_phase = 2;
        s.beam = detail::wrap_beam(s.probe_anchor - 1, n_beam);
        a.beam_directive = BeamDirective::adjacent_higher_resi;
        a.report = ReportKind::state_id;
        return {a, s};
    }
    if (s.probe_phase == 2) {
        const double left = resi; // measured at anchor-1 this scan
        s.probe_phase = 0;
        s.beam = s.probe_right_resi > left ? detail::wrap_beam(s.probe_anchor + 1, n_beam)
                                           : detail::wrap_beam(s.probe_anchor - 1, n_beam);
        a.beam_directive = BeamDirective::adjacent_higher_resi;
        a.report = ReportKind::state_id;
        return {a, s};
    }

    switch (h) {
    case Hypothesis::h2: {
        s.scanning = false;
        a.scanning = false;
        a.report = ReportKind::state_id;
        a.beam_directive = BeamDirective::adjacent_higher_resi;
        lower();
        if (resi_neighbors) {
            const auto [left, right] = *resi_neighbors;
            s.beam = right > left ? detail::wrap_beam(s.beam + 1, n_beam)
                                  : detail::wrap_beam(s.beam - 1, n_beam);
        } else {
            s.probe_phase = 1;
            s.probe_anchor = s.beam;
            s.beam = detail::wrap_beam(s.beam + 1, n_beam);
        }
        return {a, s};
    }
    case Hypothesis::h1: {
        s.scanning = true;
        a.scanning = true;
        a.report = ReportKind::state_id;
        a.beam_directive = BeamDirective::next_adjacent;
        lower();
        advance();
        return {a, s};
    }
    case Hypothesis::h0: {
        a.report = ReportKind::binary;
        if (s.previously_detected && !s.searching) {
            // Track loss: bump power and restart the sweep.
            raise();
            s.scanning = true;
            a.scanning = true;
            a.beam_directive = BeamDirective::restart;
            s.beam = opt.restart_at_last_detected ? s.last_detected_beam : 0;
            if (opt.sticky_reacquire) {
                s.searching = true;
                s.scans_since_loss = 1;
            } else {
                s.previously_detected = false;
            }
            return {a, s};
        }
        if (s.searching) {
            if (s.scans_since_loss > opt.search_giveup_scans) {
                // Give up: fall back to the plain sweep-and-decay regime.
                s.searching = false;
                s.previously_detected = false;
                s.scans_since_loss = 0;
            } else {
                // Sweep at held power; bump again after each fruitless ring.
                if (s.scans_since_loss % n_beam == 0) raise();
                s.scanning = true;
                a.scanning = true;
                a.beam_directive = BeamDirective::next_adjacent;
                advance();
                return {a, s};
            }
        }
        s.scanning = true;
        a.scanning = true;
        a.beam_directive = BeamDirective::next_adjacent;
        lower();
        advance();
        return {a, s};
    }
    default:
        throw std::logic_error("unreachable hypothesis");
    }
}

// One e-ARQ transition: fixed thresholds, no state memory beyond the beam
// and power. ACK dwells and spends, NACK retransmits as is, Lost sweeps on.
inline std::pair<FeedbackAction, ProtocolState>
earq_step(const ProtocolState& state, double resi, const EArqThresholds& t, int n_beam,
          const PowerPolicy& power) {
    if (n_beam < 2) throw std::invalid_argument("earq_step: n_beam must be >= 2");
    FeedbackAction a;
    a.report = ReportKind::binary;
    ProtocolState s = state;
    switch (classify_earq(resi, t)) {
    case EArqCategory::ack:
        a.beam_directive = BeamDirective::stay;
        a.power_delta_db = -power.step_down_db;
        s.power_dbm = detail::clamp_power(s.power_dbm - power.step_down_db, power);
        s.scanning = false;
        a.scanning = false;
        s.previously_detected = true;
        s.last_detected_beam = s.beam;
        break;
    case EArqCategory::nack:
        a.beam_directive = BeamDirective::stay; // pure retransmission
        s.scanning = false;
        a.scanning = false;
        break;
    case EArqCategory::lost:
        a.beam_directive = BeamDirective::next_adjacent;
        s.scanning = true;
        a.scanning = true;
        s.beam = detail::wrap_beam(s.beam + s.sweep_dir, n_beam);
        break;
    }
    return {a, s};
}

// Open-loop: sweep forever at constant power, report everything.
inline std::pair<FeedbackAction, ProtocolState> openloop_step(const ProtocolState& state,
                                                              int n_beam) {
    if (n_beam < 2) throw std::invalid_argument("openloop_step: n_beam must be >= 2");
    FeedbackAction a;
    a.beam_directive = BeamDirective::next_adjacent;
    a.report = ReportKind::full_measurement;
    a.scanning = true;
    ProtocolState s = state;
    s.scanning = true;
    s.beam = detail::wrap_beam(s.beam + s.sweep_dir, n_beam);
    return {a, s};
}

} // namespace isac::feedback
