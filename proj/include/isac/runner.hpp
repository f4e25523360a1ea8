#pragma once

#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "isac/channel.hpp"
#include "isac/config.hpp"
#include "isac/detector.hpp"
#include "isac/feedback.hpp"
#include "isac/metrics.hpp"
#include "isac/optimizer.hpp"
#include "isac/parallel.hpp"
#include "isac/phy.hpp"
#include "isac/rng.hpp"
#include "isac/scene.hpp"

// Scenario orchestration: the per-scan closed loop of target motion,
// channel synthesis, transmission, detection, classification, and protocol
// stepping. One RunContext per config is shared read-only across runs.

namespace isac::harness {

// Per-protocol threshold bundle used by a run.
struct RunThresholds {
    feedback::ThresholdVector ssf{2.4, 3.4, 5.0};
    feedback::EArqThresholds earq{2.4, 5.0};
    double openloop_detection = 5.0;

    static RunThresholds from_config(const ThresholdConfig& t) {
        return {t.ssf_vector(), t.earq_vector(), t.openloop_detection};
    }

    double top_threshold(metrics::ProtocolKind p) const {
        switch (p) {
        case metrics::ProtocolKind::ssf: return ssf.eta2;
        case metrics::ProtocolKind::earq: return earq.eta1;
        case metrics::ProtocolKind::openloop: return openloop_detection;
        }
        return 0.0;
    }
};

// Immutable precomputed machinery shared by every run of one config.
struct RunContext {
    scene::BeamGrid grid;
    std::vector<cvec> beam_steerings; // raw alpha per beam, BS array
    std::vector<cvec> comm_steerings; // raw alpha per communicating UE
    cvec w_ue;                        // unit-norm receive combiner
    double ue_boresight_az = 0.0;
    std::unique_ptr<detector::FilterBank> bank;
    double sigma_z = 0.0;
    std::string config_hash;
    int n_scans = 0;
};

inline RunContext build_context(const SimConfig& cfg) {
    cfg.validate();
    RunContext ctx;
    ctx.grid = scene::build_beam_grid(cfg.scene.region);
    ctx.config_hash = cfg.fingerprint();
    ctx.n_scans = cfg.scan_count();

    for (double az : ctx.grid.centers_az) {
        const channel::Angle2D local{az - cfg.scene.bs_boresight_az, ctx.grid.elevation};
        ctx.beam_steerings.push_back(channel::steering_vector(cfg.arrays.bs, local));
    }
    for (int i = 0; i < cfg.power.n_comm; ++i) {
        const channel::Angle2D local{cfg.power.comm_azimuths[i] - cfg.scene.bs_boresight_az,
                                     cfg.power.comm_elevation};
        ctx.comm_steerings.push_back(channel::steering_vector(cfg.arrays.bs, local));
    }

    // Receive combiner: conjugate steering toward the region centroid.
    const double az_mid = 0.5 * (cfg.scene.region.az_lo + cfg.scene.region.az_hi);
    const double r_mid = 0.5 * (cfg.scene.region.range_lo + cfg.scene.region.range_hi);
    const double ce = std::cos(cfg.scene.region.elevation);
    const scene::Vec3 centroid{cfg.scene.bs_pos.x + r_mid * ce * std::cos(az_mid),
                               cfg.scene.bs_pos.y + r_mid * ce * std::sin(az_mid),
                               cfg.scene.bs_pos.z + r_mid * std::sin(cfg.scene.region.elevation)};
    ctx.ue_boresight_az = std::atan2(centroid.y - cfg.scene.ue_pos.y,
                                     centroid.x - cfg.scene.ue_pos.x);
    const channel::Angle2D look =
        channel::angle_from(cfg.scene.ue_pos, centroid, ctx.ue_boresight_az);
    ctx.w_ue = channel::steering_vector(cfg.arrays.ue, look);
    const double norm = std::sqrt(static_cast<double>(ctx.w_ue.size()));
    for (auto& v : ctx.w_ue) v /= norm;

    detector::GridBounds gb;
    gb.region = cfg.scene.region;
    gb.bs_pos = cfg.scene.bs_pos;
    gb.ue_pos = cfg.scene.ue_pos;
    gb.v_max = cfg.scene.v_max;
    gb.nu_d = cfg.scene.nu_d;
    ctx.bank = std::make_unique<detector::FilterBank>(
        detector::build_grid(gb, cfg.detector.n_del, cfg.detector.n_dop, cfg.ofdm), cfg.ofdm);

    ctx.sigma_z = phy::noise_sigma(cfg.noise.figure_db, cfg.ofdm.w_c, cfg.noise.temperature_k);
    return ctx;
}

struct RunOutput {
    metrics::ScenarioTrace trace;
    std::vector<int> tg_cell; // ground-truth beam cell per scan, -1 outside
};

namespace detail {

inline metrics::HypoLabel label_of(feedback::Hypothesis h) {
    switch (h) {
    case feedback::Hypothesis::h0: return metrics::HypoLabel::h0;
    case feedback::Hypothesis::h1: return metrics::HypoLabel::h1;
    case feedback::Hypothesis::h2: return metrics::HypoLabel::h2;
    case feedback::Hypothesis::h3: return metrics::HypoLabel::h3;
    }
    return metrics::HypoLabel::none;
}

inline metrics::HypoLabel label_of(feedback::EArqCategory c) {
    switch (c) {
    case feedback::EArqCategory::ack: return metrics::HypoLabel::ack;
    case feedback::EArqCategory::nack: return metrics::HypoLabel::nack;
    case feedback::EArqCategory::lost: return metrics::HypoLabel::lost;
    }
    return metrics::HypoLabel::none;
}

} // namespace detail

// One closed-loop scenario: deterministic in (config, protocol, thresholds,
// budget, seed). Noise and symbol draw counts per scan are protocol- and
// threshold-independent, so a fixed seed is a common-random-numbers stream.
inline RunOutput run_scenario(const SimConfig& cfg, const RunContext& ctx,
                              metrics::ProtocolKind protocol, const RunThresholds& thresholds,
                              double budget_dbm, std::uint64_t seed) {
    if (budget_dbm < cfg.power.min_dbm - 1e-12 || budget_dbm > cfg.power.max_dbm + 1e-12)
        throw ConfigError("sim.budget_dbm", "outside the BS power range");

    RandomStream rng(seed);
    scene::TrajectoryCursor cursor(cfg.scene.target.trajectory);

    feedback::PowerPolicy policy{cfg.power.min_dbm, budget_dbm, cfg.power.step_down_db,
                                 cfg.power.step_up_db};
    feedback::ProtocolState state;
    state.beam = 0;
    state.power_dbm = budget_dbm;

    const int n_beam = ctx.grid.n_beam();
    const int l_comm = static_cast<int>(ctx.comm_steerings.size());
    const double lambda0 = cfg.ofdm.lambda0();
    const double scan_dur = cfg.ofdm.scan_duration();
    const double p_comm_total = l_comm > 0 ? dbm_to_watts(cfg.power.comm_power_dbm) : 0.0;

    // Per-beam RESI cache for the SSF H2 neighbor decision.
    std::vector<double> cache_resi(n_beam, 0.0);
    std::vector<int> cache_scan(n_beam, std::numeric_limits<int>::min() / 2);

    RunOutput out;
    out.trace.meta.protocol = protocol;
    out.trace.meta.top_threshold = thresholds.top_threshold(protocol);
    out.trace.meta.scan_duration_s = scan_dur;
    out.trace.meta.seed = seed;
    out.trace.meta.config_hash = ctx.config_hash;
    out.trace.meta.code_version = kCodeVersion;
    out.trace.records.reserve(ctx.n_scans);
    out.tg_cell.reserve(ctx.n_scans);

    const channel::ArrayFrame bs_frame{cfg.scene.bs_pos, cfg.scene.bs_boresight_az};
    const channel::ArrayFrame ue_frame{cfg.scene.ue_pos, ctx.ue_boresight_az};

    std::vector<phy::TargetEchoFactored> echoes(1);

    for (int k = 0; k < ctx.n_scans; ++k) {
        const double t = k * scan_dur;
        const scene::Vec3 tg = cursor.position_at(t);
        const scene::Vec3 vel = cursor.velocity_at(t);
        const bool blocked =
            cfg.scene.blocker && scene::los_blocked(tg, cfg.scene.ue_pos, *cfg.scene.blocker);
        const auto cell = scene::beam_containing(ctx.grid, cfg.scene.bs_pos, tg);
        const bool in_region = cell.has_value();
        // "In beam" is physical alignment: within beam_acceptance cell
        // half-widths of the illuminated beam's center (the lobes of the
        // transmit array overlap adjacent cells).
        bool in_beam = false;
        if (in_region) {
            const scene::Vec3 d = tg - cfg.scene.bs_pos;
            double daz = std::atan2(d.y, d.x) - ctx.grid.centers_az[state.beam];
            while (daz > kPi) daz -= 2.0 * kPi;
            while (daz < -kPi) daz += 2.0 * kPi;
            in_beam = std::abs(daz) <= cfg.scene.beam_acceptance * 0.5 * ctx.grid.cell_width();
        }

        // Doppler of the scatterer leg, plus the fixed LOS offset.
        const scene::Vec3 to_mp = tg - cfg.scene.scatterer.position;
        const double d_mp = to_mp.norm();
        const double radial_rate = d_mp > 1e-12 ? to_mp.dot(vel) / d_mp : 0.0;
        const double nu_nlos = radial_rate / lambda0;
        const double nu_los = nu_nlos + cfg.scene.nu_d;

        // Power split: the protocol owns the sensing power, comm is fixed.
        const double p_sens = dbm_to_watts(state.power_dbm);
        const double p_total = p_sens + p_comm_total;
        const double p_q = p_total / cfg.ofdm.n_sub;
        std::vector<double> gamma(l_comm + 1);
        for (int i = 0; i < l_comm; ++i) gamma[i] = std::sqrt(p_comm_total / l_comm / p_total);
        gamma[l_comm] = std::sqrt(p_sens / p_total);

        std::vector<cvec> steerings = ctx.comm_steerings;
        steerings.push_back(ctx.beam_steerings[state.beam]);
        const phy::BeamformingMatrix f = phy::build_beamforming(steerings, gamma);

        // Data symbols: random QPSK on the comm streams, constant pilots on
        // the sensing stream so the delay-Doppler filter integrates
        // coherently across symbols.
        CMatrix x(l_comm + 1, cfg.ofdm.n_sym);
        for (int row = 0; row < l_comm; ++row)
            for (int n = 0; n < cfg.ofdm.n_sym; ++n) x(row, n) = rng.qpsk();
        for (int n = 0; n < cfg.ofdm.n_sym; ++n) x(l_comm, n) = cd{1.0, 0.0};

        // Factored Eq-7 chain: per stream beam-domain gains instead of the
        // full antenna-domain frame (same algebra, far fewer products).
        phy::TargetEchoFactored& echo = echoes[0];
        echo.b_q.resize(cfg.ofdm.n_sub);
        echo.c_los_q.resize(cfg.ofdm.n_sub);
        echo.c_nlos_q.resize(cfg.ofdm.n_sub);
        echo.psi_los = phy::doppler_vector(nu_los, cfg.ofdm.n_sym, cfg.ofdm.t_sym);
        echo.psi_nlos = phy::doppler_vector(nu_nlos, cfg.ofdm.n_sym, cfg.ofdm.t_sym);
        for (int q = 1; q <= cfg.ofdm.n_sub; ++q) {
            const cvec h_bs = channel::bs_target_channel(q, cfg.arrays.bs, bs_frame, tg,
                                                         lambda0, cfg.ofdm.w_sub)
                                  .coeffs;
            cvec& b = echo.b_q[q - 1];
            b.assign(f.f.cols, cd{0.0, 0.0});
            for (std::size_t e = 0; e < f.f.rows; ++e) {
                const cd he = std::conj(h_bs[e]);
                for (std::size_t l = 0; l < f.f.cols; ++l) b[l] += he * f.f(e, l);
            }
            const auto ue = channel::target_ue_channel(q, cfg.arrays.ue, ue_frame, tg,
                                                       cfg.scene.target.rcs, cfg.scene.scatterer,
                                                       blocked, lambda0, cfg.ofdm.w_sub);
            cd c_los{0.0, 0.0}, c_nlos{0.0, 0.0};
            for (std::size_t e = 0; e < ctx.w_ue.size(); ++e) {
                const cd w = std::conj(ctx.w_ue[e]);
                c_los += w * ue.los.coeffs[e];
                c_nlos += w * ue.nlos.coeffs[e];
            }
            echo.c_los_q[q - 1] = c_los;
            echo.c_nlos_q[q - 1] = c_nlos;
        }

        phy::ReceivedFrame frame =
            phy::received_frame_factored(echoes, p_q, x, cfg.ofdm.n_sub, ctx.sigma_z, rng);
        frame.scan_index = k;
        frame.beam_index = state.beam;

        const auto peak = detector::matched_filter_peak(frame.r, *ctx.bank);
        const double resi = detector::compute_resi(
            frame.r, ctx.bank->filter(peak.delay_index, peak.doppler_index), ctx.sigma_z);

        metrics::ScanRecord rec;
        rec.scan = k;
        rec.time_s = t;
        rec.beam = state.beam;
        rec.resi = resi;
        rec.p_used_dbm = state.power_dbm;
        rec.p_budget_dbm = budget_dbm;
        rec.tg_in_region = in_region;
        rec.tg_in_beam = in_beam;

        const int current_beam = state.beam;
        switch (protocol) {
        case metrics::ProtocolKind::ssf: {
            const feedback::Hypothesis h = feedback::classify(resi, thresholds.ssf);
            rec.hypothesis = detail::label_of(h);
            std::optional<std::pair<double, double>> neighbors;
            const int left = (current_beam + n_beam - 1) % n_beam;
            const int right = (current_beam + 1) % n_beam;
            if (k - cache_scan[left] <= cfg.protocol.neighbor_ttl_scans &&
                k - cache_scan[right] <= cfg.protocol.neighbor_ttl_scans)
                neighbors = std::make_pair(cache_resi[left], cache_resi[right]);
            auto [action, next] = feedback::ssf_step(state, h, resi, neighbors, n_beam, policy,
                                                     cfg.protocol.ssf);
            rec.report = action.report;
            state = next;
            break;
        }
        case metrics::ProtocolKind::earq: {
            rec.hypothesis = detail::label_of(feedback::classify_earq(resi, thresholds.earq));
            auto [action, next] = feedback::earq_step(state, resi, thresholds.earq, n_beam,
                                                      policy);
            rec.report = action.report;
            state = next;
            break;
        }
        case metrics::ProtocolKind::openloop: {
            rec.hypothesis = metrics::HypoLabel::none;
            auto [action, next] = feedback::openloop_step(state, n_beam);
            rec.report = action.report;
            state = next;
            break;
        }
        }

        cache_resi[current_beam] = resi;
        cache_scan[current_beam] = k;
        out.trace.records.push_back(rec);
        out.tg_cell.push_back(in_region ? *cell : -1);
    }
    return out;
}

// Eq-13 detection probability averaged over seeds with common random
// numbers; deterministic in (cfg, protocol, thresholds, budget, seeds).
inline double evaluate_pdet(const SimConfig& cfg, const RunContext& ctx,
                            metrics::ProtocolKind protocol, const RunThresholds& thresholds,
                            double budget_dbm, const std::vector<std::uint64_t>& seeds,
                            int threads = 1) {
    if (seeds.empty()) throw std::invalid_argument("evaluate_pdet: empty seed set");
    std::vector<double> vals(seeds.size());
    parallel_for(
        seeds.size(),
        [&](std::size_t i) {
            const RunOutput run =
                run_scenario(cfg, ctx, protocol, thresholds, budget_dbm, seeds[i]);
            vals[i] = metrics::detection_probability(run.trace); // throws on empty denominator
        },
        threads);
    double acc = 0.0;
    for (double v : vals) acc += v;
    return acc / vals.size();
}

// Ground-truth hypothesis labels for an open-loop calibration run: H3 when
// the target sits in the illuminated cell, H2 one cell off, H1 elsewhere
// inside the region, H0 outside.
inline std::vector<optimizer::LabeledSample> label_calibration(const RunOutput& run,
                                                               int n_beam) {
    std::vector<optimizer::LabeledSample> out;
    out.reserve(run.trace.records.size());
    for (std::size_t i = 0; i < run.trace.records.size(); ++i) {
        const auto& rec = run.trace.records[i];
        const int cell = run.tg_cell[i];
        int label = 0;
        if (cell >= 0) {
            const int d = std::abs(cell - rec.beam);
            const int ring = std::min(d, n_beam - d);
            label = ring == 0 ? 3 : (ring == 1 ? 2 : 1);
        }
        out.push_back({label, rec.resi});
    }
    return out;
}

} // namespace isac::harness
