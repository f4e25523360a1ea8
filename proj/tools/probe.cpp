// Scratch diagnostics used while tuning the default scene. Not installed.
#include <cstdio>
#include <string>

#include "isac/runner.hpp"

using namespace isac;
using namespace isac::harness;

int main(int argc, char** argv) {
    SimConfig cfg;
    const std::string mode = argc > 1 ? argv[1] : "resi";
    const double budget = argc > 2 ? std::atof(argv[2]) : -3.0;

    RunContext ctx = build_context(cfg);
    std::printf("scans=%d sigma_z=%.3e lambda0=%.5f beams=%d\n", ctx.n_scans, ctx.sigma_z,
                cfg.ofdm.lambda0(), ctx.grid.n_beam());
    std::printf("grid delays [%.3e, %.3e] dopplers [%.1f, %.1f]\n",
                ctx.bank->grid().delays.front(), ctx.bank->grid().delays.back(),
                ctx.bank->grid().dopplers.front(), ctx.bank->grid().dopplers.back());

    if (mode == "resi") {
        // Pin the illuminated beam to the target's own cell each scan and
        // report in-beam RESI along the path at fixed power.
        scene::TrajectoryCursor cur(cfg.scene.target.trajectory);
        RandomStream rng(1);
        const double lambda0 = cfg.ofdm.lambda0();
        const channel::ArrayFrame bs_frame{cfg.scene.bs_pos, cfg.scene.bs_boresight_az};
        const channel::ArrayFrame ue_frame{cfg.scene.ue_pos, ctx.ue_boresight_az};
        for (int k = 0; k < ctx.n_scans; k += 20) {
            const double t = k * cfg.ofdm.scan_duration();
            const scene::Vec3 tg = cur.position_at(t);
            const scene::Vec3 vel = cur.velocity_at(t);
            const auto cell = scene::beam_containing(ctx.grid, cfg.scene.bs_pos, tg);
            const bool blocked = cfg.scene.blocker &&
                                 scene::los_blocked(tg, cfg.scene.ue_pos, *cfg.scene.blocker);
            if (!cell) {
                std::printf("k=%4d t=%5.2f pos=(%6.2f,%5.2f) out-of-region blocked=%d\n", k, t,
                            tg.x, tg.y, blocked);
                continue;
            }
            const double p_sens = dbm_to_watts(budget);
            const double p_q = (p_sens + dbm_to_watts(cfg.power.comm_power_dbm)) / cfg.ofdm.n_sub;
            std::vector<double> gamma(cfg.power.n_comm + 1);
            const double ptot = p_sens + dbm_to_watts(cfg.power.comm_power_dbm);
            for (int i = 0; i < cfg.power.n_comm; ++i)
                gamma[i] = std::sqrt(dbm_to_watts(cfg.power.comm_power_dbm) / cfg.power.n_comm / ptot);
            gamma[cfg.power.n_comm] = std::sqrt(p_sens / ptot);
            std::vector<cvec> steer = ctx.comm_steerings;
            steer.push_back(ctx.beam_steerings[*cell]);
            const auto f = phy::build_beamforming(steer, gamma);
            CMatrix x(cfg.power.n_comm + 1, cfg.ofdm.n_sym);
            for (int row = 0; row < cfg.power.n_comm; ++row)
                for (int n = 0; n < cfg.ofdm.n_sym; ++n) x(row, n) = rng.qpsk();
            for (int n = 0; n < cfg.ofdm.n_sym; ++n) x(cfg.power.n_comm, n) = cd{1, 0};

            const scene::Vec3 to_mp = tg - cfg.scene.scatterer.position;
            const double nu_nlos = to_mp.dot(vel) / to_mp.norm() / lambda0;
            phy::TargetEcho echo;
            echo.psi_los = phy::doppler_vector(nu_nlos + cfg.scene.nu_d, cfg.ofdm.n_sym,
                                               cfg.ofdm.t_sym);
            echo.psi_nlos = phy::doppler_vector(nu_nlos, cfg.ofdm.n_sym, cfg.ofdm.t_sym);
            std::vector<CMatrix> s_q(cfg.ofdm.n_sub);
            echo.per_q.resize(cfg.ofdm.n_sub);
            for (int q = 1; q <= cfg.ofdm.n_sub; ++q) {
                s_q[q - 1] = phy::transmit_frame(p_q, f.f, x);
                echo.per_q[q - 1].h_bs =
                    channel::bs_target_channel(q, cfg.arrays.bs, bs_frame, tg, lambda0,
                                               cfg.ofdm.w_sub)
                        .coeffs;
                const auto ue = channel::target_ue_channel(
                    q, cfg.arrays.ue, ue_frame, tg, cfg.scene.target.rcs, cfg.scene.scatterer,
                    blocked, lambda0, cfg.ofdm.w_sub);
                echo.per_q[q - 1].h_ue_los = ue.los.coeffs;
                echo.per_q[q - 1].h_ue_nlos = ue.nlos.coeffs;
            }
            auto frame = phy::received_frame({echo}, s_q, ctx.w_ue, ctx.sigma_z, rng);
            const auto peak = detector::matched_filter_peak(frame.r, *ctx.bank);
            const double resi = detector::compute_resi(
                frame.r, ctx.bank->filter(peak.delay_index, peak.doppler_index), ctx.sigma_z);
            const double d_m = scene::distance(cfg.scene.bs_pos, tg);
            const double d_ue = scene::distance(cfg.scene.ue_pos, tg);
            std::printf(
                "k=%4d t=%5.2f pos=(%6.2f,%5.2f) cell=%2d d_m=%5.2f d_ue=%5.2f blk=%d resi=%7.2f "
                "nu=%6.1f bin=(%d,%d)\n",
                k, t, tg.x, tg.y, *cell, d_m, d_ue, blocked, resi, nu_nlos + cfg.scene.nu_d,
                peak.delay_index, peak.doppler_index);
        }
        return 0;
    }

    if (mode == "noise") {
        // Noise floor: RESI of noise-only frames.
        RandomStream rng(7);
        std::vector<CMatrix> s_q(cfg.ofdm.n_sub, CMatrix(cfg.arrays.bs.size(), cfg.ofdm.n_sym));
        double acc = 0.0, mx = 0.0;
        const int trials = 2000;
        for (int i = 0; i < trials; ++i) {
            auto frame = phy::received_frame({}, s_q, ctx.w_ue, ctx.sigma_z, rng);
            const auto peak = detector::matched_filter_peak(frame.r, *ctx.bank);
            const double resi = detector::compute_resi(
                frame.r, ctx.bank->filter(peak.delay_index, peak.doppler_index), ctx.sigma_z);
            acc += resi;
            mx = std::max(mx, resi);
        }
        std::printf("noise-only RESI mean=%.3f max=%.3f over %d scans\n", acc / trials, mx,
                    trials);
        return 0;
    }

    // mode == run: full protocol run summary
    metrics::ProtocolKind proto = metrics::ProtocolKind::ssf;
    if (mode == "earq") proto = metrics::ProtocolKind::earq;
    if (mode == "openloop") proto = metrics::ProtocolKind::openloop;
    const auto th = RunThresholds::from_config(cfg.thresholds);
    const auto run = run_scenario(cfg, ctx, proto, th, budget, 1);
    const auto m = metrics::compute_all(run.trace);
    std::printf("protocol=%s budget=%.1f p_det=%.3f latency=%s realloc=%.3f locks=%d "
                "consumed=%.2f dBm\n",
                metrics::protocol_name(proto), budget, m.p_det,
                m.latency.mean_scans ? std::to_string(*m.latency.mean_scans).c_str() : "n/a",
                m.realloc_ratio, m.lock_cycles, m.consumed_dbm);
    int shown = 0;
    for (const auto& r : run.trace.records) {
        if (r.scan % 25 != 0 && !(r.tg_in_region && shown < 0)) continue;
        std::printf("  k=%4d beam=%2d resi=%7.2f p=%6.1f %s inR=%d inB=%d\n", r.scan, r.beam,
                    r.resi, r.p_used_dbm, metrics::hypo_name(r.hypothesis), r.tg_in_region,
                    r.tg_in_beam);
        ++shown;
    }
    return 0;
}
