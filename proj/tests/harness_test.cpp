#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "isac/experiments.hpp"
#include "isac/io.hpp"
#include "isac/runner.hpp"

using namespace isac;
using namespace isac::harness;

namespace {

const SimConfig& default_cfg() {
    static SimConfig cfg;
    return cfg;
}

const RunContext& default_ctx() {
    static RunContext ctx = build_context(default_cfg());
    return ctx;
}

} // namespace

TEST_CASE("reference numerology yields exactly 1000 scan records") {
    const auto& cfg = default_cfg();
    REQUIRE(cfg.scan_count() == 1000);
    const auto run = run_scenario(cfg, default_ctx(), metrics::ProtocolKind::openloop,
                                  RunThresholds::from_config(cfg.thresholds),
                                  cfg.sim.budget_dbm, 1);
    REQUIRE(run.trace.records.size() == 1000);
    for (const auto& r : run.trace.records)
        REQUIRE(r.time_s == r.scan * cfg.ofdm.scan_duration());
}

TEST_CASE("identical seeds give bit-identical traces and CSV bytes") {
    const auto& cfg = default_cfg();
    const auto th = RunThresholds::from_config(cfg.thresholds);
    const auto a = run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -7.0, 42);
    const auto b = run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -7.0, 42);
    REQUIRE(a.trace.records.size() == b.trace.records.size());
    for (std::size_t i = 0; i < a.trace.records.size(); ++i) {
        REQUIRE(a.trace.records[i].resi == b.trace.records[i].resi);
        REQUIRE(a.trace.records[i].beam == b.trace.records[i].beam);
        REQUIRE(a.trace.records[i].p_used_dbm == b.trace.records[i].p_used_dbm);
    }
    REQUIRE(trace_csv(a.trace) == trace_csv(b.trace));

    const auto c = run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -7.0, 43);
    REQUIRE(trace_csv(a.trace) != trace_csv(c.trace));
}

TEST_CASE("factored echo assembly matches the antenna-domain Eq-7 chain") {
    const auto& cfg = default_cfg();
    const auto& ctx = default_ctx();
    const double lambda0 = cfg.ofdm.lambda0();
    const channel::ArrayFrame bs_frame{cfg.scene.bs_pos, cfg.scene.bs_boresight_az};
    const channel::ArrayFrame ue_frame{cfg.scene.ue_pos, ctx.ue_boresight_az};
    const scene::Vec3 tg{0.8, 4.4, 1.0};

    std::vector<cvec> steer = ctx.comm_steerings;
    steer.push_back(ctx.beam_steerings[7]);
    std::vector<double> gamma{0.4, 0.4, 0.82};
    const auto f = phy::build_beamforming(steer, gamma);
    const double p_q = 2.5e-5;

    CMatrix x(3, cfg.ofdm.n_sym);
    RandomStream sym_rng(5);
    for (auto& v : x.data) v = sym_rng.qpsk();

    phy::TargetEcho full;
    phy::TargetEchoFactored fact;
    full.psi_los = fact.psi_los = phy::doppler_vector(130.0, cfg.ofdm.n_sym, cfg.ofdm.t_sym);
    full.psi_nlos = fact.psi_nlos = phy::doppler_vector(-50.0, cfg.ofdm.n_sym, cfg.ofdm.t_sym);
    std::vector<CMatrix> s_q;
    fact.b_q.resize(cfg.ofdm.n_sub);
    fact.c_los_q.resize(cfg.ofdm.n_sub);
    fact.c_nlos_q.resize(cfg.ofdm.n_sub);
    for (int q = 1; q <= cfg.ofdm.n_sub; ++q) {
        phy::EchoChannel ch;
        ch.h_bs = channel::bs_target_channel(q, cfg.arrays.bs, bs_frame, tg, lambda0,
                                             cfg.ofdm.w_sub)
                      .coeffs;
        const auto ue = channel::target_ue_channel(q, cfg.arrays.ue, ue_frame, tg, 1.0,
                                                   cfg.scene.scatterer, false, lambda0,
                                                   cfg.ofdm.w_sub);
        ch.h_ue_los = ue.los.coeffs;
        ch.h_ue_nlos = ue.nlos.coeffs;
        full.per_q.push_back(ch);
        s_q.push_back(phy::transmit_frame(p_q, f.f, x));

        cvec& b = fact.b_q[q - 1];
        b.assign(f.f.cols, cd{0, 0});
        for (std::size_t e = 0; e < f.f.rows; ++e)
            for (std::size_t l = 0; l < f.f.cols; ++l) b[l] += std::conj(ch.h_bs[e]) * f.f(e, l);
        cd c_los{0, 0}, c_nlos{0, 0};
        for (std::size_t e = 0; e < ctx.w_ue.size(); ++e) {
            c_los += std::conj(ctx.w_ue[e]) * ch.h_ue_los[e];
            c_nlos += std::conj(ctx.w_ue[e]) * ch.h_ue_nlos[e];
        }
        fact.c_los_q[q - 1] = c_los;
        fact.c_nlos_q[q - 1] = c_nlos;
    }

    RandomStream r1(9), r2(9);
    const auto frame_full = phy::received_frame({full}, s_q, ctx.w_ue, 0.0, r1);
    const auto frame_fact =
        phy::received_frame_factored({fact}, p_q, x, cfg.ofdm.n_sub, 0.0, r2);
    REQUIRE(frame_full.r.size() == frame_fact.r.size());
    for (std::size_t i = 0; i < frame_full.r.size(); ++i)
        REQUIRE(std::abs(frame_full.r[i] - frame_fact.r[i]) <=
                1e-10 * std::abs(frame_full.r[i]) + 1e-22);
}

TEST_CASE("a target pinned inside one beam is detected and held") {
    SimConfig cfg;
    // static target at the center of beam 9, sensing UE close behind it
    const double az = cfg.scene.region.az_lo + 9.5 * (kPi / 2.0) / 20.0;
    const double r = 4.5;
    const double ce = std::cos(cfg.scene.region.elevation);
    const scene::Vec3 tg{r * ce * std::cos(az), r * ce * std::sin(az),
                         cfg.scene.bs_pos.z + r * std::sin(cfg.scene.region.elevation)};
    cfg.scene.target.trajectory.kind = scene::TrajectoryKind::linear;
    cfg.scene.target.trajectory.start = tg;
    cfg.scene.target.trajectory.speed = 0.0;
    cfg.scene.region.range_lo = 4.0;
    cfg.scene.region.range_hi = 5.0;
    cfg.scene.ue_pos = {0.25, 6.0, 1.2};
    cfg.scene.blocker.reset();
    cfg.thresholds.eta0 = 2.2;
    cfg.thresholds.eta1 = 2.5;
    cfg.thresholds.eta2 = 2.8; // generous
    cfg.validate();
    const RunContext ctx = build_context(cfg);
    const auto run = run_scenario(cfg, ctx, metrics::ProtocolKind::ssf,
                                  RunThresholds::from_config(cfg.thresholds), -3.0, 7);
    const double p = metrics::detection_probability(run.trace);
    INFO("pinned-target p_det = " << p);
    REQUIRE(p > 0.9);
}

TEST_CASE("evaluate_pdet is deterministic and averages per-seed ratios") {
    const auto& cfg = default_cfg();
    const auto th = RunThresholds::from_config(cfg.thresholds);
    const std::vector<std::uint64_t> seeds{1, 2};
    const double a = evaluate_pdet(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -8.0,
                                   seeds);
    const double b = evaluate_pdet(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -8.0,
                                   seeds);
    REQUIRE(a == b);
    double manual = 0.0;
    for (auto s : seeds) {
        const auto run =
            run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -8.0, s);
        manual += metrics::detection_probability(run.trace) / seeds.size();
    }
    REQUIRE(a == Catch::Approx(manual).margin(1e-15));
}

TEST_CASE("evaluate_pdet raises when the target never enters the region") {
    SimConfig cfg;
    cfg.scene.target.trajectory.start = {40.0, 40.0, 1.0}; // far outside
    cfg.scene.target.trajectory.kind = scene::TrajectoryKind::linear;
    cfg.validate();
    const RunContext ctx = build_context(cfg);
    CHECK_THROWS_AS(evaluate_pdet(cfg, ctx, metrics::ProtocolKind::ssf,
                                  RunThresholds::from_config(cfg.thresholds), -3.0, {1}),
                    metrics::MetricError);
}

TEST_CASE("sweep produces one aggregated row per protocol-budget cell") {
    const auto& cfg = default_cfg();
    const std::vector<metrics::ProtocolKind> protocols{
        metrics::ProtocolKind::ssf, metrics::ProtocolKind::earq,
        metrics::ProtocolKind::openloop};
    const std::vector<double> budgets{-12.0, -5.0};
    const std::vector<std::uint64_t> seeds{1, 2};
    const auto result = sweep_power(cfg, default_ctx(), protocols, budgets, seeds, 2);
    REQUIRE(result.rows.size() == protocols.size() * budgets.size());
    REQUIRE(result.cells.size() == result.rows.size());

    // aggregates equal offline recomputation from fresh runs
    const auto th = RunThresholds::from_config(cfg.thresholds);
    for (const auto& row : result.rows) {
        if (row.protocol != "ssf") continue;
        double pdet = 0.0;
        for (auto s : seeds) {
            const auto run = run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th,
                                          row.p_budget_dbm, s);
            pdet += metrics::detection_probability(run.trace) / seeds.size();
        }
        REQUIRE(row.p_det == Catch::Approx(pdet).margin(1e-15));
        REQUIRE(row.seed_count == 2);
    }
}

TEST_CASE("metrics recomputed from the serialized trace match the live values") {
    const auto& cfg = default_cfg();
    const auto th = RunThresholds::from_config(cfg.thresholds);
    const auto run =
        run_scenario(cfg, default_ctx(), metrics::ProtocolKind::ssf, th, -6.0, 11);
    const std::string csv = trace_csv(run.trace);
    std::istringstream in(csv);
    const auto parsed = parse_trace_csv(in, run.trace.meta);
    REQUIRE(parsed.records.size() == run.trace.records.size());
    CHECK(metrics::detection_probability(parsed) ==
          metrics::detection_probability(run.trace));
    CHECK(metrics::power_reallocation_ratio(parsed) ==
          Catch::Approx(metrics::power_reallocation_ratio(run.trace)).epsilon(1e-9));
    const auto la = metrics::average_sensing_latency(parsed);
    const auto lb = metrics::average_sensing_latency(run.trace);
    CHECK(la.completed == lb.completed);
    CHECK(la.censored == lb.censored);
}

TEST_CASE("calibration labels match the geometry") {
    const auto& cfg = default_cfg();
    const auto th = RunThresholds::from_config(cfg.thresholds);
    const auto run =
        run_scenario(cfg, default_ctx(), metrics::ProtocolKind::openloop, th, -5.0, 3);
    const auto labels = label_calibration(run, default_ctx().grid.n_beam());
    REQUIRE(labels.size() == run.trace.records.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        const int cell = run.tg_cell[i];
        const int beam = run.trace.records[i].beam;
        if (cell < 0) {
            REQUIRE(labels[i].label == 0);
        } else {
            const int d = std::abs(cell - beam);
            const int ring = std::min(d, 20 - d);
            REQUIRE(labels[i].label == (ring == 0 ? 3 : ring == 1 ? 2 : 1));
        }
        REQUIRE(labels[i].resi == run.trace.records[i].resi);
    }
    // every class is populated over a full open-loop scenario
    const auto fit = optimizer::fit_hypothesis_distributions(labels);
    for (int c = 0; c < 4; ++c) REQUIRE(fit.cls[c].count > 0);
}

TEST_CASE("threshold comparison emits paired rows with IPT at least at MAP level") {
    SimConfig cfg;
    cfg.opt.compare_seeds = {1, 2};
    cfg.opt.compare_max_iterations = 2;
    const RunContext ctx = build_context(cfg);
    const auto result = compare_thresholding(
        cfg, ctx, {metrics::ProtocolKind::ssf, metrics::ProtocolKind::earq}, {-9.0}, 2);
    REQUIRE(result.rows.size() == 4);
    for (const auto& cell : result.cells) {
        INFO(metrics::protocol_name(cell.protocol));
        CHECK(cell.ipt_row.p_det >= cell.map_row.p_det - 1e-12);
        CHECK(cell.map_row.threshold_method == "map");
        CHECK(cell.ipt_row.threshold_method == "ipt");
        REQUIRE(optimizer::strictly_descending(cell.t_ipt));
    }
}

TEST_CASE("config errors name the offending field") {
    {
        std::istringstream in("[sim]\nbudget_dbm = 5.0\n");
        auto cfg = parse_config(in);
        try {
            cfg.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field == "sim.budget_dbm");
        }
    }
    {
        std::istringstream in("[scene]\nnot_a_key = 1\n");
        try {
            parse_config(in);
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field == "scene.not_a_key");
        }
    }
    {
        std::istringstream in("[sim]\nt_s = 10.005\n");
        auto cfg = parse_config(in);
        try {
            cfg.validate();
            FAIL("expected ConfigError");
        } catch (const ConfigError& e) {
            CHECK(e.field == "sim.t_s");
        }
    }
    CHECK_THROWS_AS(load_config("/nonexistent/path.ini"), ConfigError);
}

TEST_CASE("optimization trace CSV carries the pinned schema") {
    optimizer::OptimizationTrace trace;
    optimizer::IterationRecord rec;
    rec.iteration = 1;
    rec.t = {5.0, 4.0, 3.0};
    rec.f = -0.5;
    rec.phi = -0.51;
    rec.alpha = 0.25;
    rec.mu = 0.1;
    trace.iterations.push_back(rec);
    const std::string csv = optimization_csv(trace);
    CHECK(csv.find("iteration,T1,T2,T3,f,phi,alpha,mu") == 0);
    CHECK(csv.find("1,5,4,3,-0.5,-0.51,0.25,0.1") != std::string::npos);
}
