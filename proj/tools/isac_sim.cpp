// Command-line harness: single runs, the power sweep, threshold
// optimization, and the MAP-vs-IPT comparison, with CSV (and optional SVG)
// outputs.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "isac/experiments.hpp"
#include "isac/io.hpp"
#include "isac/runner.hpp"

using namespace isac;
using namespace isac::harness;

namespace {

metrics::ProtocolKind parse_protocol(const std::string& s) {
    if (s == "ssf") return metrics::ProtocolKind::ssf;
    if (s == "earq") return metrics::ProtocolKind::earq;
    if (s == "openloop") return metrics::ProtocolKind::openloop;
    throw ConfigError("protocol", "unknown protocol '" + s + "'");
}

SimConfig load_or_default(const std::string& path) {
    if (path.empty()) return SimConfig{};
    return load_config(path);
}

void apply_seed_override(SimConfig& cfg, const std::vector<std::uint64_t>& seeds) {
    if (!seeds.empty()) cfg.sim.seeds = seeds;
}

std::string join(const std::filesystem::path& dir, const std::string& name) {
    return (dir / name).string();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Closed-loop bistatic ISAC link-level simulator"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::string out_dir = ".";
    std::string protocol_name = "ssf";
    std::string format = "csv";
    std::vector<std::uint64_t> seeds;
    app.add_option("--config", config_path, "configuration file (key = value sections)");
    app.add_option("--seed", seeds, "seed list override")->delimiter(',');
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--protocol", protocol_name, "ssf|earq|openloop")
        ->check(CLI::IsMember({"ssf", "earq", "openloop"}));
    app.add_option("--format", format, "csv|csv+svg")->check(CLI::IsMember({"csv", "csv+svg"}));

    auto* cmd_run = app.add_subcommand("run", "single scenario, trace CSV per seed");
    auto* cmd_sweep = app.add_subcommand("sweep", "power sweep over all protocols");
    auto* cmd_opt = app.add_subcommand("optimize", "interior-point threshold optimization");
    auto* cmd_cmp = app.add_subcommand("compare-thresholds", "MAP vs IPT comparison");
    auto* cmd_val = app.add_subcommand("validate-config", "parse and validate the config");

    double budget = std::nan("");
    cmd_run->add_option("--budget", budget, "sensing power budget in dBm");
    cmd_opt->add_option("--budget", budget, "sensing power budget in dBm");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e); // prints usage; nonzero on error
    }

    try {
        SimConfig cfg = load_or_default(config_path);
        apply_seed_override(cfg, seeds);
        cfg.validate();
        const std::filesystem::path out(out_dir);
        std::filesystem::create_directories(out);
        const bool svg = format == "csv+svg";

        if (cmd_val->parsed()) {
            std::printf("config ok (fingerprint %s)\n", cfg.fingerprint().c_str());
            return 0;
        }

        const RunContext ctx = build_context(cfg);
        const auto th = RunThresholds::from_config(cfg.thresholds);
        const double b = std::isnan(budget) ? cfg.sim.budget_dbm : budget;

        if (cmd_run->parsed()) {
            const auto protocol = parse_protocol(protocol_name);
            for (std::uint64_t seed : cfg.sim.seeds) {
                const RunOutput run = run_scenario(cfg, ctx, protocol, th, b, seed);
                const std::string name = std::string("trace_") + protocol_name + "_seed" +
                                         std::to_string(seed) + ".csv";
                write_file(join(out, name), trace_csv(run.trace));
                const auto m = metrics::compute_all(run.trace);
                std::printf("seed %llu: p_det=%.4f latency=%s realloc=%.4f -> %s\n",
                            static_cast<unsigned long long>(seed), m.p_det,
                            m.latency.mean_scans
                                ? (std::to_string(*m.latency.mean_scans) + " scans").c_str()
                                : "n/a",
                            m.realloc_ratio, name.c_str());
            }
            return 0;
        }

        if (cmd_sweep->parsed()) {
            const std::vector<metrics::ProtocolKind> protocols = {
                metrics::ProtocolKind::ssf, metrics::ProtocolKind::earq,
                metrics::ProtocolKind::openloop};
            const auto budgets = cfg.sweep_budgets();
            const auto result = sweep_power(cfg, ctx, protocols, budgets, cfg.sim.seeds);
            write_file(join(out, "sweep_metrics.csv"), metrics_csv(result.rows));
            std::printf("sweep: %zu cells -> %s\n", result.rows.size(),
                        join(out, "sweep_metrics.csv").c_str());
            for (const auto& cell : result.cells)
                if (cell.failed)
                    std::fprintf(stderr, "cell %s @ %.2f dBm failed: %s\n",
                                 metrics::protocol_name(cell.key.protocol),
                                 cell.key.budget_dbm, cell.error.c_str());
            if (svg) {
                auto series = [&](double MetricsRow::*field) {
                    return std::vector<SvgSeries>{
                        metric_series(result.rows, "ssf", "fixed", field),
                        metric_series(result.rows, "earq", "fixed", field),
                        metric_series(result.rows, "openloop", "fixed", field)};
                };
                write_file(join(out, "pdet.svg"),
                           svg_line_chart("Detection probability",
                                          "avg sensing power consumed (dBm)", "P_det",
                                          series(&MetricsRow::p_det)));
                write_file(join(out, "latency.svg"),
                           svg_line_chart("Sensing latency", "avg sensing power consumed (dBm)",
                                          "scans", series(&MetricsRow::latency_scans)));
                write_file(join(out, "realloc.svg"),
                           svg_line_chart("Power reallocated to communications",
                                          "avg sensing power consumed (dBm)", "ratio",
                                          series(&MetricsRow::realloc_ratio)));
            }
            return 0;
        }

        if (cmd_opt->parsed()) {
            const auto protocol = parse_protocol(protocol_name);
            if (protocol == metrics::ProtocolKind::openloop)
                throw ConfigError("protocol", "open-loop has no thresholds to optimize");
            const auto fit = calibrate(cfg, ctx, th, b, cfg.opt.core.seeds);
            const MapChoices maps = map_choices(fit);
            optimizer::OptimizerConfig ocfg = cfg.opt.core;
            const ThresholdChoice start = protocol == metrics::ProtocolKind::ssf
                                              ? ssf_choice(th, maps.ssf)
                                              : earq_choice(th, maps.earq);
            ocfg.t_min = cfg.opt.bound_lo_factor * start.descending.back();
            ocfg.t_max = cfg.opt.bound_hi_factor * start.descending.front();
            auto pdet_fn = [&](const optimizer::ThresholdVec& t) {
                ThresholdChoice c =
                    protocol == metrics::ProtocolKind::ssf
                        ? ssf_choice(th, optimizer::ascending_from(t))
                        : earq_choice(th, feedback::EArqThresholds{t[1], t[0]});
                return evaluate_pdet(cfg, ctx, protocol, c.thresholds, b, ocfg.seeds,
                                     default_thread_count());
            };
            const auto res = optimizer::optimize_thresholds(ocfg, start.descending, pdet_fn);
            write_file(join(out, "optimization_trace.csv"), optimization_csv(res.trace));
            std::printf("MAP start:");
            for (double v : start.descending) std::printf(" %.4f", v);
            std::printf("\noptimized:");
            for (double v : res.t_best) std::printf(" %.4f", v);
            std::printf("\nP_det %.4f -> %.4f (%d evaluations) -> %s\n",
                        -(-pdet_fn(start.descending)), -res.f_best,
                        res.trace.total_evaluations,
                        join(out, "optimization_trace.csv").c_str());
            return 0;
        }

        if (cmd_cmp->parsed()) {
            const std::vector<metrics::ProtocolKind> protocols = {
                metrics::ProtocolKind::ssf, metrics::ProtocolKind::earq};
            const auto budgets = cfg.sweep_budgets();
            const auto result = compare_thresholding(cfg, ctx, protocols, budgets);
            write_file(join(out, "thresholding_metrics.csv"), metrics_csv(result.rows));
            std::printf("compare-thresholds: %zu rows -> %s\n", result.rows.size(),
                        join(out, "thresholding_metrics.csv").c_str());
            if (svg) {
                std::vector<SvgSeries> series{
                    metric_series(result.rows, "ssf", "map", &MetricsRow::p_det),
                    metric_series(result.rows, "ssf", "ipt", &MetricsRow::p_det),
                    metric_series(result.rows, "earq", "map", &MetricsRow::p_det),
                    metric_series(result.rows, "earq", "ipt", &MetricsRow::p_det)};
                write_file(join(out, "thresholding.svg"),
                           svg_line_chart("MAP vs IPT thresholding",
                                          "avg sensing power consumed (dBm)", "P_det", series));
            }
            return 0;
        }
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
