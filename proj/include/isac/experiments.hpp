#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include "isac/io.hpp"
#include "isac/parallel.hpp"
#include "isac/runner.hpp"

// Experiment sweeps: the power sweep over the three protocols and the
// MAP-vs-IPT thresholding comparison. Cells run as independent jobs on a
// bounded pool; aggregation is order-independent.

namespace isac::harness {

struct CellKey {
    metrics::ProtocolKind protocol;
    std::string method; // "fixed", "map", "ipt"
    double budget_dbm = 0.0;
};

struct CellResult {
    CellKey key;
    bool failed = false;
    std::string error;
    std::vector<metrics::ScenarioMetrics> per_seed;
    MetricsRow aggregate(int seed_count) const;
};

inline MetricsRow CellResult::aggregate(int seed_count) const {
    MetricsRow row;
    row.protocol = metrics::protocol_name(key.protocol);
    row.threshold_method = key.method;
    row.p_budget_dbm = key.budget_dbm;
    row.seed_count = seed_count;
    if (per_seed.empty()) return row;
    double consumed_lin = 0.0, lat = 0.0, lat_s = 0.0;
    int lat_n = 0;
    row.p_det_min = 1.0;
    row.p_det_max = 0.0;
    for (const auto& m : per_seed) {
        row.p_det += m.p_det;
        row.p_det_min = std::min(row.p_det_min, m.p_det);
        row.p_det_max = std::max(row.p_det_max, m.p_det);
        row.realloc_ratio += m.realloc_ratio;
        consumed_lin += dbm_to_watts(m.consumed_dbm);
        if (m.latency.mean_scans) {
            lat += *m.latency.mean_scans;
            lat_s += *m.latency.mean_seconds;
            ++lat_n;
        }
    }
    const double n = static_cast<double>(per_seed.size());
    row.p_det /= n;
    row.realloc_ratio /= n;
    row.p_consumed_dbm = watts_to_dbm(consumed_lin / n);
    row.latency_scans = lat_n > 0 ? lat / lat_n : std::nan("");
    row.latency_s = lat_n > 0 ? lat_s / lat_n : std::nan("");
    return row;
}

struct ExperimentResult {
    std::vector<CellResult> cells;
    std::vector<MetricsRow> rows; // aggregated, grid order
};

// Fig-2 style experiment: full cross-product of protocols x budgets x seeds
// with fixed thresholds from the config. A failing run marks its cell failed
// without aborting the sweep.
inline ExperimentResult sweep_power(const SimConfig& cfg, const RunContext& ctx,
                                    const std::vector<metrics::ProtocolKind>& protocols,
                                    const std::vector<double>& budgets,
                                    const std::vector<std::uint64_t>& seeds,
                                    int threads = default_thread_count()) {
    if (budgets.empty()) throw std::invalid_argument("sweep_power: empty budget grid");
    const RunThresholds th = RunThresholds::from_config(cfg.thresholds);

    struct Job {
        std::size_t cell;
        std::uint64_t seed;
    };
    ExperimentResult result;
    std::vector<Job> jobs;
    for (const auto p : protocols)
        for (double b : budgets) {
            CellResult cell;
            cell.key = {p, "fixed", b};
            cell.per_seed.resize(seeds.size());
            result.cells.push_back(std::move(cell));
        }
    for (std::size_t c = 0; c < result.cells.size(); ++c)
        for (std::uint64_t s : seeds) jobs.push_back({c, s});

    std::vector<std::string> errors(jobs.size());
    std::vector<metrics::ScenarioMetrics> outputs(jobs.size());
    parallel_for(
        jobs.size(),
        [&](std::size_t j) {
            const auto& job = jobs[j];
            const auto& key = result.cells[job.cell].key;
            try {
                const RunOutput run =
                    run_scenario(cfg, ctx, key.protocol, th, key.budget_dbm, job.seed);
                outputs[j] = metrics::compute_all(run.trace);
            } catch (const std::exception& e) {
                errors[j] = e.what();
            }
        },
        threads);

    std::size_t j = 0;
    for (auto& cell : result.cells) {
        for (std::size_t si = 0; si < seeds.size(); ++si, ++j) {
            if (!errors[j].empty()) {
                cell.failed = true;
                cell.error = errors[j];
            } else {
                cell.per_seed[si] = outputs[j];
            }
        }
        if (!cell.failed) result.rows.push_back(cell.aggregate(static_cast<int>(seeds.size())));
    }
    return result;
}

// Open-loop calibration -> per-hypothesis fits, pooled over the seed set.
inline optimizer::HypothesisFit calibrate(const SimConfig& cfg, const RunContext& ctx,
                                          const RunThresholds& th, double budget_dbm,
                                          const std::vector<std::uint64_t>& seeds) {
    std::vector<optimizer::LabeledSample> samples;
    for (std::uint64_t s : seeds) {
        const RunOutput run =
            run_scenario(cfg, ctx, metrics::ProtocolKind::openloop, th, budget_dbm, s);
        const auto labeled = label_calibration(run, ctx.grid.n_beam());
        samples.insert(samples.end(), labeled.begin(), labeled.end());
    }
    return optimizer::fit_hypothesis_distributions(samples);
}

struct ThresholdChoice {
    RunThresholds thresholds;
    optimizer::ThresholdVec descending; // optimizer-space vector
};

inline ThresholdChoice ssf_choice(const RunThresholds& base,
                                  const feedback::ThresholdVector& t) {
    ThresholdChoice c{base, optimizer::descending_from(t)};
    c.thresholds.ssf = t;
    return c;
}

inline ThresholdChoice earq_choice(const RunThresholds& base,
                                   const feedback::EArqThresholds& t) {
    ThresholdChoice c{base, {t.eta1, t.eta0}};
    c.thresholds.earq = t;
    return c;
}

// MAP thresholds for both protocols from one calibration fit. e-ARQ's pair
// reuses the outer boundaries: Lost/NACK at the H0|H1 crossing, ACK at the
// H2|H3 crossing.
struct MapChoices {
    feedback::ThresholdVector ssf;
    feedback::EArqThresholds earq;
};

inline MapChoices map_choices(const optimizer::HypothesisFit& fit) {
    const auto map = optimizer::map_thresholds(fit);
    return {map.thresholds,
            feedback::EArqThresholds{map.thresholds.eta0, map.thresholds.eta2}};
}

struct CompareCell {
    metrics::ProtocolKind protocol;
    double budget_dbm;
    MetricsRow map_row;
    MetricsRow ipt_row;
    optimizer::ThresholdVec t_map;
    optimizer::ThresholdVec t_ipt;
    optimizer::OptimizationTrace opt_trace;
};

struct CompareResult {
    std::vector<CompareCell> cells;
    std::vector<MetricsRow> rows;
};

namespace detail {

inline MetricsRow evaluate_choice(const SimConfig& cfg, const RunContext& ctx,
                                  metrics::ProtocolKind protocol, const ThresholdChoice& choice,
                                  double budget, const std::vector<std::uint64_t>& seeds,
                                  const std::string& method) {
    CellResult cell;
    cell.key = {protocol, method, budget};
    for (std::uint64_t s : seeds) {
        const RunOutput run = run_scenario(cfg, ctx, protocol, choice.thresholds, budget, s);
        cell.per_seed.push_back(metrics::compute_all(run.trace));
    }
    return cell.aggregate(static_cast<int>(seeds.size()));
}

} // namespace detail

// Fig-3 style experiment: per protocol and budget, fit MAP thresholds from
// an open-loop calibration, evaluate, then run the interior-point
// optimization from that start with common random numbers and evaluate the
// returned thresholds. The IPT row can never fall below the MAP row because
// the optimizer returns the best seen iterate under the same seed set.
inline CompareResult compare_thresholding(const SimConfig& cfg, const RunContext& ctx,
                                          const std::vector<metrics::ProtocolKind>& protocols,
                                          const std::vector<double>& budgets,
                                          int threads = default_thread_count()) {
    const RunThresholds base = RunThresholds::from_config(cfg.thresholds);
    const std::vector<std::uint64_t>& seeds = cfg.opt.compare_seeds;

    CompareResult result;
    result.cells.resize(protocols.size() * budgets.size());
    parallel_for(
        result.cells.size(),
        [&](std::size_t idx) {
            const metrics::ProtocolKind protocol = protocols[idx / budgets.size()];
            const double budget = budgets[idx % budgets.size()];
            CompareCell cell;
            cell.protocol = protocol;
            cell.budget_dbm = budget;

            const auto fit = calibrate(cfg, ctx, base, budget, seeds);
            const MapChoices maps = map_choices(fit);

            optimizer::OptimizerConfig ocfg = cfg.opt.core;
            ocfg.seeds = seeds;
            ocfg.max_iterations = cfg.opt.compare_max_iterations;
            ocfg.fd_h = cfg.opt.compare_fd_h;
            ocfg.mu0 = cfg.opt.compare_mu0;

            const ThresholdChoice map_choice = protocol == metrics::ProtocolKind::ssf
                                                   ? ssf_choice(base, maps.ssf)
                                                   : earq_choice(base, maps.earq);
            cell.t_map = map_choice.descending;
            ocfg.t_min = cfg.opt.bound_lo_factor * cell.t_map.back();
            ocfg.t_max = cfg.opt.bound_hi_factor * cell.t_map.front();

            auto pdet_fn = [&](const optimizer::ThresholdVec& t) {
                ThresholdChoice c = protocol == metrics::ProtocolKind::ssf
                                        ? ssf_choice(base, optimizer::ascending_from(t))
                                        : earq_choice(base, feedback::EArqThresholds{t[1], t[0]});
                return evaluate_pdet(cfg, ctx, protocol, c.thresholds, budget, seeds);
            };
            const auto opt = optimizer::optimize_thresholds(ocfg, cell.t_map, pdet_fn);
            cell.t_ipt = opt.t_best;
            cell.opt_trace = opt.trace;

            cell.map_row =
                detail::evaluate_choice(cfg, ctx, protocol, map_choice, budget, seeds, "map");
            const ThresholdChoice ipt_choice =
                protocol == metrics::ProtocolKind::ssf
                    ? ssf_choice(base, optimizer::ascending_from(cell.t_ipt))
                    : earq_choice(base,
                                  feedback::EArqThresholds{cell.t_ipt[1], cell.t_ipt[0]});
            cell.ipt_row =
                detail::evaluate_choice(cfg, ctx, protocol, ipt_choice, budget, seeds, "ipt");
            result.cells[idx] = std::move(cell);
        },
        threads);

    for (const auto& cell : result.cells) {
        result.rows.push_back(cell.map_row);
        result.rows.push_back(cell.ipt_row);
    }
    return result;
}

// Budget-indexed series extraction for the SVG plots.
inline SvgSeries metric_series(const std::vector<MetricsRow>& rows, const std::string& protocol,
                               const std::string& method, double MetricsRow::*field,
                               bool x_is_consumed = true) {
    SvgSeries s;
    s.label = protocol + (method == "fixed" ? "" : (" (" + method + ")"));
    std::vector<std::pair<double, double>> pts;
    for (const auto& r : rows)
        if (r.protocol == protocol && r.threshold_method == method)
            pts.emplace_back(x_is_consumed ? r.p_consumed_dbm : r.p_budget_dbm, r.*field);
    std::sort(pts.begin(), pts.end());
    for (auto& [x, y] : pts) {
        s.x.push_back(x);
        s.y.push_back(y);
    }
    return s;
}

} // namespace isac::harness
