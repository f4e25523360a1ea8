#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "isac/channel.hpp"
#include "isac/core.hpp"
#include "isac/feedback.hpp"
#include "isac/metrics.hpp"
#include "isac/optimizer.hpp"
#include "isac/phy.hpp"
#include "isac/scene.hpp"

// Simulation configuration: a sectioned key=value file mirroring the module
// layout, parsed into SimConfig with per-field validation errors.

namespace isac::harness {

inline constexpr const char* kCodeVersion = "isac-ssf-0.1.0";

struct ConfigError : std::runtime_error {
    std::string field;
    ConfigError(std::string f, const std::string& msg)
        : std::runtime_error("config field '" + f + "': " + msg), field(std::move(f)) {}
};

// Default scene: a small-cell geometry sized so the Table-1 power range
// spans undetectable-to-solid echoes. The target crosses the sweep sector on
// a gentle quadratic arc that keeps its bearing from the sensing UE nearly
// constant (the UE's combiner is fixed), enters and leaves the region within
// the scenario, and passes behind a thin occluder for a short NLOS interval.
struct SceneConfig {
    scene::Vec3 bs_pos{0.0, 0.0, 1.8};
    double bs_boresight_az = kPi / 2.0;
    scene::Vec3 ue_pos{1.84, 8.0, 1.2};
    scene::SensingRegion region{kPi / 4.0, 3.0 * kPi / 4.0, 4.0, 7.0, -0.14, 20};
    scene::TargetSpec target{
        {scene::TrajectoryKind::quadratic, {1.08, 1.35, 1.0}, 1.85, 3.0, -0.022, 0.0, 0.0, 10.0},
        1.0};
    scene::ScattererSpec scatterer{{1.15, 7.79, 2.5}, 1.0e5};
    std::optional<scene::BlockerBox> blocker =
        scene::BlockerBox{{1.13, 7.66, 0.0}, {1.17, 7.92, 3.0}};
    double nu_d = 180.0; // Hz, LOS/NLOS offset; separates the two returns by
    // nearly two Doppler resolution cells so the detector resolves them
    double v_max = 1.5; // m/s single-leg radial-rate bound for the Doppler grid
    // Azimuth half-width of the "target in beam" detection event, as a
    // multiple of the cell half-width. 1.5 matches the half-power width of
    // the 16-column transmit array, whose lobes overlap adjacent cells.
    double beam_acceptance = 2.0;
};

struct ArraysConfig {
    channel::ArrayGeometry bs{2, 16, 0.5}; // 32 elements, 16 across azimuth
    channel::ArrayGeometry ue{8, 2, 0.5}; // 16 elements, wide azimuth acceptance
};

struct PowerConfig {
    double min_dbm = -20.0;
    double max_dbm = -3.0;
    double step_down_db = 0.25;
    double step_up_db = 2.0;
    double comm_power_dbm = -3.0; // fixed communications-side power
    int n_comm = 2;               // L communicating UEs
    std::vector<double> comm_azimuths{-0.5, -2.5}; // global, away from the sweep
    double comm_elevation = -0.1;
};

struct NoiseConfig {
    double figure_db = 6.0;
    double temperature_k = 290.0;
};

struct DetectorConfig {
    int n_del = 10;
    int n_dop = 10;
};

struct ProtocolConfig {
    metrics::ProtocolKind kind = metrics::ProtocolKind::ssf;
    feedback::SsfOptions ssf{};
    int neighbor_ttl_scans = 40; // freshness window for H2 neighbor RESI
};

struct ThresholdConfig {
    double eta0 = 3.3, eta1 = 3.35, eta2 = 3.4; // SSF
    double earq_eta0 = 2.6, earq_eta1 = 6.0;
    double openloop_detection = 6.0; // metric gate for the open-loop baseline

    feedback::ThresholdVector ssf_vector() const { return {eta0, eta1, eta2}; }
    feedback::EArqThresholds earq_vector() const { return {earq_eta0, earq_eta1}; }
};

struct SimSection {
    double t_s = 10.0;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
    double budget_dbm = -3.0; // single-run budget
};

struct SweepSection {
    std::vector<double> budgets; // empty -> uniform grid over the power range
    int grid_points = 8;
};

struct OptimizerSection {
    optimizer::OptimizerConfig core{};
    double bound_lo_factor = 0.5; // T_min = lo * smallest MAP threshold
    double bound_hi_factor = 2.0; // T_max = hi * largest MAP threshold
    // lighter settings for the per-budget optimizations of the
    // threshold-comparison experiment
    std::vector<std::uint64_t> compare_seeds{1, 2, 3};
    int compare_max_iterations = 8;
    double compare_fd_h = 0.3;
    double compare_mu0 = 0.05;
};

struct SimConfig {
    phy::OfdmConfig ofdm{};
    ArraysConfig arrays{};
    SceneConfig scene{};
    PowerConfig power{};
    NoiseConfig noise{};
    DetectorConfig detector{};
    ProtocolConfig protocol{};
    ThresholdConfig thresholds{};
    SimSection sim{};
    SweepSection sweep{};
    OptimizerSection opt{};

    int scan_count() const {
        return static_cast<int>(std::llround(sim.t_s / ofdm.scan_duration()));
    }

    std::vector<double> sweep_budgets() const {
        if (!sweep.budgets.empty()) return sweep.budgets;
        std::vector<double> b(sweep.grid_points);
        for (int i = 0; i < sweep.grid_points; ++i)
            b[i] = power.min_dbm +
                   (power.max_dbm - power.min_dbm) * i / double(sweep.grid_points - 1);
        return b;
    }

    void validate() const;
    std::string fingerprint() const;
};

inline void SimConfig::validate() const {
    auto positive = [](double v, const char* field) {
        if (!(v > 0.0)) throw ConfigError(field, "must be positive");
    };
    positive(ofdm.f_c, "ofdm.f_c");
    positive(ofdm.w_c, "ofdm.w_c");
    positive(ofdm.w_sub, "ofdm.w_sub");
    positive(ofdm.t_sym, "ofdm.t_sym");
    if (ofdm.n_sub < 1) throw ConfigError("ofdm.n_sub", "must be >= 1");
    if (ofdm.n_sym < 1) throw ConfigError("ofdm.n_sym", "must be >= 1");
    positive(sim.t_s, "sim.t_s");
    const double scans = sim.t_s / ofdm.scan_duration();
    if (std::abs(scans - std::llround(scans)) > 1e-9)
        throw ConfigError("sim.t_s", "must be an integer number of scan durations");
    if (sim.seeds.empty()) throw ConfigError("sim.seeds", "need at least one seed");
    if (!(power.min_dbm < power.max_dbm))
        throw ConfigError("power.min_dbm", "power range is empty");
    if (sim.budget_dbm < power.min_dbm - 1e-12 || sim.budget_dbm > power.max_dbm + 1e-12)
        throw ConfigError("sim.budget_dbm", "outside the BS power range");
    positive(power.step_down_db, "power.step_down_db");
    positive(power.step_up_db, "power.step_up_db");
    if (power.n_comm < 0) throw ConfigError("power.n_comm", "must be >= 0");
    if (power.n_comm > 0 && power.comm_azimuths.size() != std::size_t(power.n_comm))
        throw ConfigError("power.comm_azimuths", "need one azimuth per communicating UE");
    try {
        arrays.bs.validate();
    } catch (const std::exception& e) {
        throw ConfigError("arrays.bs", e.what());
    }
    try {
        arrays.ue.validate();
    } catch (const std::exception& e) {
        throw ConfigError("arrays.ue", e.what());
    }
    try {
        scene.region.validate();
    } catch (const std::exception& e) {
        throw ConfigError("scene.region", e.what());
    }
    try {
        scene.target.validate();
    } catch (const std::exception& e) {
        throw ConfigError("scene.target", e.what());
    }
    try {
        scene.scatterer.validate();
    } catch (const std::exception& e) {
        throw ConfigError("scene.scatterer", e.what());
    }
    if (scene.target.trajectory.t_max < sim.t_s - 1e-12)
        throw ConfigError("scene.target.t_max", "trajectory horizon shorter than T_S");
    if (scene.v_max < 0.0) throw ConfigError("scene.v_max", "must be >= 0");
    if (detector.n_del < 1 || detector.n_dop < 1)
        throw ConfigError("detector.n_del", "bin counts must be >= 1");
    try {
        (void)thresholds.ssf_vector();
        (void)thresholds.earq_vector();
    } catch (const std::exception& e) {
        throw ConfigError("thresholds", e.what());
    }
    if (protocol.neighbor_ttl_scans < 0)
        throw ConfigError("protocol.neighbor_ttl_scans", "must be >= 0");
    if (sweep.grid_points < 2) throw ConfigError("sweep.grid_points", "must be >= 2");
    for (double b : sweep.budgets)
        if (b < power.min_dbm - 1e-12 || b > power.max_dbm + 1e-12)
            throw ConfigError("sweep.budgets", "budget outside the BS power range");
    try {
        opt.core.validate();
    } catch (const std::exception& e) {
        throw ConfigError("optimizer", e.what());
    }
}

// ---- key=value parsing ----------------------------------------------------

namespace detail {

struct RawConfig {
    std::map<std::string, std::map<std::string, std::string>> sections;
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline RawConfig parse_raw(std::istream& in) {
    RawConfig raw;
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find_first_of("#;");
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(lineno), "malformed section header");
            section = trim(line.substr(1, line.size() - 2));
            raw.sections[section];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno), "expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (section.empty()) throw ConfigError(key, "key outside any [section]");
        raw.sections[section][key] = value;
    }
    return raw;
}

class SectionReader {
public:
    SectionReader(const RawConfig& raw, std::string name) : name_(std::move(name)) {
        auto it = raw.sections.find(name_);
        if (it != raw.sections.end()) kv_ = &it->second;
    }

    bool present() const { return kv_ != nullptr; }

    std::optional<std::string> get(const std::string& key) {
        if (!kv_) return std::nullopt;
        auto it = kv_->find(key);
        if (it == kv_->end()) return std::nullopt;
        seen_.push_back(key);
        return it->second;
    }

    double number(const std::string& key, double fallback) {
        auto v = get(key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const double d = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("trailing characters");
            return d;
        } catch (const std::exception&) {
            throw ConfigError(name_ + "." + key, "not a number: '" + *v + "'");
        }
    }

    int integer(const std::string& key, int fallback) {
        const double d = number(key, fallback);
        if (std::abs(d - std::llround(d)) > 1e-9)
            throw ConfigError(name_ + "." + key, "expected an integer");
        return static_cast<int>(std::llround(d));
    }

    bool boolean(const std::string& key, bool fallback) {
        auto v = get(key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1") return true;
        if (*v == "false" || *v == "0") return false;
        throw ConfigError(name_ + "." + key, "expected true/false");
    }

    std::vector<double> numbers(const std::string& key, std::vector<double> fallback) {
        auto v = get(key);
        if (!v) return fallback;
        std::vector<double> out;
        std::stringstream ss(*v);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            try {
                out.push_back(std::stod(item));
            } catch (const std::exception&) {
                throw ConfigError(name_ + "." + key, "bad list element '" + item + "'");
            }
        }
        return out;
    }

    scene::Vec3 vec3(const std::string& key, scene::Vec3 fallback) {
        auto v = numbers(key, {});
        if (v.empty()) return fallback;
        if (v.size() != 3) throw ConfigError(name_ + "." + key, "expected x,y,z");
        return {v[0], v[1], v[2]};
    }

    void finish(const RawConfig& raw) const {
        if (!kv_) return;
        for (const auto& [key, value] : *kv_) {
            (void)value;
            bool known = false;
            for (const auto& s : seen_)
                if (s == key) {
                    known = true;
                    break;
                }
            if (!known) throw ConfigError(name_ + "." + key, "unknown key");
        }
        (void)raw;
    }

private:
    std::string name_;
    const std::map<std::string, std::string>* kv_ = nullptr;
    std::vector<std::string> seen_;
};

} // namespace detail

inline SimConfig parse_config(std::istream& in) {
    const detail::RawConfig raw = detail::parse_raw(in);
    static const char* known_sections[] = {"ofdm",      "arrays",   "scene",  "power",
                                           "noise",     "detector", "protocol", "thresholds",
                                           "sim",       "sweep",    "optimizer"};
    for (const auto& [name, kv] : raw.sections) {
        (void)kv;
        bool ok = false;
        for (const char* s : known_sections)
            if (name == s) ok = true;
        if (!ok) throw ConfigError(name, "unknown section");
    }

    SimConfig cfg;

    detail::SectionReader ofdm(raw, "ofdm");
    cfg.ofdm.f_c = ofdm.number("f_c", cfg.ofdm.f_c);
    cfg.ofdm.w_c = ofdm.number("w_c", cfg.ofdm.w_c);
    cfg.ofdm.n_sub = ofdm.integer("n_sub", cfg.ofdm.n_sub);
    cfg.ofdm.w_sub = ofdm.number("w_sub", cfg.ofdm.w_sub);
    cfg.ofdm.n_sym = ofdm.integer("n_sym", cfg.ofdm.n_sym);
    cfg.ofdm.t_sym = ofdm.number("t_sym", cfg.ofdm.t_sym);
    ofdm.finish(raw);

    detail::SectionReader arrays(raw, "arrays");
    cfg.arrays.bs.rows = arrays.integer("bs_rows", cfg.arrays.bs.rows);
    cfg.arrays.bs.cols = arrays.integer("bs_cols", cfg.arrays.bs.cols);
    cfg.arrays.ue.rows = arrays.integer("ue_rows", cfg.arrays.ue.rows);
    cfg.arrays.ue.cols = arrays.integer("ue_cols", cfg.arrays.ue.cols);
    cfg.arrays.bs.spacing = arrays.number("spacing", cfg.arrays.bs.spacing);
    cfg.arrays.ue.spacing = cfg.arrays.bs.spacing;
    arrays.finish(raw);

    detail::SectionReader sc(raw, "scene");
    cfg.scene.bs_pos = sc.vec3("bs_pos", cfg.scene.bs_pos);
    cfg.scene.bs_boresight_az = sc.number("bs_boresight_az", cfg.scene.bs_boresight_az);
    cfg.scene.ue_pos = sc.vec3("ue_pos", cfg.scene.ue_pos);
    cfg.scene.region.az_lo = sc.number("sweep_az_lo", cfg.scene.region.az_lo);
    cfg.scene.region.az_hi = sc.number("sweep_az_hi", cfg.scene.region.az_hi);
    cfg.scene.region.range_lo = sc.number("range_lo", cfg.scene.region.range_lo);
    cfg.scene.region.range_hi = sc.number("range_hi", cfg.scene.region.range_hi);
    cfg.scene.region.elevation = sc.number("elevation", cfg.scene.region.elevation);
    cfg.scene.region.n_beam = sc.integer("n_beam", cfg.scene.region.n_beam);
    {
        auto kind = sc.get("target_kind");
        if (kind) {
            if (*kind == "linear") cfg.scene.target.trajectory.kind = scene::TrajectoryKind::linear;
            else if (*kind == "quadratic")
                cfg.scene.target.trajectory.kind = scene::TrajectoryKind::quadratic;
            else if (*kind == "linear_kinked")
                cfg.scene.target.trajectory.kind = scene::TrajectoryKind::linear_kinked;
            else
                throw ConfigError("scene.target_kind", "unknown trajectory kind '" + *kind + "'");
        }
    }
    auto& traj = cfg.scene.target.trajectory;
    traj.start = sc.vec3("target_start", traj.start);
    traj.heading = sc.number("target_heading", traj.heading);
    traj.speed = sc.number("target_speed", traj.speed);
    traj.curvature = sc.number("target_curvature", traj.curvature);
    traj.kink_time = sc.number("target_kink_time", traj.kink_time);
    traj.kink_heading = sc.number("target_kink_heading", traj.kink_heading);
    cfg.scene.target.rcs = sc.number("target_rcs", cfg.scene.target.rcs);
    cfg.scene.scatterer.position = sc.vec3("scatterer_pos", cfg.scene.scatterer.position);
    cfg.scene.scatterer.rcs = sc.number("scatterer_rcs", cfg.scene.scatterer.rcs);
    if (sc.boolean("blocker_enabled", cfg.scene.blocker.has_value())) {
        scene::BlockerBox box = cfg.scene.blocker.value_or(scene::BlockerBox{});
        box.lo = sc.vec3("blocker_lo", box.lo);
        box.hi = sc.vec3("blocker_hi", box.hi);
        cfg.scene.blocker = box;
    } else {
        cfg.scene.blocker.reset();
    }
    cfg.scene.nu_d = sc.number("nu_d", cfg.scene.nu_d);
    cfg.scene.v_max = sc.number("v_max", cfg.scene.v_max);
    cfg.scene.beam_acceptance = sc.number("beam_acceptance", cfg.scene.beam_acceptance);
    sc.finish(raw);

    detail::SectionReader pw(raw, "power");
    cfg.power.min_dbm = pw.number("min_dbm", cfg.power.min_dbm);
    cfg.power.max_dbm = pw.number("max_dbm", cfg.power.max_dbm);
    cfg.power.step_down_db = pw.number("step_down_db", cfg.power.step_down_db);
    cfg.power.step_up_db = pw.number("step_up_db", cfg.power.step_up_db);
    cfg.power.comm_power_dbm = pw.number("comm_power_dbm", cfg.power.comm_power_dbm);
    cfg.power.n_comm = pw.integer("n_comm", cfg.power.n_comm);
    cfg.power.comm_azimuths = pw.numbers("comm_azimuths", cfg.power.comm_azimuths);
    cfg.power.comm_elevation = pw.number("comm_elevation", cfg.power.comm_elevation);
    pw.finish(raw);

    detail::SectionReader no(raw, "noise");
    cfg.noise.figure_db = no.number("figure_db", cfg.noise.figure_db);
    cfg.noise.temperature_k = no.number("temperature_k", cfg.noise.temperature_k);
    no.finish(raw);

    detail::SectionReader det(raw, "detector");
    cfg.detector.n_del = det.integer("n_del", cfg.detector.n_del);
    cfg.detector.n_dop = det.integer("n_dop", cfg.detector.n_dop);
    det.finish(raw);

    detail::SectionReader pr(raw, "protocol");
    {
        auto kind = pr.get("kind");
        if (kind) {
            if (*kind == "ssf") cfg.protocol.kind = metrics::ProtocolKind::ssf;
            else if (*kind == "earq") cfg.protocol.kind = metrics::ProtocolKind::earq;
            else if (*kind == "openloop") cfg.protocol.kind = metrics::ProtocolKind::openloop;
            else
                throw ConfigError("protocol.kind", "unknown protocol '" + *kind + "'");
        }
    }
    cfg.protocol.ssf.restart_at_last_detected =
        pr.boolean("restart_at_last_detected", cfg.protocol.ssf.restart_at_last_detected);
    cfg.protocol.ssf.sticky_reacquire =
        pr.boolean("sticky_reacquire", cfg.protocol.ssf.sticky_reacquire);
    cfg.protocol.ssf.search_giveup_scans =
        pr.integer("search_giveup_scans", cfg.protocol.ssf.search_giveup_scans);
    cfg.protocol.neighbor_ttl_scans =
        pr.integer("neighbor_ttl_scans", cfg.protocol.neighbor_ttl_scans);
    pr.finish(raw);

    detail::SectionReader th(raw, "thresholds");
    cfg.thresholds.eta0 = th.number("eta0", cfg.thresholds.eta0);
    cfg.thresholds.eta1 = th.number("eta1", cfg.thresholds.eta1);
    cfg.thresholds.eta2 = th.number("eta2", cfg.thresholds.eta2);
    cfg.thresholds.earq_eta0 = th.number("earq_eta0", cfg.thresholds.earq_eta0);
    cfg.thresholds.earq_eta1 = th.number("earq_eta1", cfg.thresholds.earq_eta1);
    cfg.thresholds.openloop_detection =
        th.number("openloop_detection", cfg.thresholds.openloop_detection);
    th.finish(raw);

    detail::SectionReader sim(raw, "sim");
    cfg.sim.t_s = sim.number("t_s", cfg.sim.t_s);
    {
        auto seeds = sim.numbers("seeds", {});
        if (!seeds.empty()) {
            cfg.sim.seeds.clear();
            for (double s : seeds) cfg.sim.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    cfg.sim.budget_dbm = sim.number("budget_dbm", cfg.sim.budget_dbm);
    sim.finish(raw);

    detail::SectionReader sw(raw, "sweep");
    cfg.sweep.budgets = sw.numbers("budgets", cfg.sweep.budgets);
    cfg.sweep.grid_points = sw.integer("grid_points", cfg.sweep.grid_points);
    sw.finish(raw);

    detail::SectionReader op(raw, "optimizer");
    cfg.opt.core.mu0 = op.number("mu0", cfg.opt.core.mu0);
    cfg.opt.core.tau_decay = op.number("tau_decay", cfg.opt.core.tau_decay);
    cfg.opt.core.eps = op.number("eps", cfg.opt.core.eps);
    cfg.opt.core.fd_h = op.number("fd_h", cfg.opt.core.fd_h);
    cfg.opt.core.max_iterations = op.integer("max_iterations", cfg.opt.core.max_iterations);
    {
        auto seeds = op.numbers("seeds", {});
        if (!seeds.empty()) {
            cfg.opt.core.seeds.clear();
            for (double s : seeds) cfg.opt.core.seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    cfg.opt.bound_lo_factor = op.number("bound_lo_factor", cfg.opt.bound_lo_factor);
    cfg.opt.bound_hi_factor = op.number("bound_hi_factor", cfg.opt.bound_hi_factor);
    {
        auto seeds = op.numbers("compare_seeds", {});
        if (!seeds.empty()) {
            cfg.opt.compare_seeds.clear();
            for (double s : seeds) cfg.opt.compare_seeds.push_back(static_cast<std::uint64_t>(s));
        }
    }
    cfg.opt.compare_max_iterations =
        op.integer("compare_max_iterations", cfg.opt.compare_max_iterations);
    cfg.opt.compare_fd_h = op.number("compare_fd_h", cfg.opt.compare_fd_h);
    cfg.opt.compare_mu0 = op.number("compare_mu0", cfg.opt.compare_mu0);
    op.finish(raw);

    return cfg;
}

inline SimConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open '" + path + "'");
    return parse_config(in);
}

inline std::string SimConfig::fingerprint() const {
    std::ostringstream ss;
    ss.precision(17);
    ss << ofdm.f_c << '|' << ofdm.w_c << '|' << ofdm.n_sub << '|' << ofdm.w_sub << '|'
       << ofdm.n_sym << '|' << ofdm.t_sym << '|' << arrays.bs.rows << '|' << arrays.bs.cols
       << '|' << arrays.ue.rows << '|' << arrays.ue.cols << '|' << arrays.bs.spacing << '|'
       << scene.bs_pos.x << ',' << scene.bs_pos.y << ',' << scene.bs_pos.z << '|'
       << scene.bs_boresight_az << '|' << scene.ue_pos.x << ',' << scene.ue_pos.y << ','
       << scene.ue_pos.z << '|' << scene.region.az_lo << ',' << scene.region.az_hi << ','
       << scene.region.range_lo << ',' << scene.region.range_hi << ',' << scene.region.elevation
       << ',' << scene.region.n_beam << '|' << static_cast<int>(scene.target.trajectory.kind)
       << ',' << scene.target.trajectory.start.x << ',' << scene.target.trajectory.start.y << ','
       << scene.target.trajectory.start.z << ',' << scene.target.trajectory.heading << ','
       << scene.target.trajectory.speed << ',' << scene.target.trajectory.curvature << ','
       << scene.target.trajectory.kink_time << ',' << scene.target.trajectory.kink_heading << '|'
       << scene.target.rcs << '|' << scene.scatterer.position.x << ','
       << scene.scatterer.position.y << ',' << scene.scatterer.position.z << ','
       << scene.scatterer.rcs << '|';
    if (scene.blocker)
        ss << scene.blocker->lo.x << ',' << scene.blocker->lo.y << ',' << scene.blocker->lo.z
           << ',' << scene.blocker->hi.x << ',' << scene.blocker->hi.y << ','
           << scene.blocker->hi.z;
    ss << '|' << scene.nu_d << '|' << scene.v_max << '|' << power.min_dbm << ',' << power.max_dbm
       << ',' << power.step_down_db << ',' << power.step_up_db << ',' << power.comm_power_dbm
       << ',' << power.n_comm << '|' << noise.figure_db << ',' << noise.temperature_k << '|'
       << detector.n_del << ',' << detector.n_dop << '|'
       << static_cast<int>(protocol.kind) << ',' << protocol.ssf.restart_at_last_detected << ','
       << protocol.ssf.sticky_reacquire << ',' << protocol.ssf.search_giveup_scans << ','
       << protocol.neighbor_ttl_scans << '|' << thresholds.eta0 << ',' << thresholds.eta1 << ','
       << thresholds.eta2 << ',' << thresholds.earq_eta0 << ',' << thresholds.earq_eta1 << ','
       << thresholds.openloop_detection << '|' << sim.t_s << ',' << sim.budget_dbm;
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(ss.str())));
    return buf;
}

} // namespace isac::harness
