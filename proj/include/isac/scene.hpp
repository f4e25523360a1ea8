#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/core.hpp"

// Simulation geometry: sensing region, beam grid, target trajectories and
// LOS blockage. Everything here is a pure function of its inputs so scenario
// runners can evaluate scenes concurrently.

namespace isac::scene {

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec3() = default;
    constexpr Vec3(double X, double Y, double Z) : x(X), y(Y), z(Z) {}

    constexpr Vec3 operator+(const Vec3& r) const { return {x + r.x, y + r.y, z + r.z}; }
    constexpr Vec3 operator-(const Vec3& r) const { return {x - r.x, y - r.y, z - r.z}; }
    constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    friend constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

    constexpr double dot(const Vec3& r) const { return x * r.x + y * r.y + z * r.z; }
    double norm() const { return std::sqrt(dot(*this)); }
    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

enum class TrajectoryKind { linear, quadratic, linear_kinked };

// A target path in the ground plane (constant height), traversed at constant
// speed. The quadratic kind follows the curve p(s) = start + u*s + n*c*s^2
// (u = heading direction, n = left normal) parameterized by arc length, so
// |velocity| == speed at all times.
struct TrajectorySpec {
    TrajectoryKind kind = TrajectoryKind::linear;
    Vec3 start;
    double heading = 0.0;      // radians in the ground plane, 0 = +x
    double speed = 0.0;        // m/s (v_tg)
    double curvature = 0.0;    // 1/m, quadratic kind only
    double kink_time = 0.0;    // seconds, kinked kind only
    double kink_heading = 0.0; // heading after the kink
    double t_max = 10.0;       // validity horizon (scenario length)

    void validate() const {
        if (!(speed >= 0.0)) throw std::invalid_argument("trajectory speed must be >= 0");
        if (!start.finite()) throw std::invalid_argument("trajectory start must be finite");
        if (kind == TrajectoryKind::linear_kinked &&
            (kink_time < 0.0 || kink_time > t_max))
            throw std::invalid_argument("kink time must lie within [0, t_max]");
    }
};

struct TargetSpec {
    TrajectorySpec trajectory;
    double rcs = 1.0; // m^2 (sigma_m)

    void validate() const {
        trajectory.validate();
        if (!(rcs > 0.0)) throw std::invalid_argument("target rcs must be > 0");
    }
};

struct ScattererSpec {
    Vec3 position;
    double rcs = 10.0; // m^2 (sigma_mp)

    void validate() const {
        if (!(rcs > 0.0)) throw std::invalid_argument("scatterer rcs must be > 0");
    }
};

// Axis-aligned occluder for the target->UE line of sight.
struct BlockerBox {
    Vec3 lo;
    Vec3 hi;
};

struct SensingRegion {
    double az_lo = kPi / 4.0;
    double az_hi = 3.0 * kPi / 4.0;
    double range_lo = 3.5;  // m, from the BS
    double range_hi = 13.0; // m
    double elevation = 0.0; // radians, fixed for all beams
    int n_beam = 20;

    void validate() const {
        if (!(az_lo < az_hi)) throw std::invalid_argument("region azimuth interval empty");
        if (!(range_lo < range_hi)) throw std::invalid_argument("region range interval empty");
        if (n_beam < 2) throw std::invalid_argument("region needs n_beam >= 2");
    }
};

struct BeamGrid {
    std::vector<double> centers_az; // strictly increasing, length n_beam
    double elevation = 0.0;
    double az_lo = 0.0, az_hi = 0.0;
    double range_lo = 0.0, range_hi = 0.0;

    int n_beam() const { return static_cast<int>(centers_az.size()); }
    double cell_width() const { return (az_hi - az_lo) / centers_az.size(); }
};

namespace detail {

inline Vec3 heading_dir(double h) { return {std::cos(h), std::sin(h), 0.0}; }
inline Vec3 left_normal(double h) { return {-std::sin(h), std::cos(h), 0.0}; }

// Arc-length state of the quadratic curve: ds_curve/dt = speed / |dp/dxi|.
inline double quad_xi_rate(double xi, double speed, double c) {
    return speed / std::sqrt(1.0 + 4.0 * c * c * xi * xi);
}

// One fixed-step RK4 step of dxi/dt = quad_xi_rate(xi).
inline double quad_rk4_step(double xi, double dt, double speed, double c) {
    const double k1 = quad_xi_rate(xi, speed, c);
    const double k2 = quad_xi_rate(xi + 0.5 * dt * k1, speed, c);
    const double k3 = quad_xi_rate(xi + 0.5 * dt * k2, speed, c);
    const double k4 = quad_xi_rate(xi + dt * k3, speed, c);
    return xi + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

inline constexpr double kQuadStep = 1e-3; // s, fixed so replays are bit-identical

inline Vec3 quad_point(const TrajectorySpec& s, double xi) {
    const Vec3 u = heading_dir(s.heading);
    const Vec3 n = left_normal(s.heading);
    return s.start + u * xi + n * (s.curvature * xi * xi);
}

inline Vec3 quad_tangent(const TrajectorySpec& s, double xi) {
    const Vec3 u = heading_dir(s.heading);
    const Vec3 n = left_normal(s.heading);
    const Vec3 d = u + n * (2.0 * s.curvature * xi);
    const double m = d.norm();
    return m > 0.0 ? d * (1.0 / m) : u;
}

// Integrate xi from (t0, xi0) to t on the absolute kQuadStep grid. Stepping
// is anchored to t = 0 so that incremental advances reproduce a fresh
// integration exactly.
inline double quad_integrate(const TrajectorySpec& s, double t0, double xi0, double t) {
    double xi = xi0;
    double tc = t0;
    while (tc + kQuadStep <= t + 1e-15) {
        xi = quad_rk4_step(xi, kQuadStep, s.speed, s.curvature);
        tc += kQuadStep;
    }
    if (t - tc > 1e-15) xi = quad_rk4_step(xi, t - tc, s.speed, s.curvature);
    return xi;
}

} // namespace detail

// Position at time t. Deterministic and continuous in t; the kinked kind is
// continuous in position, discontinuous in velocity.
inline Vec3 target_position(const TrajectorySpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.t_max))
        throw std::out_of_range("target_position: t outside [0, t_max]");
    switch (spec.kind) {
    case TrajectoryKind::linear:
        return spec.start + detail::heading_dir(spec.heading) * (spec.speed * t);
    case TrajectoryKind::linear_kinked: {
        const double t1 = std::min(t, spec.kink_time);
        const double t2 = std::max(0.0, t - spec.kink_time);
        return spec.start + detail::heading_dir(spec.heading) * (spec.speed * t1) +
               detail::heading_dir(spec.kink_heading) * (spec.speed * t2);
    }
    case TrajectoryKind::quadratic: {
        const double xi = detail::quad_integrate(spec, 0.0, 0.0, t);
        return detail::quad_point(spec, xi);
    }
    }
    throw std::logic_error("unreachable trajectory kind");
}

// Velocity at time t (one-sided from above at the kink).
inline Vec3 target_velocity(const TrajectorySpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.t_max))
        throw std::out_of_range("target_velocity: t outside [0, t_max]");
    switch (spec.kind) {
    case TrajectoryKind::linear:
        return detail::heading_dir(spec.heading) * spec.speed;
    case TrajectoryKind::linear_kinked:
        return detail::heading_dir(t < spec.kink_time ? spec.heading : spec.kink_heading) *
               spec.speed;
    case TrajectoryKind::quadratic: {
        const double xi = detail::quad_integrate(spec, 0.0, 0.0, t);
        return detail::quad_tangent(spec, xi) * spec.speed;
    }
    }
    throw std::logic_error("unreachable trajectory kind");
}

// Incremental trajectory evaluation for scan loops. advance_to(t) walks the
// same fixed integration grid as target_position, so the cursor reproduces
// fresh evaluations bit for bit.
class TrajectoryCursor {
public:
    explicit TrajectoryCursor(const TrajectorySpec& spec) : spec_(spec) { spec_.validate(); }

    Vec3 position_at(double t) {
        sync(t);
        if (spec_.kind == TrajectoryKind::quadratic) return detail::quad_point(spec_, xi_at_t_);
        return target_position(spec_, t);
    }

    Vec3 velocity_at(double t) {
        sync(t);
        if (spec_.kind == TrajectoryKind::quadratic)
            return detail::quad_tangent(spec_, xi_at_t_) * spec_.speed;
        return target_velocity(spec_, t);
    }

private:
    void sync(double t) {
        if (spec_.kind != TrajectoryKind::quadratic) return;
        if (t < t_grid_) { // restart; callers normally move forward only
            t_grid_ = 0.0;
            xi_grid_ = 0.0;
        }
        while (t_grid_ + detail::kQuadStep <= t + 1e-15) {
            xi_grid_ = detail::quad_rk4_step(xi_grid_, detail::kQuadStep, spec_.speed,
                                             spec_.curvature);
            t_grid_ += detail::kQuadStep;
        }
        xi_at_t_ = xi_grid_;
        if (t - t_grid_ > 1e-15)
            xi_at_t_ = detail::quad_rk4_step(xi_grid_, t - t_grid_, spec_.speed, spec_.curvature);
    }

    TrajectorySpec spec_;
    double t_grid_ = 0.0;  // last absolute grid time
    double xi_grid_ = 0.0; // xi at t_grid_
    double xi_at_t_ = 0.0;
};

// Uniform azimuth partition of the sweep interval at the fixed elevation;
// adjacency is index adjacency.
inline BeamGrid build_beam_grid(const SensingRegion& region) {
    region.validate();
    BeamGrid g;
    g.elevation = region.elevation;
    g.az_lo = region.az_lo;
    g.az_hi = region.az_hi;
    g.range_lo = region.range_lo;
    g.range_hi = region.range_hi;
    const double width = (region.az_hi - region.az_lo) / region.n_beam;
    g.centers_az.resize(region.n_beam);
    for (int i = 0; i < region.n_beam; ++i)
        g.centers_az[i] = region.az_lo + (i + 0.5) * width;
    return g;
}

// Index of the azimuth cell containing p as seen from the BS, provided p's
// range from the BS lies inside the region's range interval. Cells partition
// the sweep: [az_lo + i*w, az_lo + (i+1)*w), with az_hi closing the last cell.
inline std::optional<int> beam_containing(const BeamGrid& grid, const Vec3& bs_pos,
                                          const Vec3& p) {
    const Vec3 d = p - bs_pos;
    const double r = d.norm();
    if (r < grid.range_lo || r > grid.range_hi) return std::nullopt;
    const double az = std::atan2(d.y, d.x);
    if (az < grid.az_lo || az > grid.az_hi) return std::nullopt;
    const double w = grid.cell_width();
    int idx = static_cast<int>((az - grid.az_lo) / w);
    if (idx >= grid.n_beam()) idx = grid.n_beam() - 1; // az == az_hi
    return idx;
}

// True iff the tg-ue segment intersects the axis-aligned box (slab test).
inline bool los_blocked(const Vec3& tg, const Vec3& ue, const BlockerBox& box) {
    const Vec3 d = ue - tg;
    double t_enter = 0.0, t_exit = 1.0;
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    const double o[3] = {tg.x, tg.y, tg.z};
    const double dir[3] = {d.x, d.y, d.z};
    for (int i = 0; i < 3; ++i) {
        if (dir[i] == 0.0) {
            if (o[i] < lo[i] || o[i] > hi[i]) return false;
            continue;
        }
        double t0 = (lo[i] - o[i]) / dir[i];
        double t1 = (hi[i] - o[i]) / dir[i];
        if (t0 > t1) std::swap(t0, t1);
        t_enter = std::max(t_enter, t0);
        t_exit = std::min(t_exit, t1);
        if (t_enter > t_exit) return false;
    }
    return true;
}

} // namespace isac::scene
