#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "isac/scene.hpp"

using namespace isac;
using namespace isac::scene;

namespace {

// Independent fine-step integrator for the quadratic kind: integrates the
// same arc-length ODE with a different stepper (RK4 at 1e-5 s, coded from
// scratch) and maps through an independently written curve formula.
Vec3 quad_position_oracle(const TrajectorySpec& s, double t) {
    const double c = s.curvature;
    auto rate = [&](double xi) { return s.speed / std::hypot(1.0, 2.0 * c * xi); };
    double xi = 0.0;
    const double h = 1e-5;
    double tc = 0.0;
    while (tc < t) {
        const double dt = std::min(h, t - tc);
        const double k1 = rate(xi);
        const double k2 = rate(xi + 0.5 * dt * k1);
        const double k3 = rate(xi + 0.5 * dt * k2);
        const double k4 = rate(xi + dt * k3);
        xi += dt * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
        tc += dt;
    }
    const double ux = std::cos(s.heading), uy = std::sin(s.heading);
    return {s.start.x + ux * xi - uy * c * xi * xi,
            s.start.y + uy * xi + ux * c * xi * xi, s.start.z};
}

// Brute-force membership: scan every cell interval and the range band.
std::optional<int> beam_scan_oracle(const BeamGrid& g, const Vec3& bs, const Vec3& p) {
    const Vec3 d = p - bs;
    const double r = std::sqrt(d.x * d.x + d.y * d.y + d.z * d.z);
    if (r < g.range_lo || r > g.range_hi) return std::nullopt;
    const double az = std::atan2(d.y, d.x);
    const double w = g.cell_width();
    for (int i = 0; i < g.n_beam(); ++i) {
        const double lo = g.centers_az[i] - 0.5 * w;
        const double hi = g.centers_az[i] + 0.5 * w;
        const bool last = (i == g.n_beam() - 1);
        if (az >= lo && (az < hi || (last && az <= hi))) return i;
    }
    return std::nullopt;
}

} // namespace

TEST_CASE("linear trajectory matches uniform motion") {
    TrajectorySpec s;
    s.kind = TrajectoryKind::linear;
    s.start = {0, 0, 0};
    s.heading = 0.0;
    s.speed = 3.0;
    const Vec3 p = target_position(s, 2.0);
    CHECK(p.x == Catch::Approx(6.0));
    CHECK(p.y == Catch::Approx(0.0).margin(1e-15));
    CHECK(p.z == Catch::Approx(0.0).margin(1e-15));
}

TEST_CASE("every kind starts at the spec start point") {
    for (auto kind : {TrajectoryKind::linear, TrajectoryKind::quadratic,
                      TrajectoryKind::linear_kinked}) {
        TrajectorySpec s;
        s.kind = kind;
        s.start = {1.5, -2.0, 1.0};
        s.heading = 0.7;
        s.speed = 3.0;
        s.curvature = 0.2;
        s.kink_time = 4.0;
        s.kink_heading = 1.9;
        const Vec3 p = target_position(s, 0.0);
        CHECK(p.x == s.start.x);
        CHECK(p.y == s.start.y);
        CHECK(p.z == s.start.z);
    }
}

TEST_CASE("t outside the horizon raises a range error") {
    TrajectorySpec s;
    s.speed = 1.0;
    CHECK_THROWS_AS(target_position(s, -0.1), std::out_of_range);
    CHECK_THROWS_AS(target_position(s, s.t_max + 0.1), std::out_of_range);
}

TEST_CASE("quadratic position agrees with a fine-step integration oracle") {
    TrajectorySpec s;
    s.kind = TrajectoryKind::quadratic;
    s.start = {-4.0, 5.0, 1.0};
    s.heading = 0.3;
    s.speed = 3.0;
    s.curvature = 0.25;
    for (double t : {0.5, 1.7, 3.0, 6.2, 10.0}) {
        const Vec3 a = target_position(s, t);
        const Vec3 b = quad_position_oracle(s, t);
        CHECK(distance(a, b) < 1e-9);
    }
}

TEST_CASE("quadratic traversal holds constant speed") {
    TrajectorySpec s;
    s.kind = TrajectoryKind::quadratic;
    s.start = {0, 0, 0};
    s.heading = 1.2;
    s.speed = 3.0;
    s.curvature = 0.4;
    const double dt = 1e-4;
    for (double t : {0.8, 2.5, 7.3}) {
        const Vec3 a = target_position(s, t);
        const Vec3 b = target_position(s, t + dt);
        CHECK(distance(a, b) / dt == Catch::Approx(3.0).epsilon(1e-5));
        CHECK(target_velocity(s, t).norm() == Catch::Approx(3.0).epsilon(1e-12));
    }
}

TEST_CASE("kinked trajectory is continuous at the kink") {
    TrajectorySpec s;
    s.kind = TrajectoryKind::linear_kinked;
    s.start = {2, 1, 0};
    s.heading = 0.2;
    s.speed = 3.0;
    s.kink_time = 4.0;
    s.kink_heading = 2.1;
    const Vec3 before = target_position(s, s.kink_time - 1e-12);
    const Vec3 at = target_position(s, s.kink_time);
    const Vec3 after = target_position(s, s.kink_time + 1e-12);
    CHECK(distance(before, at) < 1e-9);
    CHECK(distance(after, at) < 1e-9);
    // velocity direction genuinely changes
    const Vec3 v0 = target_velocity(s, s.kink_time - 1e-6);
    const Vec3 v1 = target_velocity(s, s.kink_time + 1e-6);
    CHECK(distance(v0, v1) > 1.0);
}

TEST_CASE("cursor replays fresh evaluations bit for bit") {
    TrajectorySpec s;
    s.kind = TrajectoryKind::quadratic;
    s.start = {-4.5, 6.0, 1.0};
    s.heading = 0.1;
    s.speed = 3.0;
    s.curvature = 0.12;
    TrajectoryCursor cur(s);
    for (int k = 0; k < 1000; ++k) {
        const double t = k * 0.01;
        const Vec3 a = cur.position_at(t);
        const Vec3 b = target_position(s, t);
        REQUIRE(a.x == b.x);
        REQUIRE(a.y == b.y);
        REQUIRE(a.z == b.z);
    }
}

TEST_CASE("beam grid spacing matches the uniform partition") {
    SensingRegion r;
    r.az_lo = kPi / 4.0;
    r.az_hi = 3.0 * kPi / 4.0;
    r.n_beam = 20;
    const BeamGrid g = build_beam_grid(r);
    const double width = (kPi / 2.0) / 20.0;
    REQUIRE(g.n_beam() == 20);
    CHECK(g.centers_az.front() == Catch::Approx(kPi / 4.0 + width / 2.0).epsilon(1e-14));
    for (int i = 1; i < 20; ++i)
        CHECK(g.centers_az[i] - g.centers_az[i - 1] == Catch::Approx(width).epsilon(1e-12));
}

TEST_CASE("two-cell grid lands on the midpoints") {
    SensingRegion r;
    r.az_lo = 0.0;
    r.az_hi = kPi;
    r.n_beam = 2;
    const BeamGrid g = build_beam_grid(r);
    CHECK(g.centers_az[0] == Catch::Approx(kPi / 4.0));
    CHECK(g.centers_az[1] == Catch::Approx(3.0 * kPi / 4.0));
}

TEST_CASE("all beam centers lie inside the sweep interval") {
    SensingRegion r;
    r.az_lo = 0.4;
    r.az_hi = 2.8;
    r.n_beam = 17;
    const BeamGrid g = build_beam_grid(r);
    for (double c : g.centers_az) {
        CHECK(c > r.az_lo);
        CHECK(c < r.az_hi);
    }
}

TEST_CASE("point on a beam center ray maps to that beam") {
    SensingRegion r;
    const BeamGrid g = build_beam_grid(r);
    const Vec3 bs{0, 0, 0};
    const double mid = 0.5 * (r.range_lo + r.range_hi);
    const Vec3 p{mid * std::cos(g.centers_az[5]), mid * std::sin(g.centers_az[5]), 0.0};
    REQUIRE(beam_containing(g, bs, p).has_value());
    CHECK(*beam_containing(g, bs, p) == 5);
}

TEST_CASE("points outside the range interval are not in any beam") {
    SensingRegion r;
    const BeamGrid g = build_beam_grid(r);
    const Vec3 bs{0, 0, 0};
    const double az = g.centers_az[3];
    const Vec3 near{0.5 * r.range_lo * std::cos(az), 0.5 * r.range_lo * std::sin(az), 0.0};
    const Vec3 far{2.0 * r.range_hi * std::cos(az), 2.0 * r.range_hi * std::sin(az), 0.0};
    CHECK(!beam_containing(g, bs, near).has_value());
    CHECK(!beam_containing(g, bs, far).has_value());
}

TEST_CASE("membership agrees with an exhaustive cell scan on random points") {
    SensingRegion r;
    r.az_lo = 0.6;
    r.az_hi = 2.5;
    r.range_lo = 2.0;
    r.range_hi = 11.0;
    r.n_beam = 13;
    const BeamGrid g = build_beam_grid(r);
    const Vec3 bs{0.5, -0.3, 2.0};
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> co(-14.0, 14.0);
    for (int i = 0; i < 10000; ++i) {
        const Vec3 p{co(rng), co(rng), co(rng) * 0.1};
        const auto got = beam_containing(g, bs, p);
        const auto want = beam_scan_oracle(g, bs, p);
        REQUIRE(got == want);
    }
}

TEST_CASE("cells partition the region") {
    SensingRegion r;
    const BeamGrid g = build_beam_grid(r);
    const Vec3 bs{0, 0, 0};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> az(r.az_lo, r.az_hi);
    std::uniform_real_distribution<double> rad(r.range_lo, r.range_hi);
    for (int i = 0; i < 2000; ++i) {
        const double a = az(rng), d = rad(rng);
        const Vec3 p{d * std::cos(a), d * std::sin(a), 0.0};
        int hits = 0;
        const double w = g.cell_width();
        for (int b = 0; b < g.n_beam(); ++b) {
            const double lo = g.centers_az[b] - 0.5 * w;
            const double hi = g.centers_az[b] + 0.5 * w;
            const bool last = (b == g.n_beam() - 1);
            if (a >= lo && (a < hi || (last && a <= hi))) ++hits;
        }
        REQUIRE(hits == 1);
        REQUIRE(beam_containing(g, bs, p).has_value());
    }
}

TEST_CASE("segment through the box interior is blocked") {
    BlockerBox box{{-1, -1, -1}, {1, 1, 1}};
    CHECK(los_blocked({-3, 0, 0}, {3, 0, 0}, box));
    CHECK(los_blocked({0, 0, 0}, {5, 5, 5}, box)); // endpoint inside
}

TEST_CASE("segment on one side of the box is clear") {
    BlockerBox box{{-1, -1, -1}, {1, 1, 1}};
    CHECK(!los_blocked({-3, 2, 0}, {3, 2, 0}, box));
    CHECK(!los_blocked({2, -3, 0}, {2, 3, 0}, box));
}

TEST_CASE("blockage agrees with a dense segment-sampling oracle") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-5.0, 5.0);
    for (int i = 0; i < 1000; ++i) {
        Vec3 lo{u(rng), u(rng), u(rng)};
        Vec3 hi = lo + Vec3{std::abs(u(rng)) + 0.5, std::abs(u(rng)) + 0.5,
                            std::abs(u(rng)) + 0.5};
        BlockerBox box{lo, hi};
        const Vec3 a{u(rng) * 2, u(rng) * 2, u(rng) * 2};
        const Vec3 b{u(rng) * 2, u(rng) * 2, u(rng) * 2};
        bool sampled = false;
        const int n = 4000;
        for (int k = 0; k <= n && !sampled; ++k) {
            const Vec3 p = a + (b - a) * (double(k) / n);
            sampled = p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y &&
                      p.z >= lo.z && p.z <= hi.z;
        }
        REQUIRE(los_blocked(a, b, box) == sampled);
    }
}
