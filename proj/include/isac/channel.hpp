#pragma once

#include <cmath>
#include <complex>
#include <stdexcept>

#include "isac/core.hpp"
#include "isac/scene.hpp"

// Steering vectors, path-loss coefficients, and the per-subcarrier
// BS->target and target->UE channel vectors. All functions are stateless.

namespace isac::channel {

using scene::Vec3;

struct ArrayGeometry {
    int rows = 1;         // elevation axis
    int cols = 1;         // azimuth axis
    double spacing = 0.5; // element spacing as a fraction of the carrier wavelength

    int size() const { return rows * cols; }
    void validate() const {
        if (rows < 1 || cols < 1) throw std::invalid_argument("array needs rows, cols >= 1");
        if (!(spacing > 0.0)) throw std::invalid_argument("array spacing must be > 0");
    }
};

struct Angle2D {
    double azimuth = 0.0;   // radians, [-pi, pi]
    double elevation = 0.0; // radians, [-pi/2, pi/2]
};

struct PathLoss {
    double value = 0.0;   // dimensionless power gain
    double lambda0 = 0.0; // carrier wavelength, m
};

struct ChannelVector {
    cvec coeffs;
    int q = 1;        // subcarrier index, 1-based
    double tau = 0.0; // path delay, s
};

// Azimuth/elevation of `to` as seen from `from`, with the azimuth measured
// relative to an array boresight direction in the ground plane.
inline Angle2D angle_from(const Vec3& from, const Vec3& to, double boresight_az = 0.0) {
    const Vec3 d = to - from;
    const double horiz = std::hypot(d.x, d.y);
    double az = std::atan2(d.y, d.x) - boresight_az;
    while (az > kPi) az -= 2.0 * kPi;
    while (az < -kPi) az += 2.0 * kPi;
    return {az, std::atan2(d.z, horiz)};
}

// Physical placement of an antenna array: phase reference position plus the
// ground-plane direction its broadside faces.
struct ArrayFrame {
    Vec3 position;
    double boresight_az = 0.0;
};

// Far-field steering vector for a uniform planar array, flattened row-major.
// Element (m, n) carries phase 2*pi*spacing*(m*sin(el) + n*cos(el)*sin(az)),
// i.e. pi*(...) at half-wavelength spacing.
inline cvec steering_vector(const ArrayGeometry& geom, const Angle2D& angle) {
    geom.validate();
    cvec a(static_cast<std::size_t>(geom.size()));
    const double se = std::sin(angle.elevation);
    const double ce = std::cos(angle.elevation);
    const double sa = std::sin(angle.azimuth);
    const double k = 2.0 * kPi * geom.spacing;
    std::size_t idx = 0;
    for (int m = 0; m < geom.rows; ++m)
        for (int n = 0; n < geom.cols; ++n)
            a[idx++] = std::polar(1.0, k * (m * se + n * ce * sa));
    return a;
}

// Friis free-space gain lambda0^2 / (16 pi^2 d^2).
inline PathLoss friis_gain(double lambda0, double d) {
    if (!(d > 0.0) || !(lambda0 > 0.0))
        throw std::domain_error("friis_gain requires lambda0 > 0 and d > 0");
    return {lambda0 * lambda0 / (16.0 * kPi * kPi * d * d), lambda0};
}

// Bistatic LOS gain sigma_m * lambda0^2 / (16 pi^2 d^2).
inline PathLoss bistatic_gain_los(double lambda0, double rcs, double d_tg_ue) {
    if (!(d_tg_ue > 0.0) || !(rcs > 0.0) || !(lambda0 > 0.0))
        throw std::domain_error("bistatic_gain_los requires positive inputs");
    return {rcs * lambda0 * lambda0 / (16.0 * kPi * kPi * d_tg_ue * d_tg_ue), lambda0};
}

// Bistatic NLOS gain sigma_m * sigma_mp * lambda0^4 / (16^2 pi^4 d1^2 d2^2).
inline PathLoss bistatic_gain_nlos(double lambda0, double rcs, double rcs_mp,
                                   double d_tg_mp, double d_ue_mp) {
    if (!(d_tg_mp > 0.0) || !(d_ue_mp > 0.0) || !(rcs > 0.0) || !(rcs_mp > 0.0) ||
        !(lambda0 > 0.0))
        throw std::domain_error("bistatic_gain_nlos requires positive inputs");
    const double l2 = lambda0 * lambda0;
    const double denom = 256.0 * kPi * kPi * kPi * kPi * d_tg_mp * d_tg_mp * d_ue_mp * d_ue_mp;
    return {rcs * rcs_mp * l2 * l2 / denom, lambda0};
}

namespace detail {
inline cvec scaled_steering(const ArrayGeometry& geom, const Angle2D& ang, double amp,
                            double phase) {
    cvec a = steering_vector(geom, ang);
    const cd factor = std::polar(amp, phase);
    for (auto& v : a) v *= factor;
    return a;
}
} // namespace detail

// Eq.-style BS->target channel: sqrt(beta_BS) * exp(-j 2 pi (q-1) W_sub tau) * alpha(theta).
inline ChannelVector bs_target_channel(int q, const ArrayGeometry& geom, const ArrayFrame& bs,
                                       const Vec3& target, double lambda0, double w_sub) {
    if (q < 1) throw std::invalid_argument("subcarrier index q is 1-based");
    const double d = scene::distance(bs.position, target);
    const PathLoss beta = friis_gain(lambda0, d);
    const double tau = d / kSpeedOfLight;
    const double phase = -2.0 * kPi * (q - 1) * w_sub * tau;
    ChannelVector h;
    h.q = q;
    h.tau = tau;
    h.coeffs = detail::scaled_steering(geom, angle_from(bs.position, target, bs.boresight_az),
                                       std::sqrt(beta.value), phase);
    return h;
}

struct TargetUeChannel {
    ChannelVector los;  // zeroed when the LOS link is blocked
    ChannelVector nlos; // via the scatterer, always present
};

// Target->UE channel, LOS and NLOS components. The LOS term is zeroed when
// `blocked`; the NLOS term bounces off the scatterer with the compound
// bistatic gain and delay (d_tg_mp + d_ue_mp) / c.
inline TargetUeChannel target_ue_channel(int q, const ArrayGeometry& geom, const ArrayFrame& ue,
                                         const Vec3& target, double target_rcs,
                                         const scene::ScattererSpec& scat, bool blocked,
                                         double lambda0, double w_sub) {
    if (q < 1) throw std::invalid_argument("subcarrier index q is 1-based");
    TargetUeChannel out;

    const double d_los = scene::distance(target, ue.position);
    out.los.q = q;
    out.los.tau = d_los / kSpeedOfLight;
    if (blocked) {
        out.los.coeffs.assign(static_cast<std::size_t>(geom.size()), cd{0.0, 0.0});
    } else {
        const PathLoss beta = bistatic_gain_los(lambda0, target_rcs, d_los);
        const double phase = -2.0 * kPi * (q - 1) * w_sub * out.los.tau;
        out.los.coeffs = detail::scaled_steering(
            geom, angle_from(ue.position, target, ue.boresight_az), std::sqrt(beta.value), phase);
    }

    const double d_tg_mp = scene::distance(target, scat.position);
    const double d_ue_mp = scene::distance(ue.position, scat.position);
    out.nlos.q = q;
    out.nlos.tau = (d_tg_mp + d_ue_mp) / kSpeedOfLight;
    const PathLoss beta_n = bistatic_gain_nlos(lambda0, target_rcs, scat.rcs, d_tg_mp, d_ue_mp);
    const double phase_n = -2.0 * kPi * (q - 1) * w_sub * out.nlos.tau;
    out.nlos.coeffs = detail::scaled_steering(
        geom, angle_from(ue.position, scat.position, ue.boresight_az), std::sqrt(beta_n.value),
        phase_n);
    return out;
}

} // namespace isac::channel
