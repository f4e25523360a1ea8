#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isac/core.hpp"
#include "isac/phy.hpp"
#include "isac/scene.hpp"

// Delay-Doppler filter bank and RESI computation. The grid search is
// exhaustive (100 bins at the reference numerology); the per-scan evaluation
// is a plain inner product against precomputed filter vectors.

namespace isac::detector {

struct DelayDopplerGrid {
    std::vector<double> delays;   // s, strictly increasing
    std::vector<double> dopplers; // Hz, strictly increasing

    void validate() const {
        if (delays.empty() || dopplers.empty())
            throw std::invalid_argument("delay-Doppler grid must be nonempty");
        for (std::size_t i = 1; i < delays.size(); ++i)
            if (!(delays[i] > delays[i - 1]))
                throw std::invalid_argument("delay bins must increase strictly");
        for (std::size_t i = 1; i < dopplers.size(); ++i)
            if (!(dopplers[i] > dopplers[i - 1]))
                throw std::invalid_argument("Doppler bins must increase strictly");
    }
};

struct ResiMeasurement {
    double resi = 0.0;
    double tau_star = 0.0; // s
    double nu_star = 0.0;  // Hz
    int beam_index = 0;
    int scan_index = 0;
};

struct GridBounds {
    scene::SensingRegion region;
    scene::Vec3 bs_pos;
    scene::Vec3 ue_pos;
    double v_max = 0.0; // m/s
    double nu_d = 0.0;  // Hz, LOS/NLOS Doppler offset
};

namespace detail {

// Bistatic path length BS -> p(r, az) -> UE over the region slice at the
// fixed elevation. Along a fixed-azimuth ray the sum is nondecreasing in r,
// so extremes live on the range endpoints; azimuth is sampled densely.
inline void delay_span(const GridBounds& b, double& tau_min, double& tau_max) {
    const auto& rg = b.region;
    const double ce = std::cos(rg.elevation), se = std::sin(rg.elevation);
    double fmin = 1e300, fmax = -1e300;
    const int n_az = 257;
    auto eval = [&](double az, double r) {
        const scene::Vec3 p{b.bs_pos.x + r * ce * std::cos(az),
                            b.bs_pos.y + r * ce * std::sin(az), b.bs_pos.z + r * se};
        const double f = r + scene::distance(p, b.ue_pos);
        fmin = std::min(fmin, f);
        fmax = std::max(fmax, f);
    };
    for (int i = 0; i < n_az; ++i) {
        const double az = rg.az_lo + (rg.az_hi - rg.az_lo) * i / (n_az - 1);
        eval(az, rg.range_lo);
        eval(az, rg.range_hi);
    }
    const double az_ue = std::atan2(b.ue_pos.y - b.bs_pos.y, b.ue_pos.x - b.bs_pos.x);
    if (az_ue >= rg.az_lo && az_ue <= rg.az_hi) {
        eval(az_ue, rg.range_lo);
        eval(az_ue, rg.range_hi);
    }
    tau_min = fmin / kSpeedOfLight;
    tau_max = fmax / kSpeedOfLight;
}

inline std::vector<double> linspace(double lo, double hi, int n) {
    if (!(hi > lo) || n <= 1) return {lo == hi ? lo : 0.5 * (lo + hi)};
    std::vector<double> v(n);
    for (int i = 0; i < n; ++i) v[i] = lo + (hi - lo) * i / (n - 1);
    return v;
}

} // namespace detail

// N_del uniform delay bins over the bistatic delay span of the region and
// N_dop uniform Doppler bins over +-(2 v_max / lambda0 + nu_d). Degenerate
// spans collapse to a single bin.
inline DelayDopplerGrid build_grid(const GridBounds& bounds, int n_del, int n_dop,
                                   const phy::OfdmConfig& cfg) {
    bounds.region.validate();
    if (n_del < 1 || n_dop < 1) throw std::domain_error("build_grid: bin counts must be >= 1");
    if (!(bounds.v_max >= 0.0)) throw std::domain_error("build_grid: v_max must be >= 0");
    double tau_min = 0.0, tau_max = 0.0;
    detail::delay_span(bounds, tau_min, tau_max);
    DelayDopplerGrid g;
    g.delays = detail::linspace(tau_min, tau_max, n_del);
    const double span = 2.0 * bounds.v_max / cfg.lambda0() + bounds.nu_d;
    g.dopplers = span > 0.0 ? detail::linspace(-span, span, n_dop)
                            : std::vector<double>{0.0};
    g.validate();
    return g;
}

// Concatenated per-subcarrier filter: segment q, symbol n entry
// exp(-j 2 pi (q-1) W_sub tau) * exp(-j 2 pi nu n T_sym), n = 1..n_sym.
inline cvec filter_vector(double tau, double nu, const phy::OfdmConfig& cfg) {
    cvec g(static_cast<std::size_t>(cfg.n_sub) * cfg.n_sym);
    std::size_t idx = 0;
    for (int q = 1; q <= cfg.n_sub; ++q) {
        const cd sub = std::polar(1.0, -2.0 * kPi * (q - 1) * cfg.w_sub * tau);
        for (int n = 1; n <= cfg.n_sym; ++n)
            g[idx++] = sub * std::polar(1.0, -2.0 * kPi * nu * n * cfg.t_sym);
    }
    return g;
}

struct PeakResult {
    double tau_star = 0.0;
    double nu_star = 0.0;
    double peak = 0.0; // | r^H g(tau*, nu*) |
    int delay_index = 0;
    int doppler_index = 0;
};

// Precomputed filter vectors for every grid bin; fixed per scenario.
class FilterBank {
public:
    FilterBank(const DelayDopplerGrid& grid, const phy::OfdmConfig& cfg) : grid_(grid) {
        grid_.validate();
        filters_.reserve(grid_.delays.size() * grid_.dopplers.size());
        for (double tau : grid_.delays)
            for (double nu : grid_.dopplers) filters_.push_back(filter_vector(tau, nu, cfg));
    }

    const DelayDopplerGrid& grid() const { return grid_; }
    const cvec& filter(int i_del, int i_dop) const {
        return filters_[static_cast<std::size_t>(i_del) * grid_.dopplers.size() + i_dop];
    }

    std::size_t n_bins() const { return filters_.size(); }

private:
    DelayDopplerGrid grid_;
    std::vector<cvec> filters_;
};

// | r^H g | with split real/imag accumulation.
inline double correlation_magnitude(const cvec& r, const cvec& g) {
    if (r.size() != g.size())
        throw std::invalid_argument("correlation_magnitude: length mismatch");
    double re = 0.0, im = 0.0;
    const std::size_t n = r.size();
    for (std::size_t k = 0; k < n; ++k) {
        const double a = r[k].real(), b = r[k].imag();
        const double c = g[k].real(), d = g[k].imag();
        re += a * c + b * d; // conj(r) * g
        im += a * d - b * c;
    }
    return std::hypot(re, im);
}

// Exhaustive argmax of |r^H g(tau, nu)| over the grid; ties break toward the
// smallest delay index, then the smallest Doppler index.
inline PeakResult matched_filter_peak(const cvec& r, const FilterBank& bank) {
    PeakResult best;
    best.peak = -1.0;
    const int n_del = static_cast<int>(bank.grid().delays.size());
    const int n_dop = static_cast<int>(bank.grid().dopplers.size());
    for (int i = 0; i < n_del; ++i)
        for (int j = 0; j < n_dop; ++j) {
            const double mag = correlation_magnitude(r, bank.filter(i, j));
            if (mag > best.peak) {
                best.peak = mag;
                best.delay_index = i;
                best.doppler_index = j;
            }
        }
    best.tau_star = bank.grid().delays[best.delay_index];
    best.nu_star = bank.grid().dopplers[best.doppler_index];
    return best;
}

// RESI = ||r^H g(tau*, nu*)|| / sqrt(N_sub N_sym sigma_z^2).
inline double compute_resi(const cvec& r, const cvec& g_star, double sigma_z) {
    if (!(sigma_z > 0.0)) throw std::domain_error("compute_resi: sigma_z must be > 0");
    return correlation_magnitude(r, g_star) /
           std::sqrt(static_cast<double>(r.size()) * sigma_z * sigma_z);
}

} // namespace isac::detector
