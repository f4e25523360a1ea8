#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "isac/core.hpp"
#include "isac/rng.hpp"

// Transmit frame construction (power split, beamforming, data symbols),
// symbol-domain Doppler, receive combining and noise: everything between the
// channel vectors and the received vector r.

namespace isac::phy {

struct OfdmConfig {
    double f_c = 24e9;    // carrier, Hz
    double w_c = 15e3;    // subcarrier bandwidth, Hz
    int n_sub = 4;        // subcarriers per scan
    double w_sub = 150e3; // subcarrier spacing, Hz (10 W_c)
    int n_sym = 100;      // OFDM symbols per scan
    double t_sym = 100e-6; // symbol duration, s

    double lambda0() const { return kSpeedOfLight / f_c; }
    double scan_duration() const { return n_sym * t_sym; }
    int samples_per_scan() const { return n_sym * n_sub; }

    void validate() const {
        if (!(f_c > 0 && w_c > 0 && w_sub > 0 && t_sym > 0) || n_sub < 1 || n_sym < 1)
            throw std::invalid_argument("OfdmConfig requires positive numerology");
    }
};

struct PowerAllocation {
    double p_q = 0.0;          // radiated watts per subcarrier
    std::vector<double> gamma; // L+1 allocation coefficients, sensing last
};

struct BeamformingMatrix {
    CMatrix f;                       // N_BS x (L+1), trace(F F^H) = 1
    std::vector<double> gamma_norm;  // effective per-column coefficients
};

struct DopplerVector {
    cvec entries;      // length n_sym, unit modulus
    double nu = 0.0;   // Hz
    double nu_d = 0.0; // LOS/NLOS fixed offset, Hz
};

struct ReceivedFrame {
    cvec r; // length n_sym * n_sub, subcarrier-major
    int scan_index = 0;
    int beam_index = 0;
    double sigma_z = 0.0; // per-sample noise std dev
};

// Columns gamma_i * f_i with f_i = alpha_i / sqrt(N); the gamma vector is
// rescaled so trace(F F^H) == 1.
inline BeamformingMatrix build_beamforming(const std::vector<cvec>& steerings,
                                           const std::vector<double>& gamma) {
    if (steerings.empty() || steerings.size() != gamma.size())
        throw std::invalid_argument("build_beamforming: one gamma per steering vector");
    double g2 = 0.0;
    for (double g : gamma) {
        if (g < 0.0) throw std::domain_error("build_beamforming: gamma must be nonnegative");
        g2 += g * g;
    }
    if (!(g2 > 0.0)) throw std::domain_error("build_beamforming: all-zero gamma");
    const double scale = 1.0 / std::sqrt(g2);

    const std::size_t n = steerings.front().size();
    BeamformingMatrix out;
    out.f = CMatrix(n, steerings.size());
    out.gamma_norm.resize(gamma.size());
    for (std::size_t c = 0; c < steerings.size(); ++c) {
        if (steerings[c].size() != n)
            throw std::invalid_argument("build_beamforming: steering length mismatch");
        const double geff = gamma[c] * scale;
        out.gamma_norm[c] = geff;
        const double col_scale = geff / std::sqrt(static_cast<double>(n));
        for (std::size_t r = 0; r < n; ++r) out.f(r, c) = steerings[c][r] * col_scale;
    }
    return out;
}

// S_q = sqrt(P_q) * F * X_q.
inline CMatrix transmit_frame(double p_q, const CMatrix& f, const CMatrix& x) {
    if (f.cols != x.rows) throw std::invalid_argument("transmit_frame: F, X shape mismatch");
    if (!(p_q >= 0.0)) throw std::domain_error("transmit_frame: negative power");
    CMatrix s(f.rows, x.cols);
    const double a = std::sqrt(p_q);
    for (std::size_t r = 0; r < f.rows; ++r)
        for (std::size_t k = 0; k < f.cols; ++k) {
            const cd frk = f(r, k) * a;
            for (std::size_t c = 0; c < x.cols; ++c) s(r, c) += frk * x(k, c);
        }
    return s;
}

// Entry n = exp(-j 2 pi nu n T_sym), n = 1..n_sym.
inline DopplerVector doppler_vector(double nu, int n_sym, double t_sym) {
    DopplerVector d;
    d.nu = nu;
    d.entries.resize(static_cast<std::size_t>(n_sym));
    for (int n = 1; n <= n_sym; ++n)
        d.entries[n - 1] = std::polar(1.0, -2.0 * kPi * nu * n * t_sym);
    return d;
}

// Per-sample noise standard deviation: sigma_z^2 = k_B T B 10^(NF/10).
inline double noise_sigma(double noise_figure_db, double bandwidth_hz,
                          double temperature_k = 290.0) {
    if (!(bandwidth_hz > 0.0)) throw std::domain_error("noise_sigma: bandwidth must be > 0");
    const double var = kBoltzmann * temperature_k * bandwidth_hz * db_to_linear(noise_figure_db);
    return std::sqrt(var);
}

// Echo description of one target on one subcarrier.
struct EchoChannel {
    cvec h_bs;      // N_BS
    cvec h_ue_los;  // N_UE (zero when blocked)
    cvec h_ue_nlos; // N_UE
};

struct TargetEcho {
    std::vector<EchoChannel> per_q; // length n_sub
    DopplerVector psi_los;
    DopplerVector psi_nlos;
};

// Echo assembly shared by received_frame and the factored fast path.
namespace detail {

inline void add_noise(cvec& r, double sigma_z, RandomStream& rng) {
    if (sigma_z <= 0.0) return;
    for (auto& v : r) v += rng.complex_gaussian(sigma_z * sigma_z);
}

} // namespace detail

// Aggregate the echoes of all targets through both links, add circular
// complex Gaussian noise, and concatenate the per-subcarrier frames:
// r_q[n] = sum_m (psi_los[n] (w^H h_ue_los)(h_bs^H S_q)[n]
//               + psi_nlos[n] (w^H h_ue_nlos)(h_bs^H S_q)[n]) + z_q[n].
inline ReceivedFrame received_frame(const std::vector<TargetEcho>& targets,
                                    const std::vector<CMatrix>& s_q, const cvec& w_ue,
                                    double sigma_z, RandomStream& rng) {
    if (s_q.empty()) throw std::invalid_argument("received_frame: no subcarrier frames");
    const std::size_t n_sub = s_q.size();
    const std::size_t n_sym = s_q.front().cols;
    const std::size_t n_bs = s_q.front().rows;

    ReceivedFrame out;
    out.sigma_z = sigma_z;
    out.r.assign(n_sub * n_sym, cd{0.0, 0.0});

    cvec row(n_sym);
    for (std::size_t q = 0; q < n_sub; ++q) {
        if (s_q[q].rows != n_bs || s_q[q].cols != n_sym)
            throw std::invalid_argument("received_frame: inconsistent S_q shapes");
        cd* rq = &out.r[q * n_sym];
        for (const TargetEcho& tg : targets) {
            if (tg.per_q.size() != n_sub)
                throw std::invalid_argument("received_frame: per-target channels != n_sub");
            const EchoChannel& ch = tg.per_q[q];
            if (ch.h_bs.size() != n_bs || ch.h_ue_los.size() != w_ue.size() ||
                ch.h_ue_nlos.size() != w_ue.size())
                throw std::invalid_argument("received_frame: channel dimension mismatch");
            if (tg.psi_los.entries.size() != n_sym || tg.psi_nlos.entries.size() != n_sym)
                throw std::invalid_argument("received_frame: doppler length mismatch");

            // (h_bs^H S_q): 1 x n_sym
            for (std::size_t n = 0; n < n_sym; ++n) row[n] = cd{0.0, 0.0};
            for (std::size_t e = 0; e < n_bs; ++e) {
                const cd hb = std::conj(ch.h_bs[e]);
                const cd* se = &s_q[q].data[e * n_sym];
                for (std::size_t n = 0; n < n_sym; ++n) row[n] += hb * se[n];
            }
            cd c_los{0.0, 0.0}, c_nlos{0.0, 0.0};
            for (std::size_t e = 0; e < w_ue.size(); ++e) {
                const cd w = std::conj(w_ue[e]);
                c_los += w * ch.h_ue_los[e];
                c_nlos += w * ch.h_ue_nlos[e];
            }
            for (std::size_t n = 0; n < n_sym; ++n)
                rq[n] += tg.psi_los.entries[n] * c_los * row[n] +
                         tg.psi_nlos.entries[n] * c_nlos * row[n];
        }
        if (sigma_z > 0.0)
            for (std::size_t n = 0; n < n_sym; ++n)
                rq[n] += rng.complex_gaussian(sigma_z * sigma_z);
    }
    return out;
}

// Factored form of received_frame: since S_q = sqrt(P) F X_q, the chain
// (h_bs^H S_q)[n] equals sqrt(P) * sum_l (h_bs^H F)_l X_q[l][n], so callers
// can pass the per-target beam-domain gains b_l = h_bs^H F (one complex per
// transmit stream) instead of the full antenna-domain frame. Draws noise in
// the same order as received_frame.
struct TargetEchoFactored {
    // per subcarrier: beam-domain gains (length L+1) and combiner outputs
    std::vector<cvec> b_q;   // n_sub x (L+1), entries (h_bs_q^H F)_l
    cvec c_los_q;            // n_sub, w^H h_ue_los
    cvec c_nlos_q;           // n_sub, w^H h_ue_nlos
    DopplerVector psi_los;
    DopplerVector psi_nlos;
};

inline ReceivedFrame received_frame_factored(const std::vector<TargetEchoFactored>& targets,
                                             double p_q, const CMatrix& x, int n_sub,
                                             double sigma_z, RandomStream& rng) {
    const std::size_t n_sym = x.cols;
    const std::size_t n_streams = x.rows;
    ReceivedFrame out;
    out.sigma_z = sigma_z;
    out.r.assign(static_cast<std::size_t>(n_sub) * n_sym, cd{0.0, 0.0});
    const double amp = std::sqrt(p_q);
    cvec row(n_sym);
    for (int q = 0; q < n_sub; ++q) {
        cd* rq = &out.r[static_cast<std::size_t>(q) * n_sym];
        for (const auto& tg : targets) {
            for (std::size_t n = 0; n < n_sym; ++n) row[n] = cd{0.0, 0.0};
            const cvec& b = tg.b_q[q]; // already h_bs^H F, no further conjugation
            for (std::size_t l = 0; l < n_streams; ++l) {
                const cd bl = b[l] * amp;
                const cd* xl = &x.data[l * n_sym];
                for (std::size_t n = 0; n < n_sym; ++n) row[n] += bl * xl[n];
            }
            const cd c_los = tg.c_los_q[q];
            const cd c_nlos = tg.c_nlos_q[q];
            for (std::size_t n = 0; n < n_sym; ++n)
                rq[n] += tg.psi_los.entries[n] * c_los * row[n] +
                         tg.psi_nlos.entries[n] * c_nlos * row[n];
        }
        if (sigma_z > 0.0)
            for (std::size_t n = 0; n < n_sym; ++n)
                rq[n] += rng.complex_gaussian(sigma_z * sigma_z);
    }
    return out;
}

} // namespace isac::phy
