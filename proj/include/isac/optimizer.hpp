#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "isac/core.hpp"
#include "isac/feedback.hpp"

// Threshold selection: MAP boundaries from fitted per-hypothesis RESI
// distributions, and the simulation-driven log-barrier interior-point loop.
// The optimizer core is objective-agnostic: callers supply P_det(T) as a
// callable (the harness wires in the closed-loop simulation, tests wire in
// analytic surrogates).

namespace isac::optimizer {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct LabeledSample {
    int label = 0; // 0..3 == H0..H3 ground truth
    double resi = 0.0;
};

struct ClassStats {
    double mean = 0.0;
    double stddev = 0.0;
    double prior = 0.0;
    std::size_t count = 0;
    bool low_sample = false; // fewer than 10 samples
};

struct HypothesisFit {
    std::array<ClassStats, 4> cls;
};

struct FitError : std::runtime_error {
    explicit FitError(const std::string& what) : std::runtime_error(what) {}
};

// Per-label sample mean/std and empirical priors from a ground-truth-labeled
// calibration trace.
inline HypothesisFit fit_hypothesis_distributions(const std::vector<LabeledSample>& samples) {
    HypothesisFit fit;
    std::array<std::vector<double>, 4> buckets;
    for (const auto& s : samples) {
        if (s.label < 0 || s.label > 3) throw FitError("label outside H0..H3");
        buckets[s.label].push_back(s.resi);
    }
    const double total = static_cast<double>(samples.size());
    for (int i = 0; i < 4; ++i) {
        auto& b = buckets[i];
        if (b.empty()) throw FitError("empty hypothesis class H" + std::to_string(i));
        double mean = 0.0;
        for (double v : b) mean += v;
        mean /= b.size();
        double var = 0.0;
        for (double v : b) var += (v - mean) * (v - mean);
        var = b.size() > 1 ? var / (b.size() - 1) : 0.0;
        ClassStats& c = fit.cls[i];
        c.mean = mean;
        c.stddev = std::sqrt(var);
        c.count = b.size();
        c.prior = b.size() / total;
        c.low_sample = b.size() < 10;
        if (c.stddev < 1e-9) { // degenerate class; keep the fit usable
            c.stddev = 1e-9;
            c.low_sample = true;
        }
    }
    return fit;
}

struct MapThresholds {
    feedback::ThresholdVector thresholds;
    std::array<bool, 3> midpoint_fallback{}; // per boundary
};

namespace detail {

// Solve p1 N(x|m1,s1) = p2 N(x|m2,s2) for the crossing between the means.
// Returns the boundary and whether the midpoint fallback fired.
inline std::pair<double, bool> gaussian_boundary(const ClassStats& lo, const ClassStats& hi) {
    const double m1 = lo.mean, s1 = lo.stddev, p1 = lo.prior;
    const double m2 = hi.mean, s2 = hi.stddev, p2 = hi.prior;
    const double mid = 0.5 * (m1 + m2);

    const double a = 1.0 / (2.0 * s2 * s2) - 1.0 / (2.0 * s1 * s1);
    const double b = m1 / (s1 * s1) - m2 / (s2 * s2);
    const double c = m2 * m2 / (2.0 * s2 * s2) - m1 * m1 / (2.0 * s1 * s1) -
                     std::log((p2 * s1) / (p1 * s2));

    if (std::abs(a) < 1e-14) { // equal variances: linear equation
        if (std::abs(b) < 1e-300) return {mid, true};
        const double x = -c / b;
        if (x > m1 && x < m2) return {x, false};
        return {mid, true};
    }
    const double disc = b * b - 4.0 * a * c;
    if (disc < 0.0) return {mid, true};
    const double sq = std::sqrt(disc);
    for (double x : {(-b + sq) / (2.0 * a), (-b - sq) / (2.0 * a)})
        if (x > m1 && x < m2) return {x, false};
    return {mid, true};
}

} // namespace detail

// MAP decision boundaries between adjacent classes (ordered by mean).
inline MapThresholds map_thresholds(const HypothesisFit& fit) {
    for (int i = 0; i < 3; ++i)
        if (!(fit.cls[i].mean < fit.cls[i + 1].mean))
            throw std::invalid_argument("map_thresholds: class means must increase with H index");
    std::array<double, 3> eta{};
    std::array<bool, 3> fb{};
    for (int i = 0; i < 3; ++i) {
        auto [x, fell_back] = detail::gaussian_boundary(fit.cls[i], fit.cls[i + 1]);
        eta[i] = x;
        fb[i] = fell_back;
    }
    for (int i = 1; i < 3; ++i)
        if (eta[i] <= eta[i - 1]) eta[i] = eta[i - 1] + 1e-6;
    return {feedback::ThresholdVector(eta[0], eta[1], eta[2]), fb};
}

// ---- interior-point machinery -------------------------------------------
// Thresholds are handled as descending vectors T = [T1 > T2 > ... > Tn],
// matching the paper's ordering (T1 is the detection threshold).

using ThresholdVec = std::vector<double>;
using PdetFn = std::function<double(const ThresholdVec&)>;

inline ThresholdVec descending_from(const feedback::ThresholdVector& t) {
    return {t.eta2, t.eta1, t.eta0};
}
inline feedback::ThresholdVector ascending_from(const ThresholdVec& t) {
    if (t.size() != 3) throw std::invalid_argument("expected 3 thresholds");
    return feedback::ThresholdVector(t[2], t[1], t[0]);
}

inline bool strictly_descending(const ThresholdVec& t) {
    for (std::size_t i = 1; i < t.size(); ++i)
        if (!(t[i - 1] > t[i])) return false;
    return true;
}

// Phi_mu = -P_det - mu * sum_i log(T_i - T_{i+1}); +inf off the feasible set.
inline double barrier_objective(const ThresholdVec& t, double mu, double pdet) {
    double barrier = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i) {
        const double gap = t[i - 1] - t[i];
        if (!(gap > 0.0)) return kInf;
        barrier += std::log(gap);
    }
    return -pdet - mu * barrier;
}

struct GradientError : std::runtime_error {
    explicit GradientError(const std::string& what) : std::runtime_error(what) {}
};

// Central finite differences: component i = [f(T + h e_i) - f(T - h e_i)] / 2h.
// h halves until every perturbed point keeps the strict ordering.
inline ThresholdVec fd_gradient(const std::function<double(const ThresholdVec&)>& objective,
                                const ThresholdVec& t, double h) {
    if (!(h > 0.0)) throw GradientError("fd step must be positive");
    auto all_feasible = [&](double step) {
        for (std::size_t i = 0; i < t.size(); ++i) {
            ThresholdVec up = t, dn = t;
            up[i] += step;
            dn[i] -= step;
            if (!strictly_descending(up) || !strictly_descending(dn)) return false;
        }
        return true;
    };
    while (!all_feasible(h)) {
        h *= 0.5;
        if (h < 1e-9) throw GradientError("fd step underflow while restoring feasibility");
    }
    ThresholdVec g(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        ThresholdVec up = t, dn = t;
        up[i] += h;
        dn[i] -= h;
        g[i] = (objective(up) - objective(dn)) / (2.0 * h);
    }
    return g;
}

struct OptimizerConfig {
    double mu0 = 0.1;
    double tau_decay = 0.5;
    double eps = 1e-3;   // objective-improvement stopping tolerance
    double fd_h = 0.05;  // RESI units
    double t_min = 0.0;
    double t_max = 20.0;
    int max_iterations = 40;
    std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5, 6, 7, 8}; // common random numbers

    void validate() const {
        if (!(mu0 > 0.0)) throw std::invalid_argument("optimizer: mu0 must be > 0");
        if (!(tau_decay > 0.0 && tau_decay < 1.0))
            throw std::invalid_argument("optimizer: tau_decay must lie in (0,1)");
        if (!(fd_h > 0.0)) throw std::invalid_argument("optimizer: fd step must be > 0");
        if (!(t_min < t_max)) throw std::invalid_argument("optimizer: t_min must be < t_max");
        if (max_iterations < 1) throw std::invalid_argument("optimizer: max_iterations >= 1");
    }
};

struct IterationRecord {
    int iteration = 0;
    ThresholdVec t;
    double f = 0.0;   // -P_det
    double phi = 0.0; // barrier objective
    ThresholdVec gradient;
    double alpha = 0.0;
    double mu = 0.0;
    int evaluations = 0; // pdet calls consumed by this iteration
};

struct OptimizationTrace {
    std::vector<IterationRecord> iterations;
    int total_evaluations = 0;
};

struct OptimizeResult {
    ThresholdVec t_best;
    double f_best = 0.0; // -P_det at t_best
    OptimizationTrace trace;
};

// Algorithm-1 loop: evaluate f = -P_det, build Phi_mu, estimate the gradient
// with central differences, take a quasi-Newton (BFGS inverse) step with a
// backtracking Armijo line search that keeps iterates strictly ordered and
// inside [t_min, t_max], decay mu, and stop once the objective improvement
// falls below eps. Returns the best feasible iterate seen.
inline OptimizeResult optimize_thresholds(const OptimizerConfig& cfg, const ThresholdVec& t_init,
                                          const PdetFn& pdet_fn) {
    cfg.validate();
    const std::size_t n = t_init.size();
    if (n < 1) throw std::invalid_argument("optimize_thresholds: empty threshold vector");
    if (!strictly_descending(t_init))
        throw std::invalid_argument("optimize_thresholds: T_init must be strictly descending");
    for (double v : t_init)
        if (v < cfg.t_min || v > cfg.t_max)
            throw std::invalid_argument("optimize_thresholds: T_init outside [t_min, t_max]");

    OptimizeResult out;
    OptimizationTrace& trace = out.trace;

    int evals_this_iter = 0;
    auto pdet = [&](const ThresholdVec& t) {
        ++trace.total_evaluations;
        ++evals_this_iter;
        return pdet_fn(t);
    };

    ThresholdVec t = t_init;
    double mu = cfg.mu0;
    double pdet_cur = pdet(t);
    double f_cur = -pdet_cur;

    out.t_best = t;
    out.f_best = f_cur;

    // BFGS inverse-Hessian approximation, identity-initialized.
    std::vector<double> h_inv(n * n, 0.0);
    auto reset_h = [&] {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) h_inv[i * n + j] = (i == j) ? 1.0 : 0.0;
    };
    reset_h();

    ThresholdVec t_prev, g_prev;
    bool have_prev = false;

    for (int k = 1; k <= cfg.max_iterations; ++k) {
        const double f_before = f_cur;
        evals_this_iter = 0;

        auto phi_of = [&](const ThresholdVec& tt) {
            return barrier_objective(tt, mu, pdet(tt));
        };
        const double phi_cur = barrier_objective(t, mu, pdet_cur);
        const ThresholdVec g = fd_gradient(phi_of, t, cfg.fd_h);

        if (have_prev) {
            // BFGS rank-two update from the last gradient pair.
            ThresholdVec s(n), y(n);
            double sy = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                s[i] = t[i] - t_prev[i];
                y[i] = g[i] - g_prev[i];
                sy += s[i] * y[i];
            }
            if (sy > 1e-12) {
                const double rho = 1.0 / sy;
                std::vector<double> a(n * n, 0.0); // (I - rho s y^T) H
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = h_inv[i * n + j];
                        for (std::size_t m = 0; m < n; ++m)
                            acc -= rho * s[i] * y[m] * h_inv[m * n + j];
                        a[i * n + j] = acc;
                    }
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t j = 0; j < n; ++j) {
                        double acc = a[i * n + j];
                        for (std::size_t m = 0; m < n; ++m)
                            acc -= rho * a[i * n + m] * y[m] * s[j];
                        h_inv[i * n + j] = acc + rho * s[i] * s[j];
                    }
            } else {
                reset_h(); // curvature condition failed
            }
        }
        t_prev = t;
        g_prev = g;
        have_prev = true;

        // d = -H g; fall back to steepest descent if not a descent direction.
        ThresholdVec d(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i] -= h_inv[i * n + j] * g[j];
        double gd = 0.0;
        for (std::size_t i = 0; i < n; ++i) gd += g[i] * d[i];
        if (!(gd < 0.0)) {
            reset_h();
            for (std::size_t i = 0; i < n; ++i) d[i] = -g[i];
            gd = 0.0;
            for (std::size_t i = 0; i < n; ++i) gd -= g[i] * g[i];
        }

        // Backtracking line search with sufficient decrease and feasibility.
        double alpha = 1.0;
        bool moved = false;
        double pdet_new = pdet_cur, phi_new = phi_cur;
        ThresholdVec t_new = t;
        for (int ls = 0; ls < 30; ++ls) {
            ThresholdVec cand(n);
            for (std::size_t i = 0; i < n; ++i)
                cand[i] = std::clamp(t[i] + alpha * d[i], cfg.t_min, cfg.t_max);
            if (strictly_descending(cand)) {
                const double p = pdet(cand);
                const double phi_c = barrier_objective(cand, mu, p);
                if (phi_c <= phi_cur + 1e-4 * alpha * gd) {
                    t_new = cand;
                    pdet_new = p;
                    phi_new = phi_c;
                    moved = true;
                    break;
                }
            }
            alpha *= 0.5;
        }
        if (!moved) alpha = 0.0;

        t = t_new;
        pdet_cur = pdet_new;
        f_cur = -pdet_cur;
        if (f_cur < out.f_best) {
            out.f_best = f_cur;
            out.t_best = t;
        }

        IterationRecord rec;
        rec.iteration = k;
        rec.t = t;
        rec.f = f_cur;
        rec.phi = phi_new;
        rec.gradient = g;
        rec.alpha = alpha;
        rec.mu = mu;
        rec.evaluations = evals_this_iter;
        trace.iterations.push_back(rec);

        mu *= cfg.tau_decay;
        if (f_before - f_cur < cfg.eps) break;
    }
    return out;
}

} // namespace isac::optimizer
