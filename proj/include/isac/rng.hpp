#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "isac/core.hpp"

namespace isac {

// Deterministic random stream: every draw path is spelled out here (uniform
// mapping, Box-Muller, QPSK alphabet) so seeded runs replay bit-identically.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t raw() { return engine_(); }

    // Uniform in [0, 1).
    double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

    // Standard normal via Box-Muller; draws two uniforms per pair.
    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform(); // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * kPi * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * kPi * u2);
    }

    // Circular complex Gaussian with E|z|^2 = sigma2.
    cd complex_gaussian(double sigma2) {
        const double s = std::sqrt(sigma2 / 2.0);
        const double re = s * normal();
        const double im = s * normal();
        return {re, im};
    }

    // Unit-power QPSK symbol.
    cd qpsk() {
        static const cd alphabet[4] = {
            {M_SQRT1_2, M_SQRT1_2}, {-M_SQRT1_2, M_SQRT1_2},
            {-M_SQRT1_2, -M_SQRT1_2}, {M_SQRT1_2, -M_SQRT1_2}};
        return alphabet[engine_() & 3u];
    }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

} // namespace isac
