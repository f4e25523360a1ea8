#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace isac {

using cd = std::complex<double>;
using cvec = std::vector<cd>;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;    // m/s
inline constexpr double kBoltzmann = 1.380649e-23;      // J/K

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// dBm <-> watts
inline double dbm_to_watts(double dbm) { return 1e-3 * db_to_linear(dbm); }
inline double watts_to_dbm(double w) { return linear_to_db(w / 1e-3); }

// Minimal dense complex matrix, row-major.
struct CMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    cvec data;

    CMatrix() = default;
    CMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

    cd& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const cd& operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

// FNV-1a, used for config fingerprints in trace metadata.
inline std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    return h;
}

} // namespace isac
