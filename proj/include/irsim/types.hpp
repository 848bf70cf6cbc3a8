#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace irsim {

using Complex = std::complex<double>;
using Rng = std::mt19937_64;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSpeedOfLight = 299792458.0;  // m/s

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Minimal row-major complex matrix, used for training refraction matrices
/// and small linear-algebra scratch work.
struct CMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> data;

    CMatrix() = default;
    CMatrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c) {}

    Complex& at(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    const Complex& at(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

/// Circularly symmetric complex Gaussian draw with the given total variance.
inline Complex draw_circular_gaussian(Rng& rng, double variance) {
    if (variance <= 0.0) {
        return {0.0, 0.0};
    }
    std::normal_distribution<double> g(0.0, std::sqrt(variance / 2.0));
    const double re = g(rng);
    const double im = g(rng);
    return {re, im};
}

}  // namespace irsim
