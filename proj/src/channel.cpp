#include "irsim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace irsim {

SteeringPhase canonical_steering_phase(double raw) {
    double v = std::fmod(raw + 1.0, 2.0);
    if (v < 0.0) {
        v += 2.0;
    }
    return SteeringPhase{v - 1.0};
}

void LinkGeometry::validate() const {
    if (!(distance_m > 0.0)) {
        throw std::invalid_argument("LinkGeometry: distance_m must be > 0");
    }
    if (!(reference_gain_xi0 > 0.0)) {
        throw std::invalid_argument("LinkGeometry: reference_gain_xi0 must be > 0");
    }
    if (!(elevation_rad >= -kPi / 2 && elevation_rad <= kPi / 2)) {
        throw std::invalid_argument("LinkGeometry: elevation_rad outside [-pi/2, pi/2]");
    }
    if (!(azimuth_rad >= 0.0 && azimuth_rad < 2.0 * kPi)) {
        throw std::invalid_argument("LinkGeometry: azimuth_rad outside [0, 2*pi)");
    }
}

RefractionVector RefractionVector::off(int elements) {
    return RefractionVector(std::vector<Complex>(static_cast<size_t>(elements), Complex{0.0, 0.0}),
                            true);
}

RefractionVector RefractionVector::random_phases(int elements, Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    std::vector<Complex> c(static_cast<size_t>(elements));
    for (auto& x : c) {
        const double w = u(rng);
        x = Complex{std::cos(w), std::sin(w)};
    }
    return RefractionVector(std::move(c), false);
}

RefractionVector RefractionVector::from_coefficients(std::vector<Complex> coefficients) {
    constexpr double tol = 1e-9;
    bool all_zero = true;
    bool all_unit = true;
    for (const auto& x : coefficients) {
        const double a = std::abs(x);
        all_zero = all_zero && a == 0.0;
        all_unit = all_unit && std::abs(a - 1.0) <= tol;
    }
    if (!all_zero && !all_unit) {
        throw std::invalid_argument(
            "RefractionVector: coefficients must be all unit-modulus or all zero");
    }
    return RefractionVector(std::move(coefficients), all_zero && !coefficients.empty());
}

RefractionVector RefractionVector::scaled(Complex unit_factor) const {
    std::vector<Complex> c(coefficients_.begin(), coefficients_.end());
    for (auto& x : c) {
        x *= unit_factor;
    }
    return RefractionVector(std::move(c), off_);
}

std::vector<Complex> steering_vector(SteeringPhase phi, int m) {
    if (m < 1) {
        throw std::invalid_argument("steering_vector: element count must be >= 1");
    }
    std::vector<Complex> s(static_cast<size_t>(m));
    for (int k = 0; k < m; ++k) {
        const double arg = -static_cast<double>(k) * kPi * phi.value;
        s[static_cast<size_t>(k)] = Complex{std::cos(arg), std::sin(arg)};
    }
    return s;
}

std::vector<Complex> array_response(double elevation_rad, double azimuth_rad, int mx, int my,
                                    double spacing_over_lambda) {
    if (mx < 1 || my < 1) {
        throw std::invalid_argument("array_response: element counts must be >= 1");
    }
    const double common = 2.0 * spacing_over_lambda * std::cos(elevation_rad);
    const SteeringPhase phi{common * std::cos(azimuth_rad)};
    const SteeringPhase varphi{common * std::sin(azimuth_rad)};
    const auto sx = steering_vector(phi, mx);
    const auto sy = steering_vector(varphi, my);
    std::vector<Complex> u(static_cast<size_t>(mx) * my);
    for (int i = 0; i < mx; ++i) {
        for (int j = 0; j < my; ++j) {
            u[static_cast<size_t>(i) * my + j] = sx[static_cast<size_t>(i)] * sy[static_cast<size_t>(j)];
        }
    }
    return u;
}

double doppler_frequency(double speed_mps, double elevation_rad, double azimuth_rad,
                         double wavelength_m) {
    if (!(wavelength_m > 0.0)) {
        throw std::invalid_argument("doppler_frequency: wavelength must be > 0");
    }
    return speed_mps * std::cos(elevation_rad) * std::cos(azimuth_rad) / wavelength_m;
}

Complex sample_path_gain(const LinkGeometry& geometry, Rng& rng) {
    geometry.validate();
    const double magnitude = std::sqrt(geometry.reference_gain_xi0 *
                                       std::pow(geometry.distance_m, -geometry.path_loss_exponent));
    std::uniform_real_distribution<double> u(0.0, 2.0 * kPi);
    const double phase = u(rng);
    return magnitude * Complex{std::cos(phase), std::sin(phase)};
}

CascadedChannelParams cascaded_params(const LinkGeometry& bs_irs, const LinkGeometry& irs_user,
                                      double speed_mps, double wavelength_m,
                                      double spacing_over_lambda, Rng& rng) {
    bs_irs.validate();
    irs_user.validate();
    const Complex alpha_bi = sample_path_gain(bs_irs, rng);
    const Complex alpha_iu = sample_path_gain(irs_user, rng);
    const double fd =
        doppler_frequency(speed_mps, bs_irs.elevation_rad, bs_irs.azimuth_rad, wavelength_m);
    const double phi_bi =
        2.0 * spacing_over_lambda * std::cos(bs_irs.elevation_rad) * std::cos(bs_irs.azimuth_rad);
    const double phi_iu = 2.0 * spacing_over_lambda * std::cos(irs_user.elevation_rad) *
                          std::cos(irs_user.azimuth_rad);
    return CascadedChannelParams{alpha_bi * alpha_iu, fd,
                                 canonical_steering_phase(phi_iu - phi_bi)};
}

std::vector<Complex> cascaded_channel(const CascadedChannelParams& params, int block_index,
                                      double tc_s, int mx) {
    if (block_index < 1) {
        throw std::invalid_argument("cascaded_channel: block index must be >= 1");
    }
    const double arg = 2.0 * kPi * params.doppler_fd_hz * block_index * tc_s;
    const Complex rotated = params.beta * Complex{std::cos(arg), std::sin(arg)};
    // Stored as conj(rotated) * s(psi_x) so that c^H v gives the refracted response.
    const Complex scale = std::conj(rotated);
    auto c = steering_vector(params.psi_x, mx);
    for (auto& x : c) {
        x *= scale;
    }
    return c;
}

namespace {

// Pivoted Cholesky of a symmetric positive semidefinite matrix. Returns a
// rank-revealing factor F (n x rank, row-major in `factor`) with C ~= F F^T;
// pivoting keeps the factorization stable when the covariance is conditioned
// beyond double precision, and the stop rule truncates once every remaining
// residual diagonal is negligible.
int pivoted_cholesky(const std::vector<double>& c, int n, std::vector<double>& factor) {
    factor.assign(static_cast<size_t>(n) * n, 0.0);
    std::vector<double> residual_diag(static_cast<size_t>(n));
    std::vector<int> perm(static_cast<size_t>(n));
    double max_diag = 0.0;
    for (int i = 0; i < n; ++i) {
        residual_diag[static_cast<size_t>(i)] = c[static_cast<size_t>(i) * n + i];
        perm[static_cast<size_t>(i)] = i;
        max_diag = std::max(max_diag, residual_diag[static_cast<size_t>(i)]);
    }
    const double tol = 1e-14 * std::max(max_diag, 1e-300);

    int rank = 0;
    for (int k = 0; k < n; ++k) {
        int best = k;
        for (int j = k + 1; j < n; ++j) {
            if (residual_diag[static_cast<size_t>(perm[static_cast<size_t>(j)])] >
                residual_diag[static_cast<size_t>(perm[static_cast<size_t>(best)])]) {
                best = j;
            }
        }
        std::swap(perm[static_cast<size_t>(k)], perm[static_cast<size_t>(best)]);
        const int pk = perm[static_cast<size_t>(k)];
        const double dk = residual_diag[static_cast<size_t>(pk)];
        if (dk <= tol) {
            break;
        }
        const double lkk = std::sqrt(dk);
        factor[static_cast<size_t>(pk) * n + k] = lkk;
        for (int j = k + 1; j < n; ++j) {
            const int pj = perm[static_cast<size_t>(j)];
            double v = c[static_cast<size_t>(pj) * n + pk];
            for (int m = 0; m < k; ++m) {
                v -= factor[static_cast<size_t>(pj) * n + m] *
                     factor[static_cast<size_t>(pk) * n + m];
            }
            const double l = v / lkk;
            factor[static_cast<size_t>(pj) * n + k] = l;
            residual_diag[static_cast<size_t>(pj)] =
                std::max(0.0, residual_diag[static_cast<size_t>(pj)] - l * l);
        }
        rank = k + 1;
    }
    return rank;
}

}  // namespace

std::vector<Complex> sample_direct_channel_sequence(int n_blocks, double tc_s, double f_max_hz,
                                                    double mean_power, Rng& rng) {
    if (n_blocks < 1) {
        throw std::invalid_argument("sample_direct_channel_sequence: need at least one block");
    }
    if (!(mean_power > 0.0)) {
        throw std::invalid_argument("sample_direct_channel_sequence: mean_power must be > 0");
    }
    const auto n = static_cast<size_t>(n_blocks);

    // Target Toeplitz covariance, R(k) = mean_power * J0(2*pi*f_max*k*Tc).
    std::vector<double> r(n);
    for (size_t k = 0; k < n; ++k) {
        r[k] = mean_power * std::cyl_bessel_j(0.0, std::abs(2.0 * kPi * f_max_hz *
                                                            static_cast<double>(k) * tc_s));
    }
    std::vector<double> cov(n * n);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            cov[i * n + j] = r[i >= j ? i - j : j - i];
        }
    }
    std::vector<double> factor;
    const int rank = pivoted_cholesky(cov, n_blocks, factor);

    std::vector<Complex> z(static_cast<size_t>(rank));
    for (auto& x : z) {
        x = draw_circular_gaussian(rng, 1.0);
    }
    std::vector<Complex> h(n, Complex{0.0, 0.0});
    for (size_t i = 0; i < n; ++i) {
        Complex acc{0.0, 0.0};
        for (int k = 0; k < rank; ++k) {
            acc += factor[i * n + static_cast<size_t>(k)] * z[static_cast<size_t>(k)];
        }
        h[i] = acc;
    }
    return h;
}

Complex effective_channel(std::span<const Complex> c_n, const RefractionVector& v, Complex h_d) {
    if (static_cast<int>(c_n.size()) != v.size()) {
        throw std::invalid_argument("effective_channel: channel/refraction length mismatch");
    }
    Complex acc = h_d;
    const auto coeffs = v.coefficients();
    for (size_t m = 0; m < c_n.size(); ++m) {
        acc += std::conj(c_n[m]) * coeffs[m];
    }
    return acc;
}

}  // namespace irsim
