#pragma once

#include <span>
#include <vector>

#include "irsim/types.hpp"

namespace irsim {

/// Inter-element phase difference normalized to pi. Canonical representatives
/// live in [-1, 1]; steering vectors are periodic in this value with period 2.
struct SteeringPhase {
    double value = 0.0;
};

/// Maps an arbitrary normalized phase onto its canonical representative in [-1, 1].
SteeringPhase canonical_steering_phase(double raw);

struct LinkGeometry {
    double elevation_rad = 0.0;  // in [-pi/2, pi/2]
    double azimuth_rad = 0.0;    // in [0, 2*pi)
    double distance_m = 1.0;
    double path_loss_exponent = 2.0;
    double reference_gain_xi0 = 1.0;  // linear power gain at 1 m

    void validate() const;  // throws std::invalid_argument naming the offending field
};

/// Cascaded source-surface-user channel reduced to three parameters: product
/// path gain, Doppler frequency of the moving link, and the effective
/// steering phase along the array axis.
struct CascadedChannelParams {
    Complex beta;
    double doppler_fd_hz = 0.0;
    SteeringPhase psi_x;
};

/// Ground truth for one frame: cascaded parameters held fixed over the frame
/// plus the per-block direct-channel sequence.
struct FrameChannel {
    CascadedChannelParams cascaded;
    std::vector<Complex> direct;  // one entry per block, 1-based block n at index n-1
    double block_duration_s = 0.0;
};

/// Per-element surface coefficients. Either every coefficient has unit
/// modulus (active) or every coefficient is zero (surface off).
class RefractionVector {
  public:
    static RefractionVector off(int elements);
    /// Unit-modulus coefficients with phases drawn uniformly from [0, 2*pi).
    static RefractionVector random_phases(int elements, Rng& rng);
    /// Validates the all-unit-modulus-or-all-zero invariant.
    static RefractionVector from_coefficients(std::vector<Complex> coefficients);

    /// Multiplies every coefficient by a common unit-modulus factor.
    RefractionVector scaled(Complex unit_factor) const;

    bool is_off() const { return off_; }
    int size() const { return static_cast<int>(coefficients_.size()); }
    std::span<const Complex> coefficients() const { return coefficients_; }

  private:
    RefractionVector(std::vector<Complex> c, bool off) : coefficients_(std::move(c)), off_(off) {}
    std::vector<Complex> coefficients_;
    bool off_ = false;
};

/// s(phi, M): entry m equals exp(-j*m*pi*phi), m = 0..M-1.
std::vector<Complex> steering_vector(SteeringPhase phi, int m);

/// Planar-array response: Kronecker product of the x- and y-axis steering
/// vectors at the spatial frequencies implied by the arrival direction.
std::vector<Complex> array_response(double elevation_rad, double azimuth_rad, int mx, int my,
                                    double spacing_over_lambda);

double doppler_frequency(double speed_mps, double elevation_rad, double azimuth_rad,
                         double wavelength_m);

/// Path gain with deterministic magnitude sqrt(xi0 * d^-exponent) and a phase
/// drawn uniformly from [0, 2*pi), fixed for the frame being synthesized.
Complex sample_path_gain(const LinkGeometry& geometry, Rng& rng);

/// Reduces the two line-of-sight links to cascaded channel parameters.
/// Assumes a single row of elements along the x axis (My = 1).
CascadedChannelParams cascaded_params(const LinkGeometry& bs_irs, const LinkGeometry& irs_user,
                                      double speed_mps, double wavelength_m,
                                      double spacing_over_lambda, Rng& rng);

/// Cascaded channel vector for block n (n >= 1). Stored conjugated, so that
/// the Hermitian inner product with a refraction vector v yields the refracted
/// response  beta * exp(j*2*pi*fd*n*Tc) * sum_m exp(j*m*pi*psi_x) * v_m,
/// which is the composition effective_channel() evaluates.
std::vector<Complex> cascaded_channel(const CascadedChannelParams& params, int block_index,
                                      double tc_s, int mx);

/// Zero-mean circularly symmetric Gaussian sequence whose autocorrelation at
/// lag k equals mean_power * J0(2*pi*f_max*k*Tc) (classic Doppler spectrum of
/// an isotropically scattered mobile channel). Sampled exactly on the N-block
/// grid through an LDL^T factor of the target covariance.
std::vector<Complex> sample_direct_channel_sequence(int n_blocks, double tc_s, double f_max_hz,
                                                    double mean_power, Rng& rng);

/// Combined channel c^H v + h_d seen by the user for one block.
Complex effective_channel(std::span<const Complex> c_n, const RefractionVector& v, Complex h_d);

}  // namespace irsim
