#pragma once

#include <span>
#include <vector>

#include "irsim/channel.hpp"
#include "irsim/types.hpp"

namespace irsim {

/// tau x 2 training matrix with rows [1, mu_i]; only the unit-modulus common
/// phase shifts mu_i are stored.
struct TrainingMatrix {
    std::vector<Complex> mu;
    int tau() const { return static_cast<int>(mu.size()); }
};

/// First two columns of the tau x tau DFT matrix: mu_i = exp(-j*2*pi*i/tau).
TrainingMatrix dft_training_matrix(int tau);

struct BlockEstimate {
    Complex h_d_hat;
    Complex h_r_bar_hat;
    int block_index = 0;
};

/// Least-squares solve of y_i = h_d + mu_i * h_r_bar + z_i. Throws if the
/// training matrix is rank deficient.
BlockEstimate ls_estimate(std::span<const Complex> y, const TrainingMatrix& theta,
                          int block_index = 0);

/// Direct-channel estimate from pilots received with the surface off.
Complex average_estimate(std::span<const Complex> y);

/// Search grid for the joint Doppler/steering-phase estimator. Coarse steps
/// are shrunk refinement_levels times by refinement_shrink around the best
/// point found so far.
struct GridSpec {
    double fd_min_hz = 0.0;
    double fd_max_hz = 0.0;
    double fd_coarse_step_hz = 0.0;
    double psi_coarse_step = 0.0;
    int refinement_levels = 3;
    double refinement_shrink = 0.1;
};

struct MlEstimate {
    double fd_hat_hz = 0.0;
    SteeringPhase psi_x_hat;
    Complex beta_hat;
    /// Set when all training refraction rows coincide; the Doppler/phase pair
    /// is then ambiguous and the reported psi is arbitrary.
    bool degenerate_training = false;
    /// Grid steps after the last refinement level (estimation resolution).
    double final_fd_step_hz = 0.0;
    double final_psi_step = 0.0;
};

/// Profile likelihood of the per-block refracted-channel estimates under the
/// candidate (fd, psi): squared projection |xi^H h|^2 / (xi^H xi) with
/// xi_n = exp(j*2*pi*fd*n*Tc) * sum_m V[n,m] * conj(s_m(psi)).
double ml_objective(double fd_hz, SteeringPhase psi, std::span<const Complex> h_r_bar_hats,
                    const CMatrix& v_bar, double tc_s);

/// Coarse-to-fine 2D grid maximization of ml_objective, with the path-gain
/// estimate recovered by projection at the best grid point. Ties resolve to
/// the lowest (fd, then psi) grid index.
MlEstimate ml_estimate(std::span<const Complex> h_r_bar_hats, const CMatrix& v_bar, double tc_s,
                       const GridSpec& grid);

/// Per-element refraction pattern used by the full cascaded estimator for
/// pilot i: entries 1..M_R of row i of the (M_R+1)-point DFT matrix.
std::vector<Complex> ccce_training_refraction(int m_r, int pilot_index);

struct CcceEstimate {
    Complex h_d_hat;
    std::vector<Complex> c_hat;  // per-element cascaded response coefficients
};

/// Least-squares inversion of the full DFT training: pilots must number
/// exactly m_r + 1, pilot i having used ccce_training_refraction(m_r, i).
CcceEstimate ccce_estimate(std::span<const Complex> y, int m_r);

}  // namespace irsim
