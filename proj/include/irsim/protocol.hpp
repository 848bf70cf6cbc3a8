#pragma once

#include <optional>
#include <string>
#include <vector>

#include "irsim/channel.hpp"
#include "irsim/config.hpp"
#include "irsim/estimation.hpp"

namespace irsim {

enum class Scheme {
    kProposed,
    kProposedNoCpa,   // Doppler compensation and beamforming without phase alignment
    kRandomRefraction,
    kCcce,            // per-block full cascaded channel estimation
};

const char* scheme_name(Scheme scheme);
Scheme parse_scheme(const std::string& name);

enum class Stage { kOne, kTwo };

struct BlockMetrics {
    int block_index = 0;   // 1-based
    double gain_w = 0.0;   // |combined channel|^2 with the refraction actually used
    double snr_gamma = 0.0;
    Stage stage = Stage::kOne;
};

struct FrameMetrics {
    std::vector<BlockMetrics> blocks;
    int stage1_blocks = 0;  // blocks attributed to the estimation stage
    double rate_stage1 = 0.0;
    double rate_stage2 = 0.0;
    double rate_overall = 0.0;
    std::optional<MlEstimate> ml;
};

struct Stage1Result {
    BlockEstimate estimate;
    RefractionVector data_refraction;
    BlockMetrics metrics;
};

/// One estimation-stage block: noisy pilots under the common-phase training,
/// LS estimation, then data refraction chosen as the training option whose
/// estimated combined channel is strongest (ties keep the lowest index).
/// The reported gain uses the true channel with the chosen refraction.
Stage1Result stage1_block(const FrameChannel& frame, int block_index,
                          const RefractionVector& v_bar, const TrainingMatrix& theta,
                          double sigma2, Rng& rng);

/// Beamforming-stage refraction: compensates the Doppler rotation and the
/// cascaded gain phase, then rotates onto the direct channel's phase. Pass
/// angle_hd_hat = 0 to skip the phase-alignment term.
RefractionVector stage2_refraction(const MlEstimate& ml, double angle_hd_hat, int block_index,
                                   double tc_s, int mx);

/// Full-estimation benchmark's data refraction: aligns every per-element
/// cascaded contribution with the estimated direct channel's phase.
RefractionVector ccce_alignment_refraction(Complex h_d_hat, std::span<const Complex> c_hat);

/// Per-stage achievable rate: pilot overhead factor times the mean
/// log2(1 + W/(Gamma*sigma2)) over the stage's blocks. Empty stages rate 0;
/// the overhead factor clamps at zero when pilots fill the block.
double achievable_rate(std::span<const double> gains, int q, int tau, double gamma_linear,
                       double sigma2);

FrameMetrics run_frame(const SystemConfig& config, Scheme scheme, const FrameChannel& frame,
                       Rng& rng);

/// Convenience overload that synthesizes the frame channel from the same stream.
FrameMetrics run_frame(const SystemConfig& config, Scheme scheme, Rng& rng);

}  // namespace irsim
