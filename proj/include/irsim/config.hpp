#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "irsim/channel.hpp"
#include "irsim/estimation.hpp"
#include "irsim/types.hpp"

namespace irsim {

/// Configuration error carrying the offending key name(s) in the message.
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// All physical, geometric, protocol, and experiment parameters. Defaults are
/// the reference simulation setup; see README.md for the key list.
struct SystemConfig {
    double carrier_frequency_hz = 5.9e9;
    double bandwidth_hz = 5.0e5;
    double speed_mps = 50.0;
    int blocks_n = 30;
    int stage1_blocks_n1 = 5;
    int symbols_per_block_q = 100;
    int pilots_tau = 2;
    int irs_mx = 50;
    int irs_my = 1;  // fixed to 1; larger panels are out of scope
    double element_spacing_over_lambda = 0.5;
    double distance_bs_irs_m = 500.0;
    double distance_bs_user_m = 500.0;
    double distance_irs_user_m = 1.5;
    double pathloss_exponent_bu = 3.0;
    double pathloss_exponent_bi = 2.3;
    double pathloss_exponent_iu = 2.2;
    double xi0_linear = 1e-3;  // reference power gain at 1 m (-30 dB)
    double theta_bi_rad = 60.0 * kPi / 180.0;
    double vartheta_bi_rad = 0.0;
    double theta_iu_rad = -45.0 * kPi / 180.0;
    double vartheta_iu_rad = 0.0;
    double transmit_power_dbm = 41.0;
    double noise_power_dbm = -110.0;
    double gamma_gap_db = 9.0;

    // Search grid for the joint estimator; zeros mean "derive from the
    // physical setup" (range +-f_max, steps 1/(10*N*Tc) and 2/(10*Mx)).
    double grid_fd_min_hz = 0.0;
    double grid_fd_max_hz = 0.0;
    double grid_fd_coarse_step_hz = 0.0;
    double grid_psi_coarse_step = 0.0;
    int grid_refinement_levels = 3;
    double grid_refinement_shrink = 0.1;

    int trials = 500;
    std::uint64_t master_seed = 1;

    /// True when the trials key was given explicitly (file or CLI); named
    /// experiments apply their own default trial counts otherwise.
    bool trials_explicit = false;

    double wavelength_m() const { return kSpeedOfLight / carrier_frequency_hz; }
    double f_max_hz() const { return speed_mps * carrier_frequency_hz / kSpeedOfLight; }
    double block_duration_s() const { return 1.0 / (5.0 * f_max_hz()); }
    double symbol_duration_s() const { return block_duration_s() / symbols_per_block_q; }
    /// Noise power normalized to unit transmit power.
    double sigma2() const { return db_to_linear(noise_power_dbm - transmit_power_dbm); }
    double gamma_linear() const { return db_to_linear(gamma_gap_db); }
    double direct_mean_power() const {
        return xi0_linear * std::pow(distance_bs_user_m, -pathloss_exponent_bu);
    }

    LinkGeometry bs_irs_geometry() const;
    LinkGeometry irs_user_geometry() const;
    GridSpec grid_spec() const;

    /// Throws ConfigError naming the violated key(s).
    void validate() const;
};

/// Parses a flat key-value text file (one `key = value` per line, `#`
/// comments). Missing keys keep their defaults; unknown keys are rejected.
SystemConfig load_config(const std::filesystem::path& path);

/// Writes the fully resolved configuration in load_config() syntax, so a run
/// manifest can be replayed directly.
void save_config(const SystemConfig& config, const std::filesystem::path& path,
                 const std::string& header_comment = {});

/// Ground truth for one frame drawn from the configured geometry.
FrameChannel synthesize_frame_channel(const SystemConfig& config, Rng& rng);

}  // namespace irsim
