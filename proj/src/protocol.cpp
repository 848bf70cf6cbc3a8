#include "irsim/protocol.hpp"

#include <cmath>
#include <stdexcept>

namespace irsim {

const char* scheme_name(Scheme scheme) {
    switch (scheme) {
        case Scheme::kProposed:
            return "proposed";
        case Scheme::kProposedNoCpa:
            return "proposed_no_cpa";
        case Scheme::kRandomRefraction:
            return "rr";
        case Scheme::kCcce:
            return "ccce";
    }
    return "unknown";
}

Scheme parse_scheme(const std::string& name) {
    if (name == "proposed") return Scheme::kProposed;
    if (name == "proposed_no_cpa") return Scheme::kProposedNoCpa;
    if (name == "rr") return Scheme::kRandomRefraction;
    if (name == "ccce") return Scheme::kCcce;
    throw std::invalid_argument("unknown scheme name: " + name);
}

Stage1Result stage1_block(const FrameChannel& frame, int block_index,
                          const RefractionVector& v_bar, const TrainingMatrix& theta,
                          double sigma2, Rng& rng) {
    if (block_index < 1 || block_index > static_cast<int>(frame.direct.size())) {
        throw std::invalid_argument("stage1_block: block index outside the frame");
    }
    const int mx = v_bar.size();
    const double tc = frame.block_duration_s;
    const auto c = cascaded_channel(frame.cascaded, block_index, tc, mx);
    const Complex h_d = frame.direct[static_cast<size_t>(block_index - 1)];
    const Complex h_r_bar = effective_channel(c, v_bar, Complex{0.0, 0.0});

    const int tau = theta.tau();
    std::vector<Complex> y(static_cast<size_t>(tau));
    for (int i = 0; i < tau; ++i) {
        y[static_cast<size_t>(i)] = theta.mu[static_cast<size_t>(i)] * h_r_bar + h_d +
                                    draw_circular_gaussian(rng, sigma2);
    }
    Stage1Result result{ls_estimate(y, theta, block_index), RefractionVector::off(mx), {}};

    // Candidate refractions are the training options themselves; pick the one
    // whose estimated combined channel is strongest.
    int best = 0;
    double best_power = -1.0;
    for (int i = 0; i < tau; ++i) {
        const double p =
            std::abs(result.estimate.h_d_hat +
                     theta.mu[static_cast<size_t>(i)] * result.estimate.h_r_bar_hat);
        if (p > best_power) {
            best_power = p;
            best = i;
        }
    }
    result.data_refraction = v_bar.scaled(theta.mu[static_cast<size_t>(best)]);

    const double gain = std::norm(effective_channel(c, result.data_refraction, h_d));
    result.metrics = BlockMetrics{block_index, gain, gain / sigma2, Stage::kOne};
    return result;
}

RefractionVector stage2_refraction(const MlEstimate& ml, double angle_hd_hat, int block_index,
                                   double tc_s, int mx) {
    const double arg =
        -(2.0 * kPi * ml.fd_hat_hz * block_index * tc_s + std::arg(ml.beta_hat) - angle_hd_hat);
    const Complex common{std::cos(arg), std::sin(arg)};
    auto coeffs = steering_vector(ml.psi_x_hat, mx);
    for (auto& x : coeffs) {
        x *= common;
    }
    return RefractionVector::from_coefficients(std::move(coeffs));
}

RefractionVector ccce_alignment_refraction(Complex h_d_hat, std::span<const Complex> c_hat) {
    std::vector<Complex> coeffs(c_hat.size());
    const double target = std::arg(h_d_hat);
    for (size_t m = 0; m < c_hat.size(); ++m) {
        const double w = target - std::arg(c_hat[m]);
        coeffs[m] = Complex{std::cos(w), std::sin(w)};
    }
    return RefractionVector::from_coefficients(std::move(coeffs));
}

double achievable_rate(std::span<const double> gains, int q, int tau, double gamma_linear,
                       double sigma2) {
    if (gains.empty()) {
        return 0.0;
    }
    const double data_fraction = std::max(0, q - tau) / static_cast<double>(q);
    double sum = 0.0;
    for (const double w : gains) {
        sum += std::log2(1.0 + w / (gamma_linear * sigma2));
    }
    return data_fraction * sum / static_cast<double>(gains.size());
}

namespace {

FrameMetrics finalize(std::vector<BlockMetrics> blocks, int n1, int n_blocks,
                      std::vector<double> gains1, std::vector<double> gains2, int q, int tau1,
                      int tau2, double gamma, double sigma2, std::optional<MlEstimate> ml) {
    FrameMetrics metrics;
    metrics.blocks = std::move(blocks);
    metrics.stage1_blocks = n1;
    metrics.rate_stage1 = achievable_rate(gains1, q, tau1, gamma, sigma2);
    metrics.rate_stage2 = achievable_rate(gains2, q, tau2, gamma, sigma2);
    const double w1 = static_cast<double>(n1) / n_blocks;
    const double w2 = static_cast<double>(n_blocks - n1) / n_blocks;
    metrics.rate_overall = w1 * metrics.rate_stage1 + w2 * metrics.rate_stage2;
    metrics.ml = std::move(ml);
    return metrics;
}

FrameMetrics run_two_stage(const SystemConfig& config, Scheme scheme, const FrameChannel& frame,
                           Rng& rng) {
    const bool is_rr = scheme == Scheme::kRandomRefraction;
    const int n_blocks = config.blocks_n;
    const int n1 = is_rr ? n_blocks : config.stage1_blocks_n1;
    const int mx = config.irs_mx;
    const double sigma2 = config.sigma2();
    const double tc = config.block_duration_s();
    const auto theta = dft_training_matrix(config.pilots_tau);

    std::vector<BlockMetrics> blocks;
    blocks.reserve(static_cast<size_t>(n_blocks));
    std::vector<double> gains1;
    gains1.reserve(static_cast<size_t>(n1));
    std::vector<Complex> h_r_bar_hats;
    CMatrix v_bar_rows(n1, mx);

    for (int n = 1; n <= n1; ++n) {
        const auto v_bar = RefractionVector::random_phases(mx, rng);
        const auto res = stage1_block(frame, n, v_bar, theta, sigma2, rng);
        blocks.push_back(res.metrics);
        gains1.push_back(res.metrics.gain_w);
        h_r_bar_hats.push_back(res.estimate.h_r_bar_hat);
        const auto coeffs = v_bar.coefficients();
        for (int m = 0; m < mx; ++m) {
            v_bar_rows.at(n - 1, m) = coeffs[static_cast<size_t>(m)];
        }
    }

    std::optional<MlEstimate> ml;
    std::vector<double> gains2;
    if (!is_rr) {
        ml = ml_estimate(h_r_bar_hats, v_bar_rows, tc, config.grid_spec());
        gains2.reserve(static_cast<size_t>(n_blocks - n1));
        std::vector<Complex> pilots(static_cast<size_t>(config.pilots_tau));
        for (int n = n1 + 1; n <= n_blocks; ++n) {
            // Direct-channel pilots with the surface off.
            const Complex h_d = frame.direct[static_cast<size_t>(n - 1)];
            for (auto& p : pilots) {
                p = h_d + draw_circular_gaussian(rng, sigma2);
            }
            const Complex h_d_hat = average_estimate(pilots);
            const double angle =
                scheme == Scheme::kProposed ? std::arg(h_d_hat) : 0.0;
            const auto v = stage2_refraction(*ml, angle, n, tc, mx);
            const auto c = cascaded_channel(frame.cascaded, n, tc, mx);
            const double gain = std::norm(effective_channel(c, v, h_d));
            blocks.push_back(BlockMetrics{n, gain, gain / sigma2, Stage::kTwo});
            gains2.push_back(gain);
        }
    }

    return finalize(std::move(blocks), n1, n_blocks, std::move(gains1), std::move(gains2),
                    config.symbols_per_block_q, config.pilots_tau, config.pilots_tau,
                    config.gamma_linear(), sigma2, std::move(ml));
}

FrameMetrics run_ccce(const SystemConfig& config, const FrameChannel& frame, Rng& rng) {
    const int n_blocks = config.blocks_n;
    const int m_r = config.irs_mx;
    const int tau = m_r + 1;
    const double sigma2 = config.sigma2();
    const double tc = config.block_duration_s();

    std::vector<RefractionVector> training;
    training.reserve(static_cast<size_t>(tau));
    for (int i = 0; i < tau; ++i) {
        training.push_back(RefractionVector::from_coefficients(ccce_training_refraction(m_r, i)));
    }

    std::vector<BlockMetrics> blocks;
    blocks.reserve(static_cast<size_t>(n_blocks));
    std::vector<double> gains;
    gains.reserve(static_cast<size_t>(n_blocks));
    std::vector<Complex> y(static_cast<size_t>(tau));
    for (int n = 1; n <= n_blocks; ++n) {
        const auto c = cascaded_channel(frame.cascaded, n, tc, m_r);
        const Complex h_d = frame.direct[static_cast<size_t>(n - 1)];
        for (int i = 0; i < tau; ++i) {
            y[static_cast<size_t>(i)] = effective_channel(c, training[static_cast<size_t>(i)], h_d) +
                                        draw_circular_gaussian(rng, sigma2);
        }
        const auto est = ccce_estimate(y, m_r);
        const auto v = ccce_alignment_refraction(est.h_d_hat, est.c_hat);
        const double gain = std::norm(effective_channel(c, v, h_d));
        blocks.push_back(BlockMetrics{n, gain, gain / sigma2, Stage::kOne});
        gains.push_back(gain);
    }

    return finalize(std::move(blocks), n_blocks, n_blocks, std::move(gains), {},
                    config.symbols_per_block_q, tau, tau, config.gamma_linear(), sigma2,
                    std::nullopt);
}

}  // namespace

FrameMetrics run_frame(const SystemConfig& config, Scheme scheme, const FrameChannel& frame,
                       Rng& rng) {
    config.validate();
    if (static_cast<int>(frame.direct.size()) != config.blocks_n) {
        throw std::invalid_argument("run_frame: frame block count does not match configuration");
    }
    if (scheme == Scheme::kCcce) {
        return run_ccce(config, frame, rng);
    }
    return run_two_stage(config, scheme, frame, rng);
}

FrameMetrics run_frame(const SystemConfig& config, Scheme scheme, Rng& rng) {
    const auto frame = synthesize_frame_channel(config, rng);
    return run_frame(config, scheme, frame, rng);
}

}  // namespace irsim
