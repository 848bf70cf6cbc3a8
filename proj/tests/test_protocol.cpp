#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "irsim/protocol.hpp"
#include "test_support.hpp"

using namespace irsim;

namespace {

FrameChannel make_frame(const SystemConfig& cfg, uint64_t seed) {
    Rng rng(seed);
    return synthesize_frame_channel(cfg, rng);
}

double stddev(const std::vector<double>& x) {
    double mean = 0.0;
    for (const double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    double acc = 0.0;
    for (const double v : x) acc += (v - mean) * (v - mean);
    return std::sqrt(acc / static_cast<double>(x.size()));
}

}  // namespace

TEST_CASE("scheme names round-trip") {
    for (Scheme s : {Scheme::kProposed, Scheme::kProposedNoCpa, Scheme::kRandomRefraction,
                     Scheme::kCcce}) {
        CHECK(parse_scheme(scheme_name(s)) == s);
    }
    CHECK_THROWS_AS(parse_scheme("nope"), std::invalid_argument);
}

TEST_CASE("stage1_block picks the stronger training option at zero noise") {
    SystemConfig cfg;
    cfg.irs_mx = 16;
    const auto theta = dft_training_matrix(2);
    Rng rng(10);
    for (int rep = 0; rep < 30; ++rep) {
        const auto frame = make_frame(cfg, 100 + rep);
        const auto v_bar = RefractionVector::random_phases(cfg.irs_mx, rng);
        auto res = stage1_block(frame, 1, v_bar, theta, 0.0, rng);

        // exhaustive comparison of both options on the true channel
        const auto c = cascaded_channel(frame.cascaded, 1, frame.block_duration_s, cfg.irs_mx);
        const Complex h_d = frame.direct[0];
        double best = 0.0;
        for (const Complex mu : theta.mu) {
            best = std::max(best, std::norm(effective_channel(c, v_bar.scaled(mu), h_d)));
        }
        CHECK(res.metrics.gain_w == approx_rel(best, 1e-9));
        CHECK(res.metrics.stage == Stage::kOne);
        CHECK(res.metrics.block_index == 1);

        // estimates are exact without noise
        const Complex h_r = effective_channel(c, v_bar, Complex{0, 0});
        CHECK(std::abs(res.estimate.h_d_hat - h_d) < 1e-15);
        CHECK(std::abs(res.estimate.h_r_bar_hat - h_r) < 1e-15);
    }
}

TEST_CASE("stage1_block ties resolve to the first option when the surface is silent") {
    SystemConfig cfg;
    cfg.irs_mx = 8;
    auto frame = make_frame(cfg, 3);
    frame.cascaded.beta = Complex{0.0, 0.0};  // no refracted path at all
    Rng rng(5);
    const auto theta = dft_training_matrix(2);
    const auto v_bar = RefractionVector::random_phases(cfg.irs_mx, rng);
    const auto res = stage1_block(frame, 2, v_bar, theta, 0.0, rng);
    CHECK(res.metrics.gain_w == approx_rel(std::norm(frame.direct[1]), 1e-12));
    // chosen refraction is mu_0 * v_bar = +v_bar
    for (int m = 0; m < cfg.irs_mx; ++m) {
        CHECK(std::abs(res.data_refraction.coefficients()[static_cast<size_t>(m)] -
                       v_bar.coefficients()[static_cast<size_t>(m)]) < 1e-15);
    }
}

TEST_CASE("stage1_block gain matches an independent recomputation") {
    SystemConfig cfg;
    Rng rng(77);
    const auto theta = dft_training_matrix(2);
    for (int rep = 0; rep < 10; ++rep) {
        const auto frame = make_frame(cfg, 500 + rep);
        const auto v_bar = RefractionVector::random_phases(cfg.irs_mx, rng);
        const int n = 1 + static_cast<int>(rng() % cfg.blocks_n);
        const auto res = stage1_block(frame, n, v_bar, theta, cfg.sigma2(), rng);
        const auto c = cascaded_channel(frame.cascaded, n, frame.block_duration_s, cfg.irs_mx);
        const double oracle =
            std::norm(effective_channel(c, res.data_refraction,
                                        frame.direct[static_cast<size_t>(n - 1)]));
        CHECK(res.metrics.gain_w == approx_rel(oracle, 1e-12));
        CHECK(res.metrics.snr_gamma == approx_rel(oracle / cfg.sigma2(), 1e-12));
    }
}

TEST_CASE("stage2_refraction aligns the two paths under perfect knowledge") {
    Rng rng(21);
    const double tc = 2.0325e-4;
    const int mx = 32;
    std::uniform_real_distribution<double> up(-1.0, 1.0);
    for (int rep = 0; rep < 50; ++rep) {
        MlEstimate truth;
        truth.beta_hat = draw_circular_gaussian(rng, 1e-12);
        truth.fd_hat_hz = 900.0 * up(rng);
        truth.psi_x_hat = SteeringPhase{up(rng)};
        const Complex h_d = draw_circular_gaussian(rng, 1e-11);
        const int n = 6 + static_cast<int>(rng() % 25);

        const auto v = stage2_refraction(truth, std::arg(h_d), n, tc, mx);
        for (const auto& x : v.coefficients()) {
            CHECK(std::abs(std::abs(x) - 1.0) < 1e-12);
        }
        const CascadedChannelParams params{truth.beta_hat, truth.fd_hat_hz, truth.psi_x_hat};
        const Complex h_eff = effective_channel(cascaded_channel(params, n, tc, mx), v, h_d);
        const double expected = mx * std::abs(truth.beta_hat) + std::abs(h_d);
        CHECK(std::abs(h_eff) == approx_rel(expected, 1e-9));
        // combined channel keeps the direct path's phase
        CHECK(std::arg(h_eff * std::polar(1.0, -std::arg(h_d))) ==
              doctest::Approx(0.0).epsilon(1e-9));
    }
}

TEST_CASE("stage2_refraction without phase alignment leaves the direct phase free") {
    Rng rng(22);
    const double tc = 2.0325e-4;
    const int mx = 16;
    for (int rep = 0; rep < 20; ++rep) {
        MlEstimate truth;
        truth.beta_hat = draw_circular_gaussian(rng, 1e-12);
        truth.fd_hat_hz = 432.1;
        truth.psi_x_hat = SteeringPhase{0.3};
        const Complex h_d = draw_circular_gaussian(rng, 1e-12);
        const int n = 7;
        const auto v = stage2_refraction(truth, 0.0, n, tc, mx);
        const CascadedChannelParams params{truth.beta_hat, truth.fd_hat_hz, truth.psi_x_hat};
        const Complex h_eff = effective_channel(cascaded_channel(params, n, tc, mx), v, h_d);
        // per-instance oracle: cascaded part collapses to mx*|beta| exactly
        const Complex expected = mx * std::abs(truth.beta_hat) + h_d;
        CHECK(std::abs(h_eff - expected) < 1e-9 * std::abs(expected));
        CHECK(std::abs(h_eff) <= mx * std::abs(truth.beta_hat) + std::abs(h_d) + 1e-15);
        CHECK(std::abs(h_eff) >=
              std::abs(mx * std::abs(truth.beta_hat) - std::abs(h_d)) - 1e-15);
    }
}

TEST_CASE("stage2_refraction: Doppler estimate error drifts the phase linearly") {
    const double tc = 2.0325e-4;
    const int mx = 8;
    const double delta_f = 3.7;  // Hz of estimation error
    MlEstimate est;
    est.beta_hat = Complex{1.0, 0.0};
    est.fd_hat_hz = 500.0 - delta_f;
    est.psi_x_hat = SteeringPhase{-0.4};
    const CascadedChannelParams params{Complex{1.0, 0.0}, 500.0, SteeringPhase{-0.4}};

    double prev_phase = 0.0;
    for (int n = 10; n <= 14; ++n) {
        const auto v = stage2_refraction(est, 0.0, n, tc, mx);
        const Complex h_eff =
            effective_channel(cascaded_channel(params, n, tc, mx), v, Complex{0.0, 0.0});
        const double phase = std::arg(h_eff);
        if (n > 10) {
            double drift = phase - prev_phase;
            while (drift > kPi) drift -= 2.0 * kPi;
            while (drift < -kPi) drift += 2.0 * kPi;
            CHECK(drift == doctest::Approx(2.0 * kPi * delta_f * tc).epsilon(1e-6));
        }
        prev_phase = phase;
    }
}

TEST_CASE("ccce_alignment_refraction points every element at the direct phase") {
    Rng rng(9);
    std::vector<Complex> c_hat(12);
    for (auto& x : c_hat) {
        x = draw_circular_gaussian(rng, 1.0);
    }
    const Complex h_d = draw_circular_gaussian(rng, 1.0);
    const auto v = ccce_alignment_refraction(h_d, c_hat);
    Complex sum{0.0, 0.0};
    double magnitude_sum = 0.0;
    for (size_t m = 0; m < c_hat.size(); ++m) {
        sum += c_hat[m] * v.coefficients()[m];
        magnitude_sum += std::abs(c_hat[m]);
    }
    CHECK(std::abs(sum) == doctest::Approx(magnitude_sum).epsilon(1e-12));
    CHECK(std::arg(sum * std::polar(1.0, -std::arg(h_d))) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("achievable_rate accounting") {
    const std::vector<double> gains{1.0, 3.0};
    const double gamma = 2.0;
    const double sigma2 = 0.5;
    const double expected =
        (100.0 - 2.0) / 100.0 * 0.5 * (std::log2(1.0 + 1.0 / 1.0) + std::log2(1.0 + 3.0 / 1.0));
    CHECK(achievable_rate(gains, 100, 2, gamma, sigma2) == doctest::Approx(expected).epsilon(1e-12));
    CHECK(achievable_rate({}, 100, 2, gamma, sigma2) == 0.0);
    // pilots filling the block clamp the rate at zero
    CHECK(achievable_rate(gains, 100, 100, gamma, sigma2) == 0.0);
    CHECK(achievable_rate(gains, 100, 120, gamma, sigma2) == 0.0);

    // monotone in every gain
    const double base = achievable_rate(gains, 100, 2, gamma, sigma2);
    for (size_t i = 0; i < gains.size(); ++i) {
        auto bumped = gains;
        bumped[i] *= 1.5;
        CHECK(achievable_rate(bumped, 100, 2, gamma, sigma2) >= base);
    }
}

TEST_CASE("run_frame rate decomposition holds exactly for every scheme") {
    SystemConfig cfg;
    cfg.irs_mx = 12;
    cfg.blocks_n = 12;
    cfg.stage1_blocks_n1 = 4;
    const auto frame = make_frame(cfg, 44);
    for (Scheme s : {Scheme::kProposed, Scheme::kProposedNoCpa, Scheme::kRandomRefraction,
                     Scheme::kCcce}) {
        Rng rng(7);
        const auto metrics = run_frame(cfg, s, frame, rng);
        const int n1 = metrics.stage1_blocks;
        const double recombined =
            static_cast<double>(n1) / cfg.blocks_n * metrics.rate_stage1 +
            static_cast<double>(cfg.blocks_n - n1) / cfg.blocks_n * metrics.rate_stage2;
        CHECK(metrics.rate_overall == recombined);
        CHECK(static_cast<int>(metrics.blocks.size()) == cfg.blocks_n);
        for (size_t i = 0; i < metrics.blocks.size(); ++i) {
            CHECK(metrics.blocks[i].block_index == static_cast<int>(i) + 1);
            CHECK(metrics.blocks[i].gain_w >= 0.0);
            CHECK(metrics.blocks[i].snr_gamma ==
                  approx_rel(metrics.blocks[i].gain_w / cfg.sigma2(), 1e-12));
        }
        if (s == Scheme::kProposed || s == Scheme::kProposedNoCpa) {
            CHECK(metrics.ml.has_value());
            CHECK(n1 == cfg.stage1_blocks_n1);
        } else {
            CHECK_FALSE(metrics.ml.has_value());
            CHECK(n1 == cfg.blocks_n);
            CHECK(metrics.rate_stage2 == 0.0);
        }
    }
}

TEST_CASE("random refraction equals the proposed scheme with N1 = N") {
    SystemConfig cfg;
    cfg.irs_mx = 10;
    cfg.blocks_n = 8;
    const auto frame = make_frame(cfg, 321);

    auto cfg_full = cfg;
    cfg_full.stage1_blocks_n1 = cfg.blocks_n;

    Rng rng_rr(5150);
    Rng rng_prop(5150);
    const auto rr = run_frame(cfg, Scheme::kRandomRefraction, frame, rng_rr);
    const auto prop = run_frame(cfg_full, Scheme::kProposed, frame, rng_prop);

    REQUIRE(rr.blocks.size() == prop.blocks.size());
    for (size_t i = 0; i < rr.blocks.size(); ++i) {
        CHECK(rr.blocks[i].gain_w == prop.blocks[i].gain_w);
        CHECK(rr.blocks[i].snr_gamma == prop.blocks[i].snr_gamma);
    }
    CHECK(rr.rate_stage1 == prop.rate_stage1);
    CHECK(rr.rate_overall == prop.rate_overall);
}

TEST_CASE("ccce with pilots filling the block keeps gains but zero rate") {
    SystemConfig cfg;
    cfg.irs_mx = 99;  // tau = 100 = Q
    cfg.blocks_n = 4;
    cfg.stage1_blocks_n1 = 2;
    const auto frame = make_frame(cfg, 9);
    Rng rng(2);
    const auto metrics = run_frame(cfg, Scheme::kCcce, frame, rng);
    CHECK(metrics.rate_overall == 0.0);
    CHECK(metrics.rate_stage1 == 0.0);
    for (const auto& b : metrics.blocks) {
        CHECK(b.gain_w > 0.0);
    }
}

TEST_CASE("proposed scheme reaches the coherent bound end to end at zero noise") {
    // Geometry with zero Doppler and zero steering offset puts the true
    // parameters exactly on the search grid, so the pipeline is exact.
    SystemConfig cfg;
    cfg.theta_bi_rad = kPi / 2;  // broadside motion: fd = 0, phi_bi = 0
    cfg.theta_iu_rad = 0.0;
    cfg.vartheta_iu_rad = kPi / 2;  // phi_iu = cos(0)*cos(pi/2) = 0
    cfg.noise_power_dbm = -400.0;   // effectively noiseless
    cfg.irs_mx = 20;
    cfg.blocks_n = 10;
    cfg.stage1_blocks_n1 = 4;
    const auto frame = make_frame(cfg, 77);
    REQUIRE(std::abs(frame.cascaded.doppler_fd_hz) < 1e-10);  // cos(pi/2) rounds near zero
    REQUIRE(std::abs(frame.cascaded.psi_x.value) < 1e-12);

    Rng rng(3);
    const auto metrics = run_frame(cfg, Scheme::kProposed, frame, rng);
    for (const auto& b : metrics.blocks) {
        if (b.stage == Stage::kTwo) {
            const double bound =
                cfg.irs_mx * std::abs(frame.cascaded.beta) +
                std::abs(frame.direct[static_cast<size_t>(b.block_index - 1)]);
            CHECK(std::sqrt(b.gain_w) == approx_rel(bound, 1e-9));
        }
    }
}

TEST_CASE("beamforming-stage gains dominate the estimation stage on average") {
    SystemConfig cfg;  // reference setup: 41 dBm, 50 elements, N1 = 5
    double mean_w1 = 0.0;
    double mean_w2 = 0.0;
    int count1 = 0;
    int count2 = 0;
    for (int t = 0; t < 200; ++t) {
        Rng rng(10000 + static_cast<uint64_t>(t));
        const auto metrics = run_frame(cfg, Scheme::kProposed, rng);
        for (const auto& b : metrics.blocks) {
            if (b.stage == Stage::kOne) {
                mean_w1 += b.gain_w;
                ++count1;
            } else {
                mean_w2 += b.gain_w;
                ++count2;
            }
        }
    }
    mean_w1 /= count1;
    mean_w2 /= count2;
    CHECK(mean_w2 > mean_w1);
}

TEST_CASE("perfect alignment converts fast fading to slow fading per frame") {
    SystemConfig cfg;
    for (int t = 0; t < 20; ++t) {
        Rng rng(900 + t);
        const auto frame = synthesize_frame_channel(cfg, rng);
        std::vector<double> combined_db;
        std::vector<double> direct_db;
        for (int n = cfg.stage1_blocks_n1 + 1; n <= cfg.blocks_n; ++n) {
            const double hd = std::abs(frame.direct[static_cast<size_t>(n - 1)]);
            combined_db.push_back(20.0 *
                                  std::log10(cfg.irs_mx * std::abs(frame.cascaded.beta) + hd));
            direct_db.push_back(20.0 * std::log10(hd));
        }
        CHECK(stddev(combined_db) < stddev(direct_db));
    }
}
