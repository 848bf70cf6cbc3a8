#include "irsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace irsim {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t point, std::uint64_t trial,
                          std::uint64_t stream) {
    std::uint64_t h = splitmix64(master_seed);
    h = splitmix64(h ^ splitmix64(point + 0x1000000000000001ULL));
    h = splitmix64(h ^ splitmix64(trial + 0x2000000000000003ULL));
    h = splitmix64(h ^ splitmix64(stream + 0x3000000000000005ULL));
    return h;
}

EmpiricalCdf empirical_cdf(std::vector<double> samples) {
    if (samples.empty()) {
        throw std::invalid_argument("empirical_cdf: no samples");
    }
    std::sort(samples.begin(), samples.end());
    EmpiricalCdf cdf;
    cdf.probs.resize(samples.size());
    const double n = static_cast<double>(samples.size());
    for (size_t k = 0; k < samples.size(); ++k) {
        cdf.probs[k] = static_cast<double>(k + 1) / n;
    }
    cdf.values = std::move(samples);
    return cdf;
}

double quantile(const EmpiricalCdf& cdf, double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw std::invalid_argument("quantile: p must be inside (0, 1)");
    }
    const auto& x = cdf.values;
    if (x.empty()) {
        throw std::invalid_argument("quantile: empty distribution");
    }
    const double pos = (static_cast<double>(x.size()) - 1.0) * p;
    const auto lo = static_cast<size_t>(pos);
    const size_t hi = std::min(lo + 1, x.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return x[lo] + frac * (x[hi] - x[lo]);
}

double percentile_gain_db(const EmpiricalCdf& cdf_a, const EmpiricalCdf& cdf_b, double p) {
    return linear_to_db(quantile(cdf_a, p) / quantile(cdf_b, p));
}

void ExperimentSpec::validate() const {
    base.validate();
    if (trials < 1) {
        throw std::invalid_argument("experiment: trials must be >= 1");
    }
    if (schemes.empty()) {
        throw std::invalid_argument("experiment: no schemes selected");
    }
    if (sweep != SweepParameter::kNone) {
        if (sweep_values.empty()) {
            throw std::invalid_argument("experiment: sweep value list is empty");
        }
        for (size_t i = 1; i < sweep_values.size(); ++i) {
            if (!(sweep_values[i] > sweep_values[i - 1])) {
                throw std::invalid_argument("experiment: sweep values must be strictly increasing");
            }
        }
    }
}

SystemConfig apply_sweep(SystemConfig config, SweepParameter sweep, double value) {
    switch (sweep) {
        case SweepParameter::kNone:
            break;
        case SweepParameter::kIrsElements:
            config.irs_mx = static_cast<int>(std::llround(value));
            break;
        case SweepParameter::kStage1Blocks:
            config.stage1_blocks_n1 = static_cast<int>(std::llround(value));
            break;
        case SweepParameter::kTransmitPowerDbm:
            config.transmit_power_dbm = value;
            break;
    }
    return config;
}

const SchemeAggregate& AggregateResult::at(size_t point, Scheme scheme) const {
    for (const auto& agg : points.at(point).schemes) {
        if (agg.scheme == scheme) {
            return agg;
        }
    }
    throw std::out_of_range("AggregateResult: scheme not present at this point");
}

AggregateResult run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    const std::vector<double> values =
        spec.sweep == SweepParameter::kNone ? std::vector<double>{0.0} : spec.sweep_values;
    const size_t n_points = values.size();
    const size_t n_trials = static_cast<size_t>(spec.trials);
    const size_t n_schemes = spec.schemes.size();

    std::vector<SystemConfig> configs;
    configs.reserve(n_points);
    for (const double v : values) {
        auto cfg = apply_sweep(spec.base, spec.sweep, v);
        cfg.validate();
        configs.push_back(std::move(cfg));
    }

    // Every (point, trial, scheme) run lands in its own slot, so the reduction
    // below is independent of how tasks are scheduled across threads.
    std::vector<FrameMetrics> slots(n_points * n_trials * n_schemes);
    const size_t n_tasks = n_points * n_trials;
    std::atomic<size_t> next{0};
    auto worker = [&]() {
        for (size_t task = next.fetch_add(1); task < n_tasks; task = next.fetch_add(1)) {
            const size_t p = task / n_trials;
            const size_t t = task % n_trials;
            Rng channel_rng(derive_seed(spec.master_seed, p, t, 0));
            const auto frame = synthesize_frame_channel(configs[p], channel_rng);
            for (size_t s = 0; s < n_schemes; ++s) {
                Rng scheme_rng(derive_seed(spec.master_seed, p, t, 1));
                slots[(p * n_trials + t) * n_schemes + s] =
                    run_frame(configs[p], spec.schemes[s], frame, scheme_rng);
            }
        }
    };

    unsigned n_threads = spec.threads > 0 ? static_cast<unsigned>(spec.threads)
                                          : std::max(1u, std::thread::hardware_concurrency());
    n_threads = static_cast<unsigned>(std::min<size_t>(n_threads, n_tasks));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned i = 0; i < n_threads; ++i) {
            pool.emplace_back(worker);
        }
        for (auto& th : pool) {
            th.join();
        }
    }

    AggregateResult result;
    result.points.resize(n_points);
    for (size_t p = 0; p < n_points; ++p) {
        auto& point = result.points[p];
        point.sweep_value = values[p];
        point.schemes.resize(n_schemes);
        for (size_t s = 0; s < n_schemes; ++s) {
            auto& agg = point.schemes[s];
            agg.scheme = spec.schemes[s];
            double sum = 0.0;
            double sum_sq = 0.0;
            for (size_t t = 0; t < n_trials; ++t) {
                const auto& metrics = slots[(p * n_trials + t) * n_schemes + s];
                sum += metrics.rate_overall;
                sum_sq += metrics.rate_overall * metrics.rate_overall;
                for (const auto& block : metrics.blocks) {
                    if (block.block_index > configs[p].stage1_blocks_n1) {
                        agg.stage2_snr_linear.push_back(block.snr_gamma);
                    }
                }
            }
            const double n = static_cast<double>(n_trials);
            agg.mean_rate = sum / n;
            if (n_trials > 1) {
                const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
                agg.stderr_rate = std::sqrt(var / n);
            }
            agg.sample_frame = slots[(p * n_trials + 0) * n_schemes + s];
        }
    }
    return result;
}

}  // namespace irsim
