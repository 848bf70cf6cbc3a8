#pragma once

#include <cstdint>
#include <vector>

#include "irsim/protocol.hpp"

namespace irsim {

std::uint64_t splitmix64(std::uint64_t x);

/// Counter-based stream derivation: every (master, point, trial, stream)
/// tuple maps to an independent generator seed. Stream 0 carries the frame
/// ground truth, stream 1 the per-scheme pilots/noise/training draws, so
/// every scheme at one (point, trial) sees the same frame channel.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t point, std::uint64_t trial,
                          std::uint64_t stream);

/// Right-continuous empirical distribution; probs[k] = (k+1)/n over the
/// ascending sorted samples.
struct EmpiricalCdf {
    std::vector<double> values;
    std::vector<double> probs;
};

EmpiricalCdf empirical_cdf(std::vector<double> samples);

/// Quantile by linear interpolation between order statistics (the usual
/// (n-1)p positional convention).
double quantile(const EmpiricalCdf& cdf, double p);

/// Ratio of the p-quantiles of a over b, in dB; inputs are linear samples.
double percentile_gain_db(const EmpiricalCdf& cdf_a, const EmpiricalCdf& cdf_b, double p);

enum class SweepParameter { kNone, kIrsElements, kStage1Blocks, kTransmitPowerDbm };

struct ExperimentSpec {
    SystemConfig base;
    SweepParameter sweep = SweepParameter::kNone;
    std::vector<double> sweep_values;  // ignored for kNone; strictly increasing otherwise
    std::vector<Scheme> schemes;
    int trials = 1;
    std::uint64_t master_seed = 1;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

SystemConfig apply_sweep(SystemConfig config, SweepParameter sweep, double value);

struct SchemeAggregate {
    Scheme scheme = Scheme::kProposed;
    double mean_rate = 0.0;
    double stderr_rate = 0.0;
    /// Linear SNR of every block with index above the point's stage-1 count,
    /// pooled across trials in trial order.
    std::vector<double> stage2_snr_linear;
    /// Full metrics of trial 0, for per-block traces.
    FrameMetrics sample_frame;
};

struct PointResult {
    double sweep_value = 0.0;
    std::vector<SchemeAggregate> schemes;
};

struct AggregateResult {
    std::vector<PointResult> points;

    const SchemeAggregate& at(size_t point, Scheme scheme) const;
};

/// Runs trials x sweep-points x schemes with deterministic per-trial seeding
/// and common frame channels across schemes. Results are byte-reproducible
/// for a given spec regardless of thread count.
AggregateResult run_experiment(const ExperimentSpec& spec);

}  // namespace irsim
