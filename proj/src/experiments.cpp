#include "irsim/experiments.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <vector>

namespace irsim {

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

class CsvFile {
  public:
    CsvFile(const std::filesystem::path& path, const std::string& header) : path_(path), out_(path) {
        if (!out_) {
            throw std::runtime_error("cannot open output file: " + path.string());
        }
        out_ << header << "\n";
    }

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((out_ << (first ? "" : ","), first = false, out_ << fields), ...);
        out_ << "\n";
    }

    void close() {
        out_.flush();
        if (!out_) {
            throw std::runtime_error("failed writing output file: " + path_.string());
        }
        out_.close();
    }

  private:
    std::filesystem::path path_;
    std::ofstream out_;
};

void check_nonempty(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(f, ec);
        if (ec || size == 0) {
            throw std::runtime_error("output file missing or empty: " + f.string());
        }
    }
}

void write_cdf_rows(CsvFile& csv, const std::string& scheme, const std::vector<double>& snr_linear) {
    const auto cdf = empirical_cdf(snr_linear);
    for (size_t k = 0; k < cdf.values.size(); ++k) {
        csv.row(scheme, fmt(linear_to_db(cdf.values[k])), fmt(cdf.probs[k]));
    }
}

std::vector<std::filesystem::path> run_fig3(const SystemConfig& base, int trials,
                                            const std::filesystem::path& out_dir) {
    ExperimentSpec spec;
    spec.base = base;
    spec.base.transmit_power_dbm = 41.0;
    spec.base.stage1_blocks_n1 = 5;
    spec.base.irs_mx = 50;
    spec.schemes = {Scheme::kProposed, Scheme::kRandomRefraction};
    spec.trials = trials;
    spec.master_seed = base.master_seed;
    const auto result = run_experiment(spec);

    const auto path_a = out_dir / "fig3a.csv";
    CsvFile csv_a(path_a, "scheme,snr_db,cdf");
    for (const auto& agg : result.points[0].schemes) {
        write_cdf_rows(csv_a, scheme_name(agg.scheme), agg.stage2_snr_linear);
    }
    csv_a.close();

    const auto path_b = out_dir / "fig3b.csv";
    CsvFile csv_b(path_b, "scheme,block_index,snr_db");
    for (const auto& agg : result.points[0].schemes) {
        for (const auto& block : agg.sample_frame.blocks) {
            csv_b.row(scheme_name(agg.scheme), block.block_index,
                      fmt(linear_to_db(block.snr_gamma)));
        }
    }
    csv_b.close();
    return {path_a, path_b};
}

std::vector<std::filesystem::path> run_fig4(const SystemConfig& base, int trials,
                                            const std::filesystem::path& out_dir) {
    ExperimentSpec spec;
    spec.base = base;
    spec.base.transmit_power_dbm = 31.0;
    spec.base.stage1_blocks_n1 = 10;
    spec.sweep = SweepParameter::kIrsElements;
    spec.sweep_values = {10, 30, 50, 70, 90};
    spec.schemes = {Scheme::kProposed, Scheme::kProposedNoCpa, Scheme::kRandomRefraction,
                    Scheme::kCcce};
    spec.trials = trials;
    spec.master_seed = base.master_seed;
    const auto result = run_experiment(spec);

    const auto path = out_dir / "fig4.csv";
    CsvFile csv(path, "scheme,m_r,rate_bps_hz");
    for (const auto& point : result.points) {
        for (const auto& agg : point.schemes) {
            csv.row(scheme_name(agg.scheme), static_cast<int>(point.sweep_value),
                    fmt(agg.mean_rate));
        }
    }
    csv.close();
    return {path};
}

std::vector<std::filesystem::path> run_fig5(const SystemConfig& base, int trials,
                                            const std::filesystem::path& out_dir) {
    struct Combo {
        int m_r;
        double pt_dbm;
    };
    const Combo combos[] = {{50, 31.0}, {100, 31.0}, {50, 41.0}};

    const auto path = out_dir / "fig5.csv";
    CsvFile csv(path, "m_r,pt_dbm,n1,rate_bps_hz");
    for (const auto& combo : combos) {
        ExperimentSpec spec;
        spec.base = base;
        spec.base.irs_mx = combo.m_r;
        spec.base.transmit_power_dbm = combo.pt_dbm;
        spec.sweep = SweepParameter::kStage1Blocks;
        for (int n1 = 2; n1 <= base.blocks_n - 1; ++n1) {
            spec.sweep_values.push_back(n1);
        }
        spec.schemes = {Scheme::kProposed};
        spec.trials = trials;
        spec.master_seed = base.master_seed;
        const auto result = run_experiment(spec);
        for (const auto& point : result.points) {
            csv.row(combo.m_r, fmt(combo.pt_dbm), static_cast<int>(point.sweep_value),
                    fmt(point.schemes[0].mean_rate));
        }
    }
    csv.close();
    return {path};
}

std::vector<std::filesystem::path> run_custom(const SystemConfig& base, int trials,
                                              const std::filesystem::path& out_dir) {
    ExperimentSpec spec;
    spec.base = base;
    spec.schemes = {Scheme::kProposed, Scheme::kProposedNoCpa, Scheme::kRandomRefraction,
                    Scheme::kCcce};
    spec.trials = trials;
    spec.master_seed = base.master_seed;
    const auto result = run_experiment(spec);

    const auto path_rates = out_dir / "custom_rates.csv";
    CsvFile csv_rates(path_rates, "scheme,rate_bps_hz,stderr");
    for (const auto& agg : result.points[0].schemes) {
        csv_rates.row(scheme_name(agg.scheme), fmt(agg.mean_rate), fmt(agg.stderr_rate));
    }
    csv_rates.close();

    const auto path_cdf = out_dir / "custom_cdf.csv";
    CsvFile csv_cdf(path_cdf, "scheme,snr_db,cdf");
    for (const auto& agg : result.points[0].schemes) {
        write_cdf_rows(csv_cdf, scheme_name(agg.scheme), agg.stage2_snr_linear);
    }
    csv_cdf.close();
    return {path_rates, path_cdf};
}

}  // namespace

int default_trials(const std::string& experiment) {
    return (experiment == "fig4" || experiment == "fig5") ? 200 : 500;
}

int run_named(const std::string& experiment, SystemConfig config,
              const std::filesystem::path& out_dir, const RunOverrides& overrides) {
    try {
        if (overrides.seed) {
            config.master_seed = *overrides.seed;
        }
        if (overrides.trials) {
            config.trials = *overrides.trials;
            config.trials_explicit = true;
        }
        if (!config.trials_explicit) {
            config.trials = default_trials(experiment);
        }
        config.validate();
        std::filesystem::create_directories(out_dir);

        std::vector<std::filesystem::path> outputs;
        if (experiment == "fig3") {
            outputs = run_fig3(config, config.trials, out_dir);
        } else if (experiment == "fig4") {
            outputs = run_fig4(config, config.trials, out_dir);
        } else if (experiment == "fig5") {
            outputs = run_fig5(config, config.trials, out_dir);
        } else if (experiment == "custom") {
            outputs = run_custom(config, config.trials, out_dir);
        } else {
            std::cerr << "unknown experiment: " << experiment << "\n";
            return 2;
        }

        const auto manifest = out_dir / "manifest.txt";
        save_config(config, manifest,
                    "resolved configuration for experiment '" + experiment +
                        "'; rerun with: sim " + experiment + " --config manifest.txt");
        outputs.push_back(manifest);
        check_nonempty(outputs);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace irsim
