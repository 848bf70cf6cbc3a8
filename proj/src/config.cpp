#include "irsim/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace irsim {

namespace {

struct KeyBinding {
    std::function<void(SystemConfig&, const std::string&)> set;
    std::function<std::string(const SystemConfig&)> get;
};

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

double parse_double(const std::string& key, const std::string& text) {
    try {
        size_t pos = 0;
        const double v = std::stod(text, &pos);
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos != text.size()) {
            throw std::invalid_argument("trailing characters");
        }
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': cannot parse '" + text + "' as a number");
    }
}

int parse_int(const std::string& key, const std::string& text) {
    const double v = parse_double(key, text);
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + text + "'");
    }
    return i;
}

std::uint64_t parse_u64(const std::string& key, const std::string& text) {
    std::uint64_t v = 0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last) {
        throw ConfigError("config key '" + key + "': cannot parse '" + text +
                          "' as an unsigned integer");
    }
    return v;
}

const std::map<std::string, KeyBinding>& key_table() {
#define IRSIM_DOUBLE_KEY(name, field)                                                       \
    {name,                                                                                  \
     {[](SystemConfig& c, const std::string& v) { c.field = parse_double(name, v); },       \
      [](const SystemConfig& c) { return format_double(c.field); }}}
#define IRSIM_INT_KEY(name, field)                                                    \
    {name,                                                                            \
     {[](SystemConfig& c, const std::string& v) { c.field = parse_int(name, v); },    \
      [](const SystemConfig& c) { return std::to_string(c.field); }}}
    static const std::map<std::string, KeyBinding> table = {
        IRSIM_DOUBLE_KEY("carrier_frequency_hz", carrier_frequency_hz),
        IRSIM_DOUBLE_KEY("bandwidth_hz", bandwidth_hz),
        IRSIM_DOUBLE_KEY("speed_mps", speed_mps),
        IRSIM_INT_KEY("blocks_N", blocks_n),
        IRSIM_INT_KEY("stage1_blocks_N1", stage1_blocks_n1),
        IRSIM_INT_KEY("symbols_per_block_Q", symbols_per_block_q),
        IRSIM_INT_KEY("pilots_tau", pilots_tau),
        IRSIM_INT_KEY("irs_Mx", irs_mx),
        IRSIM_INT_KEY("irs_My", irs_my),
        IRSIM_DOUBLE_KEY("element_spacing_over_lambda", element_spacing_over_lambda),
        IRSIM_DOUBLE_KEY("distance_bs_irs_m", distance_bs_irs_m),
        IRSIM_DOUBLE_KEY("distance_bs_user_m", distance_bs_user_m),
        IRSIM_DOUBLE_KEY("distance_irs_user_m", distance_irs_user_m),
        IRSIM_DOUBLE_KEY("pathloss_exponent_bu", pathloss_exponent_bu),
        IRSIM_DOUBLE_KEY("pathloss_exponent_bi", pathloss_exponent_bi),
        IRSIM_DOUBLE_KEY("pathloss_exponent_iu", pathloss_exponent_iu),
        IRSIM_DOUBLE_KEY("xi0_linear", xi0_linear),
        IRSIM_DOUBLE_KEY("theta_bi_rad", theta_bi_rad),
        IRSIM_DOUBLE_KEY("vartheta_bi_rad", vartheta_bi_rad),
        IRSIM_DOUBLE_KEY("theta_iu_rad", theta_iu_rad),
        IRSIM_DOUBLE_KEY("vartheta_iu_rad", vartheta_iu_rad),
        IRSIM_DOUBLE_KEY("transmit_power_dbm", transmit_power_dbm),
        IRSIM_DOUBLE_KEY("noise_power_dbm", noise_power_dbm),
        IRSIM_DOUBLE_KEY("gamma_gap_db", gamma_gap_db),
        IRSIM_DOUBLE_KEY("grid_fd_min_hz", grid_fd_min_hz),
        IRSIM_DOUBLE_KEY("grid_fd_max_hz", grid_fd_max_hz),
        IRSIM_DOUBLE_KEY("grid_fd_coarse_step_hz", grid_fd_coarse_step_hz),
        IRSIM_DOUBLE_KEY("grid_psi_coarse_step", grid_psi_coarse_step),
        IRSIM_INT_KEY("grid_refinement_levels", grid_refinement_levels),
        IRSIM_DOUBLE_KEY("grid_refinement_shrink", grid_refinement_shrink),
        {"trials",
         {[](SystemConfig& c, const std::string& v) {
              c.trials = parse_int("trials", v);
              c.trials_explicit = true;
          },
          [](const SystemConfig& c) { return std::to_string(c.trials); }}},
        {"master_seed",
         {[](SystemConfig& c, const std::string& v) { c.master_seed = parse_u64("master_seed", v); },
          [](const SystemConfig& c) { return std::to_string(c.master_seed); }}},
    };
#undef IRSIM_DOUBLE_KEY
#undef IRSIM_INT_KEY
    return table;
}

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

LinkGeometry SystemConfig::bs_irs_geometry() const {
    return LinkGeometry{theta_bi_rad, vartheta_bi_rad, distance_bs_irs_m, pathloss_exponent_bi,
                        xi0_linear};
}

LinkGeometry SystemConfig::irs_user_geometry() const {
    return LinkGeometry{theta_iu_rad, vartheta_iu_rad, distance_irs_user_m, pathloss_exponent_iu,
                        xi0_linear};
}

GridSpec SystemConfig::grid_spec() const {
    GridSpec g;
    const double f_max = f_max_hz();
    g.fd_min_hz = grid_fd_min_hz != 0.0 || grid_fd_max_hz != 0.0 ? grid_fd_min_hz : -f_max;
    g.fd_max_hz = grid_fd_min_hz != 0.0 || grid_fd_max_hz != 0.0 ? grid_fd_max_hz : f_max;
    g.fd_coarse_step_hz = grid_fd_coarse_step_hz > 0.0
                              ? grid_fd_coarse_step_hz
                              : 1.0 / (10.0 * blocks_n * block_duration_s());
    g.psi_coarse_step = grid_psi_coarse_step > 0.0 ? grid_psi_coarse_step : 2.0 / (10.0 * irs_mx);
    g.refinement_levels = grid_refinement_levels;
    g.refinement_shrink = grid_refinement_shrink;
    return g;
}

void SystemConfig::validate() const {
    if (!(carrier_frequency_hz > 0.0)) {
        throw ConfigError("carrier_frequency_hz must be > 0");
    }
    if (!(bandwidth_hz > 0.0)) {
        throw ConfigError("bandwidth_hz must be > 0");
    }
    if (!(speed_mps > 0.0)) {
        throw ConfigError("speed_mps must be > 0 (block duration is tied to the Doppler spread)");
    }
    if (blocks_n < 1) {
        throw ConfigError("blocks_N must be >= 1");
    }
    if (stage1_blocks_n1 < 2) {
        throw ConfigError("stage1_blocks_N1 must be >= 2 (joint estimation needs two blocks)");
    }
    if (stage1_blocks_n1 > blocks_n) {
        throw ConfigError("stage1_blocks_N1 (" + std::to_string(stage1_blocks_n1) +
                          ") must not exceed blocks_N (" + std::to_string(blocks_n) + ")");
    }
    if (pilots_tau < 2) {
        throw ConfigError("pilots_tau must be >= 2 (two channel unknowns per block)");
    }
    if (symbols_per_block_q < pilots_tau) {
        throw ConfigError("symbols_per_block_Q (" + std::to_string(symbols_per_block_q) +
                          ") must be >= pilots_tau (" + std::to_string(pilots_tau) + ")");
    }
    if (irs_mx < 1) {
        throw ConfigError("irs_Mx must be >= 1");
    }
    if (irs_my != 1) {
        throw ConfigError("irs_My must be 1");
    }
    if (!(element_spacing_over_lambda > 0.0)) {
        throw ConfigError("element_spacing_over_lambda must be > 0");
    }
    if (!(xi0_linear > 0.0)) {
        throw ConfigError("xi0_linear must be > 0");
    }
    if (!(distance_bs_irs_m > 0.0) || !(distance_bs_user_m > 0.0) ||
        !(distance_irs_user_m > 0.0)) {
        throw ConfigError("distance_bs_irs_m, distance_bs_user_m, distance_irs_user_m must be > 0");
    }
    if (!(pathloss_exponent_bu > 0.0) || !(pathloss_exponent_bi > 0.0) ||
        !(pathloss_exponent_iu > 0.0)) {
        throw ConfigError("path loss exponents must be > 0");
    }
    try {
        bs_irs_geometry().validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("theta_bi_rad/vartheta_bi_rad: ") + e.what());
    }
    try {
        irs_user_geometry().validate();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("theta_iu_rad/vartheta_iu_rad: ") + e.what());
    }
    if (grid_refinement_levels < 0) {
        throw ConfigError("grid_refinement_levels must be >= 0");
    }
    if (!(grid_refinement_shrink > 0.0 && grid_refinement_shrink < 1.0)) {
        throw ConfigError("grid_refinement_shrink must be in (0, 1)");
    }
    if (grid_fd_coarse_step_hz < 0.0 || grid_psi_coarse_step < 0.0) {
        throw ConfigError("grid_fd_coarse_step_hz/grid_psi_coarse_step must be >= 0 (0 = derived)");
    }
    if ((grid_fd_min_hz != 0.0 || grid_fd_max_hz != 0.0) && !(grid_fd_min_hz < grid_fd_max_hz)) {
        throw ConfigError("grid_fd_min_hz must be below grid_fd_max_hz");
    }
    if (trials < 1) {
        throw ConfigError("trials must be >= 1");
    }
}

SystemConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path.string());
    }
    SystemConfig config;
    const auto& table = key_table();
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line = line.substr(0, hash);
        }
        const std::string stripped = trim(line);
        if (stripped.empty()) {
            continue;
        }
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected 'key = value', got '" + stripped + "'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));
        const auto it = table.find(key);
        if (it == table.end()) {
            throw ConfigError(path.string() + ":" + std::to_string(line_no) + ": unknown key '" +
                              key + "'");
        }
        it->second.set(config, value);
    }
    config.validate();
    return config;
}

void save_config(const SystemConfig& config, const std::filesystem::path& path,
                 const std::string& header_comment) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write config file: " + path.string());
    }
    if (!header_comment.empty()) {
        std::istringstream lines(header_comment);
        std::string l;
        while (std::getline(lines, l)) {
            out << "# " << l << "\n";
        }
    }
    for (const auto& [key, binding] : key_table()) {
        out << key << " = " << binding.get(config) << "\n";
    }
    if (!out) {
        throw ConfigError("failed writing config file: " + path.string());
    }
}

FrameChannel synthesize_frame_channel(const SystemConfig& config, Rng& rng) {
    config.validate();
    FrameChannel frame;
    frame.block_duration_s = config.block_duration_s();
    frame.cascaded =
        cascaded_params(config.bs_irs_geometry(), config.irs_user_geometry(), config.speed_mps,
                        config.wavelength_m(), config.element_spacing_over_lambda, rng);
    frame.direct = sample_direct_channel_sequence(config.blocks_n, config.block_duration_s(),
                                                  config.f_max_hz(), config.direct_mean_power(),
                                                  rng);
    return frame;
}

}  // namespace irsim
