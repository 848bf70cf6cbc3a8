#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "irsim/montecarlo.hpp"

namespace irsim {

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
};

/// Runs one named experiment (fig3 | fig4 | fig5 | custom) and writes its CSV
/// outputs plus a replayable manifest into out_dir. Returns 0 when every
/// requested output was written and is nonempty. The figure experiments pin
/// their headline parameters (transmit power, stage split, element count or
/// the respective sweep); `custom` runs the configuration as given.
int run_named(const std::string& experiment, SystemConfig config,
              const std::filesystem::path& out_dir, const RunOverrides& overrides = {});

/// Trial-count default applied when neither the config file nor the command
/// line set one: 500 for the distribution experiments (fig3, custom), 200 per
/// sweep point for the rate curves (fig4, fig5).
int default_trials(const std::string& experiment);

}  // namespace irsim
