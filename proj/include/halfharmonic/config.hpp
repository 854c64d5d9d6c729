#pragma once

#include "halfharmonic/flow.hpp"
#include "halfharmonic/gluing.hpp"
#include "halfharmonic/grid.hpp"

#include <iosfwd>
#include <optional>
#include <string>

namespace hh {

enum class InitialKind { constant, bubble, noisy_bubble };

struct InitialData {
    InitialKind kind = InitialKind::noisy_bubble;
    BubbleParams bubble;
};

struct NoiseConfig {
    bool enabled = true;
    double epsilon = 0.1;
    double q = 0.0;
    // "default": z2 = -eps r^2/(1+r^2); "reversed": the opposite sign.
    std::string family = "default";

    NoiseSpec spec() const;
};

struct RunConfig {
    GridSpec grid = make_grid(400.0, 65536);
    GridSpec verify_grid = make_grid(200.0, 16384);
    FlowConfig flow;
    InitialData initial;
    NoiseConfig noise;
    GluingConfig gluing;
    bool cross_check = false;
    std::string out_dir = ".";
    std::size_t dump_stride = 0;  // full fields every K recorded samples; 0 disables
};

RunConfig default_config();

// INI text with sections grid, verify, flow, initial, noise, gluing, output.
// Unknown sections or keys and malformed values raise ConfigError.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);

// U + Pi Z* + a U on the grid, or the constant map.
SphereMapField initial_map(const RunConfig& cfg);

}  // namespace hh
