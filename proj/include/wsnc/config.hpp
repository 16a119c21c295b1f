#pragma once

#include "wsnc/optimize.hpp"
#include "wsnc/scenario.hpp"
#include "wsnc/sim.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wsnc {

/// Battery section: a preset split of a total charge, or explicit charges.
struct BatterySpec {
    std::optional<BatteryPreset> preset;
    double total_j = 0.0;
    std::vector<double> charges_j;

    bool empty() const noexcept { return !preset && charges_j.empty(); }
    /// Charges for one path; throws DomainError if explicit charges do not
    /// match its hop count.
    std::vector<double> for_path(const PathGeometry& geometry) const;
};

/// Simulation-driven optimizer settings read from [sim].
struct SimOptimizerSpec {
    std::int64_t slots = 1'000'000;
    double delta_p_init_w = 0.01e-3;
    int max_halvings = 15;
};

/// Everything one scenario file describes. `paths` holds one Scenario per
/// path, all sharing calibration, service, transceiver and batteries.
struct ScenarioFile {
    std::string name = "scenario";
    std::vector<std::string> path_ids;
    std::vector<Scenario> paths;
    QoSTarget qos;
    OptimizerConfig optimizer;
    SimConfig sim;
    SimOptimizerSpec sim_optimizer;
    BatterySpec batteries;

    SimOptimizerConfig sim_optimizer_config() const;
};

/// Parse INI text. `overrides` are "section.key=value" strings applied on top
/// of the file; errors in them report line 0.
ScenarioFile parse_scenario(std::string_view text, const std::vector<std::string>& overrides = {});

/// Read and parse a file (empty path: defaults plus overrides).
ScenarioFile load_scenario(const std::string& path, const std::vector<std::string>& overrides = {});

/// INI text that parses back to the same ScenarioFile. Quantities are written
/// in SI units at full precision.
std::string serialize_scenario(const ScenarioFile& file);

}  // namespace wsnc
