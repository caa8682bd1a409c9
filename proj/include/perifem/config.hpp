#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "perifem/fracture.hpp"
#include "perifem/mesh.hpp"

namespace perifem {

/// Built-in specimen setups: geometry, loading schedule and material defaults.
struct ScenarioPreset {
    std::string name;
    SpecimenGeometry geometry;
    std::vector<BoundaryCondition> bcs;
    std::vector<TrackedForce> tracked;
    int increments = 20;
    double E = 30000.0;
    double s_crit = 0.02;
};

/// notched_beam, brazilian_disk or den_plate; throws std::invalid_argument otherwise.
ScenarioPreset scenario_preset(const std::string& name);
std::vector<std::string> scenario_names();

struct OutputOptions {
    std::string name = "run";
    std::filesystem::path dir = ".";
    bool vtk = true;
    int vtk_every = 1;
    bool history = true;
    bool pe_csv = false;
    bool mesh = false;
};

struct ParsedConfig {
    RunConfig run;
    OutputOptions output;
    std::string scenario;   ///< preset name, "rect" or "file"
};

/// Parses the INI-style run configuration (sections [material], [geometry],
/// [loading], [run], [output]). Relative mesh paths resolve against base_dir.
ParsedConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ParsedConfig load_config(const std::filesystem::path& path);

} // namespace perifem
