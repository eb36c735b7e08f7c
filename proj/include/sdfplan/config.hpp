#pragma once

#include <filesystem>
#include <string>

#include "sdfplan/mesh_sdf.hpp"
#include "sdfplan/planner.hpp"
#include "sdfplan/train.hpp"

namespace sdfplan {

/// Settings file shared by the command-line tools. Every section is optional;
/// absent fields keep their defaults.
///
///   {"format": "sdfplan-config", "version": 1,
///    "planner": {...}, "cost": {...}, "train": {...}, "synthesis": {...}}
struct RunConfig {
    PlannerConfig planner;
    CostSpec cost;
    TrainConfig train;
    SynthesisParams synthesis;
    double offset_scale = 1.0;  // scales default_offsets() when synthesis.offsets is empty
    double far_field_margin = 0.3;  // arm checker culling, see Scene3dChecker

    /// Resolved settings as canonical JSON (stable key order).
    std::string to_json() const;
};

RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::filesystem::path& path);

}  // namespace sdfplan
