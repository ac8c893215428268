#pragma once

#include "visar/citymodel.hpp"
#include "visar/impact.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"
#include "visar/visibility.hpp"

#include <map>
#include <string>
#include <vector>

namespace visar {

struct Scenario {
    std::string scenario_id;
    ScenarioEdit edit;
    std::string modified_building_id;           ///< empty for massing replacement
    std::vector<std::string> evaluation_window; ///< building ids to evaluate
};

struct ScenarioSet {
    CityModel reference;
    std::vector<Scenario> scenarios;
};

inline constexpr double kDefaultDevelopmentRadius = 500.0; ///< m
inline constexpr int kDefaultUpzoneFloors = 1;
inline constexpr int kDefaultNeighborCount = 9;

/// One scenario replacing `removed_ids` with the massing read from a
/// GeoJSON file. The evaluation window is every surviving building whose
/// footprint centroid lies within `radius` of the massing's centroid; the
/// new massing itself has no reference state and is excluded.
ScenarioSet single_development(const CityModel& city, const std::vector<std::string>& removed_ids,
                               const std::string& massing_path,
                               double radius = kDefaultDevelopmentRadius);

/// Same, with the massing already parsed.
ScenarioSet single_development(const CityModel& city, const std::vector<std::string>& removed_ids,
                               const std::vector<Building>& massing,
                               double radius = kDefaultDevelopmentRadius);

/// One AddFloors scenario per building; each window is the modified
/// building plus its k nearest neighbors by centroid distance (ties by id).
ScenarioSet regional_upzoning(const CityModel& city, int n_floors = kDefaultUpzoneFloors,
                              int k_neighbors = kDefaultNeighborCount);

/// Building-level visual-share evaluations the plan will execute: one per
/// window entry plus one reference evaluation per distinct windowed building.
size_t planned_evaluations(const ScenarioSet& set);

struct RunResult {
    MetricMatrix ref;                  ///< scenario_id "ref"
    std::vector<MetricMatrix> alts;    ///< one per scenario, input order
    std::map<std::string, double> vc_ref;
    std::vector<VcEntry> vc_alt;       ///< scenario order, window order
    std::map<std::string, std::string> modified_building; ///< scenario -> id
    size_t evaluations = 0;            ///< instrumentation counter
};

/// Executes the evaluation plan: reference shares once per windowed
/// building, then each scenario's window against its edited model. Jobs fan
/// out to `workers` threads; results land in preassigned slots, so outputs
/// are identical for any worker count.
RunResult run_plan(const ScenarioSet& set, const RayConfig& config,
                   const MetricRegistry& registry, const VcScorer& scorer, int workers = 1,
                   double spacing = kDefaultViewpointSpacing,
                   double story_height = kDefaultStoryHeight);

/// JSON manifest of the plan: scenario ids, edits and windows.
void write_plan_manifest(const ScenarioSet& set, const std::string& path);

} // namespace visar
