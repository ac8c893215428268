#pragma once

#include "visar/citymodel.hpp"
#include "visar/hedonic.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace visar {

/// Metric vectors of one scenario, keyed by building id. The key set is the
/// evaluation mask: only evaluated buildings appear.
struct MetricMatrix {
    std::string scenario_id;
    std::vector<std::string> metric_names;
    std::map<std::string, std::vector<double>> values;
};

inline constexpr uint8_t kFlagNone = 0;
inline constexpr uint8_t kFlagNewView = 1;        ///< ref 0, alt > 0: relative change undefined
inline constexpr uint8_t kFlagFullObstruction = 2; ///< ref > 0, alt 0: relative change -1

/// Per (building, scenario) change record. rel_change stays empty until
/// relative_change() fills it (NaN where flagged new_view).
struct ImpactEntry {
    std::string building_id;
    std::string scenario_id;
    std::vector<double> v_ref;
    std::vector<double> v_alt;
    std::vector<double> delta;
    std::vector<double> rel_change;
    std::vector<uint8_t> flags;
};

struct ImpactMatrix {
    std::vector<std::string> metric_names;
    std::vector<ImpactEntry> entries; ///< scenario order, then building id
    /// scenario id -> modified building id; absent for massing replacements.
    std::map<std::string, std::string> modified_building;
};

/// Entrywise v_alt - v_ref over the intersection of the evaluation masks.
ImpactMatrix delta(const MetricMatrix& v_alt, const MetricMatrix& v_ref);

/// delta() over several scenarios against one reference, concatenated.
ImpactMatrix delta_many(const std::vector<MetricMatrix>& alts, const MetricMatrix& v_ref);

/// Fills rel_change and flags: rc = delta / v_ref when v_ref > 0 (-1 plus
/// full_obstruction flag when v_alt = 0); 0 when nothing was there and
/// nothing changed; new_view flag (rc = NaN) when a share appears from 0.
ImpactMatrix relative_change(const ImpactMatrix& impact);

struct MevmEntry {
    std::string building_id;
    std::string scenario_id;
    std::string metric_name; ///< empty when no eligible metric
    double rc = 0.0;
};

/// Maximally exposed view metric per entry: the metric with the largest
/// |relative change| (sign kept, new_view entries skipped, ties resolved by
/// registry order). loss_only restricts candidates to rc < 0.
std::vector<MevmEntry> mevm(const ImpactMatrix& impact, bool loss_only = false);

struct EffectVector {
    std::string scenario_id;
    std::vector<double> values; ///< one per metric
};

/// Delta at each scenario's own modified building. Throws for scenarios
/// without a modified-building annotation.
std::vector<EffectVector> direct_effects(const ImpactMatrix& impact);

/// Off-diagonal entries: every (j, s) where j is not s's modified building.
std::vector<ImpactEntry> local_effects(const ImpactMatrix& impact);

/// Per-scenario sum of local effects.
std::vector<EffectVector> cumulative_local_effects(const ImpactMatrix& impact);

struct ExposureVector {
    std::string building_id;
    std::vector<double> values;      ///< most negative delta across scenarios, else 0
    std::vector<uint8_t> no_adverse; ///< 1 when no negative entry existed
};

/// Worst adverse change each building faces across all scenarios that did
/// not modify it (the value at risk), per metric.
std::vector<ExposureVector> exposure_to_local_effects(const ImpactMatrix& impact);

struct VcEntry {
    std::string scenario_id;
    std::string building_id;
    double vc = 0.0;
};

struct PriceImpact {
    struct Cell {
        std::string scenario_id;
        std::string building_id;
        double d_ln_price = 0.0;
        double relative = 0.0;
    };
    struct PerScenario {
        std::string scenario_id;
        bool has_direct = false;
        double de = 0.0;  ///< direct effect (modified building's d_ln_price)
        double cle = 0.0; ///< cumulative local effect (sum over neighbors)
        double net = 0.0; ///< de + cle
    };
    struct PerBuilding {
        std::string building_id;
        double ele = 0.0; ///< most negative d_ln_price across others' scenarios
        bool no_adverse = false;
    };
    std::vector<Cell> cells;
    std::vector<PerScenario> per_scenario;
    std::vector<PerBuilding> per_building;
};

/// Translates VC changes into log-price changes with the agglomeration's VC
/// coefficient and aggregates them into direct, cumulative and exposure
/// effects.
PriceImpact price_impact(const std::map<std::string, double>& vc_ref,
                         const std::vector<VcEntry>& vc_alt, const HedonicModel& model,
                         const std::string& agglomeration,
                         const std::map<std::string, std::string>& modified_building);

struct DriverRanking {
    std::string building_id;
    std::string scenario_id;
    /// (metric name, weight * delta), |contribution| descending, zeros omitted.
    std::vector<std::pair<std::string, double>> ranked;
};

/// Ranks which metrics drive each entry's VC change under a linear scorer.
std::vector<DriverRanking> rank_metric_drivers(const ImpactMatrix& impact,
                                               const VcScorer& scorer);

/// Long CSV: building_id, scenario_id, metric, v_ref, v_alt, delta,
/// rel_change, flags.
void write_impact_csv(const ImpactMatrix& impact, const std::string& path);

/// Map-ready per-building rollup of a price impact.
struct BuildingImpactSummary {
    std::string building_id;
    std::optional<double> de;         ///< direct effect when the building was up-zoned
    std::optional<double> d_ln_price; ///< de, or the worst local effect otherwise
    std::optional<double> rel_price_change;
    std::optional<double> ele;
    bool no_adverse = false;
    std::string top_driver;
};

std::vector<BuildingImpactSummary> summarize_impacts(
    const PriceImpact& pi, const std::map<std::string, std::string>& modified_building,
    const std::vector<DriverRanking>& rankings);

/// GeoJSON FeatureCollection: every city building's footprint with its
/// summary properties (null where the building was never evaluated).
void write_impact_geojson(const CityModel& city,
                          const std::vector<BuildingImpactSummary>& summaries,
                          const std::string& path);

} // namespace visar
