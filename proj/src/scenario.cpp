#include "visar/scenario.hpp"
#include "visar/errors.hpp"
#include "visar/parallel.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

namespace visar {

using nlohmann::json;

namespace {

Vec2 building_centroid(const Building& b) { return polygon_centroid(b.footprint); }

} // namespace

ScenarioSet single_development(const CityModel& city, const std::vector<std::string>& removed_ids,
                               const std::string& massing_path, double radius) {
    return single_development(city, removed_ids, read_buildings_geojson(massing_path), radius);
}

ScenarioSet single_development(const CityModel& city, const std::vector<std::string>& removed_ids,
                               const std::vector<Building>& massing, double radius) {
    if (!(radius > 0.0)) throw ValidationError("radius must be > 0");
    if (massing.empty()) throw ValidationError("massing has no buildings");

    ScenarioSet set;
    set.reference = city;

    ReplaceMassing edit;
    edit.removed_ids = removed_ids;
    edit.added = massing;
    // Validates removed ids, id clashes and (below) the terrain extent.
    CityModel alt = apply_edit(city, edit);
    validate_city(alt);

    // Area-weighted centroid of the new massing.
    double ax = 0.0, ay = 0.0, atot = 0.0;
    for (const auto& b : massing) {
        double a = polygon_area(b.footprint);
        Vec2 c = building_centroid(b);
        ax += a * c.x;
        ay += a * c.y;
        atot += a;
    }
    Vec2 center{ax / atot, ay / atot};

    std::set<std::string> removed(removed_ids.begin(), removed_ids.end());
    Scenario s;
    s.scenario_id = "development";
    s.edit = edit;
    for (const auto& b : city.buildings) {
        if (removed.count(b.id)) continue;
        if ((building_centroid(b) - center).norm() <= radius) s.evaluation_window.push_back(b.id);
    }
    std::sort(s.evaluation_window.begin(), s.evaluation_window.end());
    if (s.evaluation_window.empty()) throw ValidationError("empty evaluation window");

    set.scenarios.push_back(std::move(s));
    return set;
}

ScenarioSet regional_upzoning(const CityModel& city, int n_floors, int k_neighbors) {
    if (n_floors < 1) throw ValidationError("n_floors must be >= 1");
    if (k_neighbors < 1) throw ValidationError("k_neighbors must be >= 1");
    const size_t j_count = city.buildings.size();
    if (j_count <= static_cast<size_t>(k_neighbors))
        throw ValidationError("need more buildings than neighbors (J > k)");

    std::vector<Vec2> centroids(j_count);
    for (size_t i = 0; i < j_count; ++i) centroids[i] = building_centroid(city.buildings[i]);

    ScenarioSet set;
    set.reference = city;
    for (size_t j = 0; j < j_count; ++j) {
        const Building& b = city.buildings[j];
        Scenario s;
        s.scenario_id = "upzone-" + b.id;
        s.edit = AddFloors{b.id, n_floors};
        s.modified_building_id = b.id;

        // k nearest neighbors by centroid distance, ties by id.
        std::vector<size_t> others;
        others.reserve(j_count - 1);
        for (size_t i = 0; i < j_count; ++i)
            if (i != j) others.push_back(i);
        std::sort(others.begin(), others.end(), [&](size_t a, size_t c) {
            double da = (centroids[a] - centroids[j]).norm();
            double dc = (centroids[c] - centroids[j]).norm();
            if (da != dc) return da < dc;
            return city.buildings[a].id < city.buildings[c].id;
        });
        s.evaluation_window.push_back(b.id);
        for (int k = 0; k < k_neighbors; ++k)
            s.evaluation_window.push_back(city.buildings[others[k]].id);

        set.scenarios.push_back(std::move(s));
    }
    return set;
}

size_t planned_evaluations(const ScenarioSet& set) {
    std::set<std::string> ref_buildings;
    size_t alt = 0;
    for (const auto& s : set.scenarios) {
        alt += s.evaluation_window.size();
        ref_buildings.insert(s.evaluation_window.begin(), s.evaluation_window.end());
    }
    return alt + ref_buildings.size();
}

RunResult run_plan(const ScenarioSet& set, const RayConfig& config,
                   const MetricRegistry& registry, const VcScorer& scorer, int workers,
                   double spacing, double story_height) {
    check_alignment(scorer, registry);
    for (const auto& s : set.scenarios) {
        if (s.evaluation_window.empty())
            throw ValidationError("scenario '" + s.scenario_id + "' has an empty window");
        for (const auto& bid : s.evaluation_window)
            if (find_building(set.reference, bid) < 0)
                throw ValidationError("scenario '" + s.scenario_id + "': window building '" + bid +
                                      "' not in the reference model");
    }

    RunResult result;
    result.ref.scenario_id = "ref";
    result.ref.metric_names = registry.names();

    // Reference pass: each windowed building once, against the shared scene.
    std::vector<std::string> ref_ids;
    {
        std::set<std::string> uniq;
        for (const auto& s : set.scenarios)
            uniq.insert(s.evaluation_window.begin(), s.evaluation_window.end());
        ref_ids.assign(uniq.begin(), uniq.end());
    }

    struct Slot {
        std::vector<double> metrics;
        double vc = 0.0;
    };

    auto evaluate = [&](const Bvh& bvh, const CityModel& model, const std::string& bid) {
        VisualShareTensor tensor =
            visual_share_with(bvh, model, bid, config, spacing, story_height);
        MetricVector mv = aggregate(tensor, registry);
        Slot slot;
        slot.vc = score(mv, scorer).vc;
        slot.metrics = std::move(mv.values);
        return slot;
    };

    {
        Scene scene = build_scene(set.reference);
        Bvh bvh(scene);
        std::vector<Slot> slots(ref_ids.size());
        parallel_for(ref_ids.size(), workers,
                     [&](size_t i) { slots[i] = evaluate(bvh, set.reference, ref_ids[i]); });
        for (size_t i = 0; i < ref_ids.size(); ++i) {
            result.ref.values[ref_ids[i]] = std::move(slots[i].metrics);
            result.vc_ref[ref_ids[i]] = slots[i].vc;
        }
        result.evaluations += ref_ids.size();
    }

    // Scenario passes: edited model per scenario, window buildings fanned out.
    for (const auto& s : set.scenarios) {
        CityModel alt = apply_edit(set.reference, s.edit);
        alt.scenario_id = s.scenario_id;
        Scene scene = build_scene(alt);
        Bvh bvh(scene);

        std::vector<Slot> slots(s.evaluation_window.size());
        parallel_for(s.evaluation_window.size(), workers, [&](size_t i) {
            slots[i] = evaluate(bvh, alt, s.evaluation_window[i]);
        });

        MetricMatrix mm;
        mm.scenario_id = s.scenario_id;
        mm.metric_names = result.ref.metric_names;
        for (size_t i = 0; i < s.evaluation_window.size(); ++i) {
            mm.values[s.evaluation_window[i]] = std::move(slots[i].metrics);
            result.vc_alt.push_back({s.scenario_id, s.evaluation_window[i], slots[i].vc});
        }
        result.alts.push_back(std::move(mm));
        result.modified_building[s.scenario_id] = s.modified_building_id;
        result.evaluations += s.evaluation_window.size();
    }
    return result;
}

void write_plan_manifest(const ScenarioSet& set, const std::string& path) {
    json scenarios = json::array();
    for (const auto& s : set.scenarios) {
        json edit;
        if (const auto* af = std::get_if<AddFloors>(&s.edit)) {
            edit = {{"type", "add_floors"},
                    {"building_id", af->building_id},
                    {"n_floors", af->n_floors}};
        } else {
            const auto& rm = std::get<ReplaceMassing>(s.edit);
            std::vector<std::string> added_ids;
            for (const auto& b : rm.added) added_ids.push_back(b.id);
            edit = {{"type", "replace_massing"},
                    {"removed_ids", rm.removed_ids},
                    {"added_ids", added_ids}};
        }
        scenarios.push_back({{"scenario_id", s.scenario_id},
                             {"edit", std::move(edit)},
                             {"modified_building_id",
                              s.modified_building_id.empty() ? json(nullptr)
                                                             : json(s.modified_building_id)},
                             {"window", s.evaluation_window}});
    }
    json j = {{"reference_scenario", set.reference.scenario_id},
              {"planned_evaluations", planned_evaluations(set)},
              {"scenarios", std::move(scenarios)}};
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(1) << "\n";
}

} // namespace visar
