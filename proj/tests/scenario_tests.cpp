#include "visar/errors.hpp"
#include "visar/fixtures.hpp"
#include "visar/scenario.hpp"

#include "support/test_util.hpp"

#include <doctest/doctest.h>

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

using namespace visar;

namespace {

RayConfig tiny_rays() {
    RayConfig cfg;
    cfg.n_azimuth = 6;
    cfg.n_elevation = 5;
    return cfg;
}

CityModel four_building_city() {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    city.buildings.push_back(testutil::box_building("n1", 20, 20, 12, 10, 6));
    city.buildings.push_back(testutil::box_building("n2", 60, 20, 12, 10, 6));
    city.buildings.push_back(testutil::box_building("n3", 20, 60, 12, 10, 9));
    city.buildings.push_back(testutil::box_building("n4", 60, 60, 12, 10, 6));
    return city;
}

} // namespace

TEST_CASE("regional upzoning windows are the k nearest neighbors") {
    CityModel city = make_toy_commune();
    REQUIRE(city.buildings.size() == 20);

    ScenarioSet set = regional_upzoning(city, 1, 3);
    REQUIRE(set.scenarios.size() == 20);
    CHECK(planned_evaluations(set) == 20 * 4 + 20); // the desk-scale 100

    for (size_t j = 0; j < set.scenarios.size(); ++j) {
        const Scenario& s = set.scenarios[j];
        const Building& b = city.buildings[j];
        CHECK(s.scenario_id == "upzone-" + b.id);
        CHECK(s.modified_building_id == b.id);
        REQUIRE(s.evaluation_window.size() == 4);
        CHECK(s.evaluation_window[0] == b.id);

        const auto* edit = std::get_if<AddFloors>(&s.edit);
        REQUIRE(edit != nullptr);
        CHECK(edit->building_id == b.id);
        CHECK(edit->n_floors == 1);

        // Neighbor oracle: sort the other buildings by (distance, id).
        Vec2 me = polygon_centroid(b.footprint);
        std::vector<std::pair<double, std::string>> by_dist;
        for (const auto& o : city.buildings) {
            if (o.id == b.id) continue;
            by_dist.push_back({(polygon_centroid(o.footprint) - me).norm(), o.id});
        }
        std::sort(by_dist.begin(), by_dist.end());
        for (int k = 0; k < 3; ++k)
            CHECK(s.evaluation_window[static_cast<size_t>(k) + 1] ==
                  by_dist[static_cast<size_t>(k)].second);
    }

    CHECK_THROWS_WITH_AS(regional_upzoning(city, 0, 3), doctest::Contains("n_floors"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(regional_upzoning(city, 1, 0), doctest::Contains("k_neighbors"),
                         ValidationError);
    CHECK_THROWS_WITH_AS(regional_upzoning(city, 1, 20), doctest::Contains("J > k"),
                         ValidationError);
}

TEST_CASE("survey-scale plan sizes") {
    // 204 buildings, 9 neighbors: 204 * 10 window slots + 204 references.
    CityModel city = testutil::flat_city(100, 100, 10.0);
    for (int row = 0; row < 12; ++row)
        for (int col = 0; col < 17; ++col) {
            std::string id = "g" + std::to_string(row * 17 + col);
            city.buildings.push_back(
                testutil::box_building(id, 20.0 + col * 50.0, 20.0 + row * 70.0, 10, 8, 5));
        }
    REQUIRE(city.buildings.size() == 204);

    ScenarioSet set = regional_upzoning(city, 1, 9);
    CHECK(set.scenarios.size() == 204);
    CHECK(planned_evaluations(set) == 2244);
}

TEST_CASE("single development window") {
    CityModel city = make_toy_commune();
    std::vector<Building> massing = make_toy_massing();
    std::vector<std::string> removed = toy_massing_removed_ids();

    ScenarioSet set = single_development(city, removed, massing, 500.0);
    REQUIRE(set.scenarios.size() == 1);
    const Scenario& s = set.scenarios[0];
    CHECK(s.scenario_id == "development");
    CHECK(s.modified_building_id.empty());

    // Window oracle: surviving buildings within 500 m of the area-weighted
    // massing centroid, sorted by id.
    double ax = 0, ay = 0, at = 0;
    for (const auto& b : massing) {
        double a = polygon_area(b.footprint);
        Vec2 c = polygon_centroid(b.footprint);
        ax += a * c.x;
        ay += a * c.y;
        at += a;
    }
    Vec2 center{ax / at, ay / at};
    std::vector<std::string> want;
    for (const auto& b : city.buildings) {
        if (std::find(removed.begin(), removed.end(), b.id) != removed.end()) continue;
        if ((polygon_centroid(b.footprint) - center).norm() <= 500.0) want.push_back(b.id);
    }
    std::sort(want.begin(), want.end());
    CHECK(s.evaluation_window == want);
    CHECK(!want.empty());
    for (const auto& r : removed)
        CHECK(std::find(s.evaluation_window.begin(), s.evaluation_window.end(), r) ==
              s.evaluation_window.end());
    for (const auto& b : massing)
        CHECK(std::find(s.evaluation_window.begin(), s.evaluation_window.end(), b.id) ==
              s.evaluation_window.end());

    CHECK_THROWS_WITH_AS(single_development(city, removed, massing, 0.0),
                         doctest::Contains("radius"), ValidationError);
    CHECK_THROWS_WITH_AS(single_development(city, removed, std::vector<Building>{}, 500.0),
                         doctest::Contains("massing has no buildings"), ValidationError);
    CHECK_THROWS_WITH_AS(single_development(city, removed, massing, 0.5),
                         doctest::Contains("empty evaluation window"), ValidationError);
    CHECK_THROWS_AS(single_development(city, {"zzz"}, massing, 500.0), ValidationError);

    // A massing id clashing with a surviving building is rejected.
    std::vector<Building> clash = massing;
    clash[0].id = "b01";
    CHECK_THROWS_AS(single_development(city, removed, clash, 500.0), ValidationError);
}

TEST_CASE("run plan executes exactly the planned evaluations") {
    CityModel city = four_building_city();
    ScenarioSet set = regional_upzoning(city, 2, 1);
    MetricRegistry reg = default_registry();
    VcScorer scorer = make_reference_scorer(reg);

    RunResult r1 = run_plan(set, tiny_rays(), reg, scorer, 1);
    CHECK(r1.evaluations == planned_evaluations(set)); // 4*2 + 4 = 12
    CHECK(r1.ref.scenario_id == "ref");
    CHECK(r1.ref.values.size() == 4);
    REQUIRE(r1.alts.size() == 4);
    CHECK(r1.vc_alt.size() == 8);
    CHECK(r1.modified_building.at("upzone-n1") == "n1");

    // vc entries follow scenario order, window order.
    CHECK(r1.vc_alt[0].scenario_id == "upzone-n1");
    CHECK(r1.vc_alt[0].building_id == "n1");

    // Worker count must not change a single byte of the results.
    RunResult r3 = run_plan(set, tiny_rays(), reg, scorer, 3);
    CHECK(r3.ref.values == r1.ref.values);
    CHECK(r3.vc_ref == r1.vc_ref);
    REQUIRE(r3.alts.size() == r1.alts.size());
    for (size_t i = 0; i < r1.alts.size(); ++i) {
        CHECK(r3.alts[i].scenario_id == r1.alts[i].scenario_id);
        CHECK(r3.alts[i].values == r1.alts[i].values);
    }
    REQUIRE(r3.vc_alt.size() == r1.vc_alt.size());
    for (size_t i = 0; i < r1.vc_alt.size(); ++i) {
        CHECK(r3.vc_alt[i].scenario_id == r1.vc_alt[i].scenario_id);
        CHECK(r3.vc_alt[i].building_id == r1.vc_alt[i].building_id);
        CHECK(r3.vc_alt[i].vc == r1.vc_alt[i].vc);
    }

    // Up-zoning a building never costs it sky at its own viewpoints.
    int sky = reg.index_of("maxVSH:Sky");
    REQUIRE(sky >= 0);
    for (size_t i = 0; i < set.scenarios.size(); ++i) {
        const std::string& bid = set.scenarios[i].modified_building_id;
        double ref_sky = r1.ref.values.at(bid)[static_cast<size_t>(sky)];
        double alt_sky = r1.alts[i].values.at(bid)[static_cast<size_t>(sky)];
        CHECK(alt_sky >= ref_sky);
    }
}

TEST_CASE("run plan validation") {
    CityModel city = four_building_city();
    MetricRegistry reg = default_registry();
    VcScorer scorer = make_reference_scorer(reg);

    ScenarioSet empty;
    empty.reference = city;
    RunResult r = run_plan(empty, tiny_rays(), reg, scorer, 1);
    CHECK(r.evaluations == 0);
    CHECK(r.alts.empty());
    CHECK(r.ref.values.empty());

    ScenarioSet ghost;
    ghost.reference = city;
    Scenario s;
    s.scenario_id = "x";
    s.edit = AddFloors{"n1", 1};
    s.modified_building_id = "n1";
    s.evaluation_window = {"n1", "phantom"};
    ghost.scenarios.push_back(s);
    CHECK_THROWS_WITH_AS(run_plan(ghost, tiny_rays(), reg, scorer, 1),
                         doctest::Contains("window building 'phantom'"), ValidationError);

    ScenarioSet hollow;
    hollow.reference = city;
    s.evaluation_window = {};
    hollow.scenarios.push_back(s);
    CHECK_THROWS_WITH_AS(run_plan(hollow, tiny_rays(), reg, scorer, 1),
                         doctest::Contains("empty window"), ValidationError);

    VcScorer misfit = scorer;
    misfit.metric_names.pop_back();
    misfit.weights.pop_back();
    ScenarioSet set = regional_upzoning(city, 1, 1);
    CHECK_THROWS_AS(run_plan(set, tiny_rays(), reg, misfit, 1), ValidationError);
}

TEST_CASE("plan manifest") {
    testutil::TempDir tmp;
    CityModel city = four_building_city();

    ScenarioSet up = regional_upzoning(city, 2, 1);
    write_plan_manifest(up, tmp.file("up.json"));
    auto j = nlohmann::json::parse(testutil::slurp(tmp.file("up.json")));
    CHECK(j.at("reference_scenario") == "ref");
    CHECK(j.at("planned_evaluations") == planned_evaluations(up));
    REQUIRE(j.at("scenarios").size() == 4);
    const auto& s0 = j["scenarios"][0];
    CHECK(s0.at("scenario_id") == "upzone-n1");
    CHECK(s0.at("modified_building_id") == "n1");
    CHECK(s0.at("edit").at("type") == "add_floors");
    CHECK(s0.at("edit").at("n_floors") == 2);
    CHECK(s0.at("window").size() == 2);

    std::vector<Building> massing = {testutil::box_building("tower", 40, 40, 10, 10, 30)};
    ScenarioSet dev = single_development(city, {"n1"}, massing, 500.0);
    write_plan_manifest(dev, tmp.file("dev.json"));
    auto dj = nlohmann::json::parse(testutil::slurp(tmp.file("dev.json")));
    const auto& d0 = dj["scenarios"][0];
    CHECK(d0.at("scenario_id") == "development");
    CHECK(d0.at("modified_building_id").is_null());
    CHECK(d0.at("edit").at("type") == "replace_massing");
    CHECK(d0.at("edit").at("removed_ids") == nlohmann::json::array({"n1"}));
    CHECK(d0.at("edit").at("added_ids") == nlohmann::json::array({"tower"}));
}
