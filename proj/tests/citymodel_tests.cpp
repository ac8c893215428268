#include "visar/citymodel.hpp"
#include "visar/errors.hpp"

#include "support/test_util.hpp"

#include <doctest/doctest.h>
#include <nlohmann/json.hpp>

#include <string>

using namespace visar;
using testutil::TempDir;
using json = nlohmann::json;

namespace {

std::string feature(const std::string& id, const std::string& coords,
                    const std::string& extra_props = "") {
    return R"({"type":"Feature","properties":{"id":")" + id +
           R"(","ground_elevation":0,"eave_height":10)" + extra_props +
           R"(},"geometry":{"type":"Polygon","coordinates":)" + coords + "}}";
}

std::string collection(const std::string& features) {
    return R"({"type":"FeatureCollection","features":[)" + features + "]}";
}

const char* kSquare = "[[[0,0],[10,0],[10,10],[0,10],[0,0]]]";

void check_throws_mentioning(const std::string& path, const std::string& needle) {
    try {
        read_buildings_geojson(path);
        FAIL_CHECK("expected a ValidationError mentioning '" << needle << "'");
    } catch (const ValidationError& e) {
        CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
}

} // namespace

TEST_CASE("buildings geojson round trip") {
    std::vector<Building> bs;
    bs.push_back(testutil::box_building("flat-1", 0, 0, 10, 5, 8));
    Building g = testutil::box_building("gabled-1", 20, 0, 12, 6, 7);
    g.roof.type = RoofType::Gabled;
    g.roof.ridge_height = 10.5;
    g.roof.ridge_axis = {0.0, 1.0};
    g.ground_elevation = 455.25;
    bs.push_back(g);

    TempDir tmp;
    write_buildings_geojson(bs, tmp.file("b.geojson"));
    auto r = read_buildings_geojson(tmp.file("b.geojson"));

    REQUIRE(r.size() == 2);
    CHECK(r[0].id == "flat-1");
    CHECK(r[0].roof.type == RoofType::Flat);
    CHECK(r[0].eave_height == 8.0);
    CHECK(r[1].id == "gabled-1");
    CHECK(r[1].roof.type == RoofType::Gabled);
    CHECK(r[1].roof.ridge_height == 10.5);
    CHECK(r[1].roof.ridge_axis == Vec2{0.0, 1.0});
    CHECK(r[1].ground_elevation == 455.25);
    CHECK(r[1].footprint.rings[0].size() == 4); // closing vertex dropped
    CHECK(polygon_area(r[1].footprint) == doctest::Approx(72.0));
}

TEST_CASE("geojson validation names the offending building") {
    TempDir tmp;

    testutil::spit(tmp.file("dup.geojson"),
                   collection(feature("twin", kSquare) + "," + feature("twin", kSquare)));
    check_throws_mentioning(tmp.file("dup.geojson"), "twin");

    testutil::spit(tmp.file("tiny.geojson"),
                   collection(feature("needle", "[[[0,0],[1,1],[0,0]]]")));
    check_throws_mentioning(tmp.file("tiny.geojson"), "needle");

    testutil::spit(tmp.file("bowtie.geojson"),
                   collection(feature("knot", "[[[0,0],[4,4],[4,0],[0,4],[0,0]]]")));
    check_throws_mentioning(tmp.file("bowtie.geojson"), "knot");

    testutil::spit(tmp.file("flatline.geojson"),
                   collection(feature("flatline", "[[[0,0],[4,0],[8,0],[0,0]]]")));
    check_throws_mentioning(tmp.file("flatline.geojson"), "flatline");

    testutil::spit(
        tmp.file("noridge.geojson"),
        collection(feature("peak", kSquare, R"(,"roof_type":"gabled")")));
    check_throws_mentioning(tmp.file("noridge.geojson"), "peak");

    testutil::spit(tmp.file("lowridge.geojson"),
                   collection(feature("sunken", kSquare,
                                      R"(,"roof_type":"gabled","ridge_height":3)")));
    check_throws_mentioning(tmp.file("lowridge.geojson"), "sunken");

    testutil::spit(tmp.file("line.geojson"),
                   R"({"type":"FeatureCollection","features":[{"type":"Feature",
                       "properties":{"id":"wire","ground_elevation":0,"eave_height":10},
                       "geometry":{"type":"LineString","coordinates":[[0,0],[1,1]]}}]})");
    check_throws_mentioning(tmp.file("line.geojson"), "wire");

    testutil::spit(tmp.file("anon.geojson"),
                   R"({"type":"FeatureCollection","features":[{"type":"Feature",
                       "properties":{"ground_elevation":0,"eave_height":10},
                       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})");
    CHECK_THROWS_AS(read_buildings_geojson(tmp.file("anon.geojson")), ValidationError);

    testutil::spit(tmp.file("noprops.geojson"),
                   R"({"type":"FeatureCollection","features":[{"type":"Feature",
                       "properties":{"id":"bare"},
                       "geometry":{"type":"Polygon","coordinates":[[[0,0],[1,0],[1,1],[0,0]]]}}]})");
    check_throws_mentioning(tmp.file("noprops.geojson"), "bare");

    testutil::spit(tmp.file("notjson.geojson"), "]{[");
    CHECK_THROWS_AS(read_buildings_geojson(tmp.file("notjson.geojson")), ValidationError);
}

TEST_CASE("gabled ridge axis defaults to the longest edge") {
    TempDir tmp;
    // 20 m edges run along x, 8 m edges along y.
    testutil::spit(tmp.file("g.geojson"),
                   collection(feature("barn", "[[[0,0],[20,0],[20,8],[0,8],[0,0]]]",
                                      R"(,"roof_type":"gabled","ridge_height":12)")));
    auto r = read_buildings_geojson(tmp.file("g.geojson"));
    REQUIRE(r.size() == 1);
    Vec2 ax = r[0].roof.ridge_axis.normalized();
    CHECK(std::abs(ax.x) == doctest::Approx(1.0));
    CHECK(std::abs(ax.y) == doctest::Approx(0.0));
}

TEST_CASE("city validation") {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    city.buildings.push_back(testutil::box_building("a", 10, 10, 20, 20, 10));
    CHECK_NOTHROW(validate_city(city));

    SUBCASE("misaligned canopy") {
        city.canopy.xll += 5.0;
        CHECK_THROWS_AS(validate_city(city), ValidationError);
    }
    SUBCASE("landcover code out of range") {
        city.landcover.values[0] = 21.0;
        CHECK_THROWS_AS(validate_city(city), ValidationError);
    }
    SUBCASE("landcover nodata is allowed") {
        city.landcover.values[0] = city.landcover.nodata;
        CHECK_NOTHROW(validate_city(city));
    }
    SUBCASE("footprint outside the terrain extent") {
        city.buildings.push_back(testutil::box_building("out", 95, 95, 20, 20, 10));
        CHECK_THROWS_AS(validate_city(city), ValidationError);
    }
    SUBCASE("duplicate building ids") {
        city.buildings.push_back(testutil::box_building("a", 40, 40, 10, 10, 5));
        CHECK_THROWS_AS(validate_city(city), ValidationError);
    }
}

TEST_CASE("load_city reads all four inputs") {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    city.buildings.push_back(testutil::box_building("a", 10, 10, 20, 20, 10));

    TempDir tmp;
    write_asc(city.terrain, tmp.file("terrain.asc"));
    write_asc(city.canopy, tmp.file("canopy.asc"));
    write_asc(city.landcover, tmp.file("landcover.asc"));
    write_buildings_geojson(city.buildings, tmp.file("buildings.geojson"));

    CityModel loaded = load_city(tmp.file("terrain.asc"), tmp.file("buildings.geojson"),
                                 tmp.file("canopy.asc"), tmp.file("landcover.asc"));
    CHECK(loaded.scenario_id == "ref");
    CHECK(loaded.buildings.size() == 1);
    CHECK(city_hash(loaded) == city_hash(city));
}

TEST_CASE("add floors raises the eave and the ridge") {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    Building g = testutil::box_building("g", 10, 10, 20, 10, 10);
    g.roof.type = RoofType::Gabled;
    g.roof.ridge_height = 13.0;
    city.buildings.push_back(g);
    city.buildings.push_back(testutil::box_building("f", 40, 40, 10, 10, 7));

    CityModel up = apply_edit(city, AddFloors{"g", 2});
    CHECK(up.buildings[0].eave_height == doctest::Approx(20.0));
    CHECK(up.buildings[0].roof.ridge_height == doctest::Approx(23.0));
    CHECK(up.buildings[1].eave_height == doctest::Approx(7.0)); // untouched
    CHECK(up.buildings[0].footprint.rings == city.buildings[0].footprint.rings);

    // Composition: n then m floors equals n + m floors.
    CityModel twice = apply_edit(apply_edit(city, AddFloors{"g", 1}), AddFloors{"g", 2});
    CityModel once = apply_edit(city, AddFloors{"g", 3});
    CHECK(city_hash(twice) == city_hash(once));

    CHECK_THROWS_AS(apply_edit(city, AddFloors{"ghost", 1}), ValidationError);
    CHECK_THROWS_AS(apply_edit(city, AddFloors{"g", 0}), ValidationError);
}

TEST_CASE("replace massing swaps buildings") {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    city.buildings.push_back(testutil::box_building("old-1", 10, 10, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("old-2", 30, 10, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("keep", 60, 60, 10, 10, 10));

    ReplaceMassing rm;
    rm.removed_ids = {"old-1", "old-2"};
    rm.added = {testutil::box_building("new-1", 10, 10, 30, 10, 35)};
    CityModel alt = apply_edit(city, rm);
    REQUIRE(alt.buildings.size() == 2);
    CHECK(find_building(alt, "keep") >= 0);
    CHECK(find_building(alt, "new-1") >= 0);
    CHECK(find_building(alt, "old-1") < 0);

    ReplaceMassing bad_removed;
    bad_removed.removed_ids = {"ghost"};
    bad_removed.added = {testutil::box_building("new-2", 10, 10, 10, 10, 10)};
    CHECK_THROWS_AS(apply_edit(city, bad_removed), ValidationError);

    ReplaceMassing clash;
    clash.removed_ids = {"old-1"};
    clash.added = {testutil::box_building("keep", 10, 10, 10, 10, 10)};
    CHECK_THROWS_AS(apply_edit(city, clash), ValidationError);
}

TEST_CASE("joint structures merge transitively over shared walls") {
    CityModel city = testutil::flat_city(20, 20, 10.0);
    // c and b share a wall, b and a share a wall; d touches a only at a corner;
    // e stands alone.
    city.buildings.push_back(testutil::box_building("c", 20, 20, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("b", 30, 20, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("a", 40, 20, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("d", 50, 30, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("e", 100, 100, 10, 10, 10));

    CityModel merged = merge_joint_structures(city);
    auto group = [&](const std::string& id) {
        return merged.buildings[find_building(merged, id)].joint_group;
    };
    CHECK(group("a") == "a");
    CHECK(group("b") == "a");
    CHECK(group("c") == "a");
    CHECK(group("d") == "d"); // corner contact does not join
    CHECK(group("e") == "e");

    // Partial overlap above the tolerance joins too.
    CityModel partial = testutil::flat_city(20, 20, 10.0);
    partial.buildings.push_back(testutil::box_building("p", 20, 20, 10, 10, 10));
    partial.buildings.push_back(testutil::box_building("q", 30, 25, 10, 10, 10));
    CityModel pm = merge_joint_structures(partial);
    CHECK(pm.buildings[0].joint_group == "p");
    CHECK(pm.buildings[1].joint_group == "p");
}

TEST_CASE("city hash tracks content") {
    CityModel city = testutil::flat_city(10, 10, 10.0);
    city.buildings.push_back(testutil::box_building("a", 10, 10, 20, 20, 10));

    uint64_t h1 = city_hash(city);
    CHECK(h1 == city_hash(city)); // pure

    CityModel copy = city;
    CHECK(city_hash(copy) == h1);

    copy.buildings[0].eave_height += 0.001;
    CHECK(city_hash(copy) != h1);

    CityModel terrain_edit = city;
    terrain_edit.terrain.values[0] = 1.0;
    CHECK(city_hash(terrain_edit) != h1);
}

TEST_CASE("normalized geojson keeps joint groups") {
    CityModel city = testutil::flat_city(20, 20, 10.0);
    city.buildings.push_back(testutil::box_building("a", 20, 20, 10, 10, 10));
    city.buildings.push_back(testutil::box_building("b", 30, 20, 10, 10, 10));
    CityModel merged = merge_joint_structures(city);

    TempDir tmp;
    write_buildings_geojson(merged.buildings, tmp.file("m.geojson"));
    json j = json::parse(testutil::slurp(tmp.file("m.geojson")));
    CHECK(j["features"][0]["properties"]["joint_group"] == "a");
    CHECK(j["features"][1]["properties"]["joint_group"] == "a");
}
