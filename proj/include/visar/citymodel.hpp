#pragma once

#include "visar/geometry.hpp"
#include "visar/grid.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace visar {

enum class RoofType { Flat, Gabled };

struct Roof {
    RoofType type = RoofType::Flat;
    double ridge_height = 0.0; ///< m above ground, gabled only; >= eave_height
    Vec2 ridge_axis{1.0, 0.0}; ///< horizontal ridge direction, gabled only
};

struct Building {
    std::string id;
    Polygon footprint;           ///< planar, exterior CCW, holes CW
    double ground_elevation = 0; ///< m, absolute
    double eave_height = 0;      ///< m above ground, > 0
    Roof roof;
    std::string joint_group;     ///< buildings sharing walls share a group id
};

/// Immutable 3D scene shared by all simulations. All grids live in one planar
/// metric CRS and must be exactly aligned. Edits never mutate; they produce
/// new values.
struct CityModel {
    Grid terrain;   ///< elevation (m)
    Grid canopy;    ///< vegetation height above terrain (m, 0 = none)
    Grid landcover; ///< category codes (see visibility.hpp)
    std::vector<Building> buildings;
    std::string scenario_id = "ref";
};

struct AddFloors {
    std::string building_id;
    int n_floors = 1;
};

struct ReplaceMassing {
    std::vector<std::string> removed_ids;
    std::vector<Building> added;
};

using ScenarioEdit = std::variant<AddFloors, ReplaceMassing>;

/// Story height applied by AddFloors edits (m per floor).
inline constexpr double kDefaultFloorIncrement = 5.0;

/// Wall-sharing detection snap tolerance (m), sized for cadastral digitization noise.
inline constexpr double kJointSnapTolerance = 0.05;

/// Parses a GeoJSON FeatureCollection of buildings (Polygon geometry;
/// properties id, ground_elevation, eave_height, roof_type and, for gabled
/// roofs, ridge_height plus optional ridge_axis [dx, dy]).
/// Rings are re-oriented; invalid footprints are rejected naming the id.
std::vector<Building> read_buildings_geojson(const std::string& path);

void write_buildings_geojson(const std::vector<Building>& buildings, const std::string& path);

/// Loads and validates the full scene; the result is labeled as the
/// reference scenario. Grids must be exactly aligned; every footprint must
/// lie within the terrain extent.
CityModel load_city(const std::string& terrain_path, const std::string& buildings_path,
                    const std::string& canopy_path, const std::string& landcover_path);

/// Validates an assembled model (same checks as load_city).
void validate_city(const CityModel& city);

int find_building(const CityModel& city, const std::string& id); ///< -1 if absent

/// Applies a scenario edit, returning a new model. AddFloors raises the eave
/// by n_floors * floor_increment and translates the roof upward unchanged in
/// shape; the footprint and every other building are untouched.
CityModel apply_edit(const CityModel& city, const ScenarioEdit& edit,
                     double floor_increment = kDefaultFloorIncrement);

/// Assigns joint_group ids: buildings whose footprints share a boundary edge
/// (colinear overlap > snap tolerance) end up in one group, transitively.
/// A pure corner contact does not join groups.
CityModel merge_joint_structures(const CityModel& city, double snap_tol = kJointSnapTolerance);

/// Content hash over grids and building geometry; equal models hash equal.
uint64_t city_hash(const CityModel& city);

} // namespace visar
