#include "visar/citymodel.hpp"
#include "visar/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace visar {

using nlohmann::json;

namespace {

json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    return j;
}

Polygon parse_polygon(const json& coords, const std::string& id) {
    if (!coords.is_array() || coords.empty())
        throw ValidationError("building " + id + ": Polygon has no rings");
    Polygon poly;
    for (const auto& ring_j : coords) {
        std::vector<Vec2> ring;
        for (const auto& pt : ring_j) {
            if (!pt.is_array() || pt.size() < 2)
                throw ValidationError("building " + id + ": malformed coordinate");
            ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
        }
        // GeoJSON rings repeat the first vertex; we store rings open.
        if (ring.size() >= 2 && ring.front().x == ring.back().x && ring.front().y == ring.back().y)
            ring.pop_back();
        if (ring.size() < 3)
            throw ValidationError("building " + id + ": ring with fewer than 3 distinct vertices");
        poly.rings.push_back(std::move(ring));
    }
    for (const auto& ring : poly.rings)
        if (!ring_is_simple(ring))
            throw ValidationError("building " + id + ": self-intersecting footprint ring");
    normalize_orientation(poly);
    if (polygon_area(poly) <= 0.0)
        throw ValidationError("building " + id + ": footprint has zero area");
    return poly;
}

void check_building(const Building& b) {
    if (b.id.empty()) throw ValidationError("building with empty id");
    if (!(b.eave_height > 0.0))
        throw ValidationError("building " + b.id + ": eave_height must be > 0");
    if (!std::isfinite(b.ground_elevation))
        throw ValidationError("building " + b.id + ": non-finite ground_elevation");
    if (b.roof.type == RoofType::Gabled) {
        if (!(b.roof.ridge_height >= b.eave_height))
            throw ValidationError("building " + b.id + ": ridge_height below eave_height");
        if (b.roof.ridge_axis.norm() <= 0.0)
            throw ValidationError("building " + b.id + ": gabled roof needs a ridge_axis");
    }
}

} // namespace

std::vector<Building> read_buildings_geojson(const std::string& path) {
    json j = load_json_file(path);
    if (j.value("type", "") != "FeatureCollection" || !j.contains("features"))
        throw ValidationError(path + ": expected a GeoJSON FeatureCollection");

    std::vector<Building> out;
    std::set<std::string> seen;
    for (const auto& f : j["features"]) {
        const auto& props = f.at("properties");
        Building b;
        if (props.contains("id")) {
            const auto& idv = props["id"];
            b.id = idv.is_string() ? idv.get<std::string>() : idv.dump();
        } else {
            throw ValidationError(path + ": feature without an id property");
        }
        if (!seen.insert(b.id).second)
            throw ValidationError("building " + b.id + ": duplicate id");

        const auto& geom = f.at("geometry");
        if (geom.value("type", "") != "Polygon")
            throw ValidationError("building " + b.id + ": geometry must be Polygon");
        b.footprint = parse_polygon(geom.at("coordinates"), b.id);

        if (!props.contains("ground_elevation") || !props.contains("eave_height"))
            throw ValidationError("building " + b.id +
                                  ": missing ground_elevation or eave_height");
        b.ground_elevation = props["ground_elevation"].get<double>();
        b.eave_height = props["eave_height"].get<double>();

        std::string rt = props.value("roof_type", "flat");
        std::transform(rt.begin(), rt.end(), rt.begin(), ::tolower);
        if (rt == "flat") {
            b.roof.type = RoofType::Flat;
        } else if (rt == "gabled") {
            b.roof.type = RoofType::Gabled;
            if (!props.contains("ridge_height"))
                throw ValidationError("building " + b.id + ": gabled roof without ridge_height");
            b.roof.ridge_height = props["ridge_height"].get<double>();
            if (props.contains("ridge_axis")) {
                const auto& ax = props["ridge_axis"];
                b.roof.ridge_axis = {ax.at(0).get<double>(), ax.at(1).get<double>()};
            } else {
                // Default to the longest footprint edge direction.
                const auto& ring = b.footprint.rings[0];
                double best = -1.0;
                for (size_t i = 0; i < ring.size(); ++i) {
                    Vec2 d = ring[(i + 1) % ring.size()] - ring[i];
                    double l = d.norm();
                    if (l > best) { best = l; b.roof.ridge_axis = d; }
                }
            }
        } else {
            throw ValidationError("building " + b.id + ": unknown roof_type '" + rt + "'");
        }
        check_building(b);
        out.push_back(std::move(b));
    }
    return out;
}

void write_buildings_geojson(const std::vector<Building>& buildings, const std::string& path) {
    json features = json::array();
    for (const auto& b : buildings) {
        json coords = json::array();
        for (const auto& ring : b.footprint.rings) {
            json rj = json::array();
            for (const auto& p : ring) rj.push_back({p.x, p.y});
            rj.push_back({ring.front().x, ring.front().y}); // close the ring
            coords.push_back(std::move(rj));
        }
        json props = {
            {"id", b.id},
            {"ground_elevation", b.ground_elevation},
            {"eave_height", b.eave_height},
            {"roof_type", b.roof.type == RoofType::Flat ? "flat" : "gabled"},
        };
        if (b.roof.type == RoofType::Gabled) {
            props["ridge_height"] = b.roof.ridge_height;
            props["ridge_axis"] = {b.roof.ridge_axis.x, b.roof.ridge_axis.y};
        }
        if (!b.joint_group.empty()) props["joint_group"] = b.joint_group;
        features.push_back({{"type", "Feature"},
                            {"properties", std::move(props)},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(coords)}}}});
    }
    json fc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << fc.dump(1) << "\n";
}

void validate_city(const CityModel& city) {
    if (city.terrain.values.empty()) throw ValidationError("terrain grid is empty");
    if (!city.canopy.aligned_with(city.terrain))
        throw ValidationError("canopy grid is not aligned with the terrain grid");
    if (!city.landcover.aligned_with(city.terrain))
        throw ValidationError("landcover grid is not aligned with the terrain grid");
    for (double v : city.landcover.values) {
        if (v == city.landcover.nodata) continue;
        double r = std::round(v);
        if (std::abs(v - r) > 1e-9 || r < 1 || r > 20)
            throw ValidationError("landcover contains a code outside 1..20");
    }
    for (const auto& b : city.buildings) {
        check_building(b);
        for (const auto& ring : b.footprint.rings)
            for (const auto& p : ring)
                if (p.x < city.terrain.xmin() || p.x > city.terrain.xmax() ||
                    p.y < city.terrain.ymin() || p.y > city.terrain.ymax())
                    throw ValidationError("building " + b.id + ": footprint outside terrain extent");
    }
    std::set<std::string> seen;
    for (const auto& b : city.buildings)
        if (!seen.insert(b.id).second)
            throw ValidationError("building " + b.id + ": duplicate id");
}

CityModel load_city(const std::string& terrain_path, const std::string& buildings_path,
                    const std::string& canopy_path, const std::string& landcover_path) {
    CityModel city;
    city.terrain = read_asc(terrain_path);
    city.canopy = read_asc(canopy_path);
    city.landcover = read_asc(landcover_path);
    city.buildings = read_buildings_geojson(buildings_path);
    city.scenario_id = "ref";
    validate_city(city);
    return city;
}

int find_building(const CityModel& city, const std::string& id) {
    for (size_t i = 0; i < city.buildings.size(); ++i)
        if (city.buildings[i].id == id) return static_cast<int>(i);
    return -1;
}

CityModel apply_edit(const CityModel& city, const ScenarioEdit& edit, double floor_increment) {
    CityModel out = city;
    if (const auto* af = std::get_if<AddFloors>(&edit)) {
        int idx = find_building(out, af->building_id);
        if (idx < 0)
            throw ValidationError("AddFloors: unknown building id '" + af->building_id + "'");
        if (af->n_floors < 1)
            throw ValidationError("AddFloors: n_floors must be >= 1");
        Building& b = out.buildings[idx];
        double dz = af->n_floors * floor_increment;
        b.eave_height += dz;
        if (b.roof.type == RoofType::Gabled) b.roof.ridge_height += dz;
    } else {
        const auto& rm = std::get<ReplaceMassing>(edit);
        for (const auto& id : rm.removed_ids)
            if (find_building(out, id) < 0)
                throw ValidationError("ReplaceMassing: unknown building id '" + id + "'");
        std::set<std::string> removed(rm.removed_ids.begin(), rm.removed_ids.end());
        std::vector<Building> kept;
        kept.reserve(out.buildings.size());
        for (auto& b : out.buildings)
            if (!removed.count(b.id)) kept.push_back(std::move(b));
        for (const auto& nb : rm.added) {
            check_building(nb);
            for (const auto& kb : kept)
                if (kb.id == nb.id)
                    throw ValidationError("ReplaceMassing: added id '" + nb.id + "' already exists");
            kept.push_back(nb);
        }
        out.buildings = std::move(kept);
    }
    return out;
}

namespace {

// Union-find over building indices.
struct DisjointSet {
    std::vector<int> parent;
    explicit DisjointSet(size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int i) {
        while (parent[i] != i) { parent[i] = parent[parent[i]]; i = parent[i]; }
        return i;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

bool footprints_share_edge(const Polygon& a, const Polygon& b, double tol) {
    for (const auto& ra : a.rings) {
        for (size_t i = 0; i < ra.size(); ++i) {
            Vec2 p1 = ra[i], p2 = ra[(i + 1) % ra.size()];
            for (const auto& rb : b.rings) {
                for (size_t j = 0; j < rb.size(); ++j) {
                    Vec2 q1 = rb[j], q2 = rb[(j + 1) % rb.size()];
                    if (colinear_overlap(p1, p2, q1, q2, tol) > tol) return true;
                }
            }
        }
    }
    return false;
}

struct BBox2 {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

BBox2 footprint_bbox(const Polygon& p) {
    BBox2 b{p.rings[0][0].x, p.rings[0][0].y, p.rings[0][0].x, p.rings[0][0].y};
    for (const auto& ring : p.rings)
        for (const auto& v : ring) {
            b.x0 = std::min(b.x0, v.x); b.y0 = std::min(b.y0, v.y);
            b.x1 = std::max(b.x1, v.x); b.y1 = std::max(b.y1, v.y);
        }
    return b;
}

} // namespace

CityModel merge_joint_structures(const CityModel& city, double snap_tol) {
    CityModel out = city;
    const size_t n = out.buildings.size();
    DisjointSet ds(n);

    std::vector<BBox2> boxes(n);
    for (size_t i = 0; i < n; ++i) boxes[i] = footprint_bbox(out.buildings[i].footprint);

    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            // Cheap reject: expanded bounding boxes must touch.
            if (boxes[i].x1 + snap_tol < boxes[j].x0 || boxes[j].x1 + snap_tol < boxes[i].x0 ||
                boxes[i].y1 + snap_tol < boxes[j].y0 || boxes[j].y1 + snap_tol < boxes[i].y0)
                continue;
            if (footprints_share_edge(out.buildings[i].footprint, out.buildings[j].footprint,
                                      snap_tol))
                ds.unite(static_cast<int>(i), static_cast<int>(j));
        }
    }

    // Label each group by the lexicographically smallest member id.
    std::map<int, std::string> label;
    for (size_t i = 0; i < n; ++i) {
        int r = ds.find(static_cast<int>(i));
        auto it = label.find(r);
        if (it == label.end() || out.buildings[i].id < it->second)
            label[r] = out.buildings[i].id;
    }
    for (size_t i = 0; i < n; ++i)
        out.buildings[i].joint_group = label[ds.find(static_cast<int>(i))];
    return out;
}

namespace {

// FNV-1a, byte-wise. Stable across platforms for identical inputs.
struct Fnv1a {
    uint64_t h = 1469598103934665603ull;
    void bytes(const void* data, size_t len) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (size_t i = 0; i < len; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    }
    void f64(double v) { bytes(&v, sizeof v); }
    void i64(int64_t v) { bytes(&v, sizeof v); }
    void str(const std::string& s) { i64(static_cast<int64_t>(s.size())); bytes(s.data(), s.size()); }
};

void hash_grid(Fnv1a& h, const Grid& g) {
    h.i64(g.ncols); h.i64(g.nrows);
    h.f64(g.xll); h.f64(g.yll); h.f64(g.cell); h.f64(g.nodata);
    h.bytes(g.values.data(), g.values.size() * sizeof(double));
}

} // namespace

uint64_t city_hash(const CityModel& city) {
    Fnv1a h;
    hash_grid(h, city.terrain);
    hash_grid(h, city.canopy);
    hash_grid(h, city.landcover);
    h.i64(static_cast<int64_t>(city.buildings.size()));
    for (const auto& b : city.buildings) {
        h.str(b.id);
        h.f64(b.ground_elevation);
        h.f64(b.eave_height);
        h.i64(b.roof.type == RoofType::Flat ? 0 : 1);
        if (b.roof.type == RoofType::Gabled) {
            h.f64(b.roof.ridge_height);
            h.f64(b.roof.ridge_axis.x);
            h.f64(b.roof.ridge_axis.y);
        }
        h.i64(static_cast<int64_t>(b.footprint.rings.size()));
        for (const auto& ring : b.footprint.rings) {
            h.i64(static_cast<int64_t>(ring.size()));
            for (const auto& p : ring) { h.f64(p.x); h.f64(p.y); }
        }
    }
    return h.h;
}

} // namespace visar
