#include "visar/visibility.hpp"
#include "visar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace visar {

int category_code(const std::string& name) {
    const auto& names = category_names();
    for (int i = 0; i < kNumCategories; ++i)
        if (names[i] == name) return i + 1;
    return -1;
}

int distance_bin(double d) {
    if (d < 50.0) return 1;
    if (d < 250.0) return 2;
    if (d < 1000.0) return 3;
    return 4;
}

namespace {

struct Segment {
    Vec2 p1, p2;
};

// True when this wall segment colinearly coincides with a wall of another
// building for more than the snap tolerance, i.e. it is a party wall.
bool is_party_wall(const CityModel& city, size_t self_idx, const Vec2& p1, const Vec2& p2) {
    double x0 = std::min(p1.x, p2.x) - kJointSnapTolerance;
    double x1 = std::max(p1.x, p2.x) + kJointSnapTolerance;
    double y0 = std::min(p1.y, p2.y) - kJointSnapTolerance;
    double y1 = std::max(p1.y, p2.y) + kJointSnapTolerance;
    for (size_t bi = 0; bi < city.buildings.size(); ++bi) {
        if (bi == self_idx) continue;
        for (const auto& ring : city.buildings[bi].footprint.rings) {
            for (size_t j = 0; j < ring.size(); ++j) {
                Vec2 q1 = ring[j], q2 = ring[(j + 1) % ring.size()];
                if (std::max(q1.x, q2.x) < x0 || std::min(q1.x, q2.x) > x1 ||
                    std::max(q1.y, q2.y) < y0 || std::min(q1.y, q2.y) > y1)
                    continue;
                if (colinear_overlap(p1, p2, q1, q2, kJointSnapTolerance) > kJointSnapTolerance)
                    return true;
            }
        }
    }
    return false;
}

} // namespace

std::vector<Viewpoint> generate_viewpoints(const CityModel& city, const std::string& building_id,
                                           double spacing, double story_height) {
    int bidx = find_building(city, building_id);
    if (bidx < 0) throw ValidationError("unknown building id '" + building_id + "'");
    if (!(spacing > 0.0)) throw ValidationError("viewpoint spacing must be > 0");
    if (!(story_height > 0.0)) throw ValidationError("story height must be > 0");
    const Building& b = city.buildings[bidx];

    std::vector<double> levels;
    for (double h = kFirstViewpointHeight; h < b.eave_height; h += story_height)
        levels.push_back(h);

    std::vector<Viewpoint> out;
    int facade_index = 0;
    for (const auto& ring : b.footprint.rings) {
        for (size_t i = 0; i < ring.size(); ++i, ++facade_index) {
            Vec2 p1 = ring[i], p2 = ring[(i + 1) % ring.size()];
            Vec2 d = p2 - p1;
            double len = d.norm();
            if (len <= 0.0) continue;
            if (is_party_wall(city, static_cast<size_t>(bidx), p1, p2)) continue;

            Vec2 tangent = d * (1.0 / len);
            Vec2 normal = tangent.perp_right(); // outward for CCW exterior / CW holes
            int n = std::max(1, static_cast<int>(std::ceil(len / spacing)));
            for (int s = 0; s < n; ++s) {
                double arc = (s + 0.5) * len / n;
                Vec2 base = p1 + tangent * arc;
                Vec2 pos2 = base + normal * kViewpointOffset;
                Vec2 used_normal = normal;
                if (point_in_polygon(pos2, b.footprint)) {
                    // Orientation surprise: flip to the genuinely outward side.
                    used_normal = normal * -1.0;
                    pos2 = base + used_normal * kViewpointOffset;
                }
                for (size_t k = 0; k < levels.size(); ++k) {
                    Viewpoint vp;
                    vp.building_id = b.id;
                    vp.position = {pos2.x, pos2.y, b.ground_elevation + levels[k]};
                    vp.outward_normal = used_normal;
                    vp.floor_index = static_cast<int>(k);
                    vp.facade_index = facade_index;
                    out.push_back(std::move(vp));
                }
            }
        }
    }
    return out;
}

std::vector<Vec3> ray_directions(const Viewpoint& vp, const RayConfig& config) {
    if (config.n_azimuth < 1 || config.n_elevation < 1)
        throw ValidationError("ray grid must have at least one ray per axis");
    if (!(config.horizontal_fov_deg > 0.0 && config.horizontal_fov_deg <= 180.0) ||
        !(config.vertical_fov_deg > 0.0 && config.vertical_fov_deg <= 180.0))
        throw ValidationError("fov must lie in (0, 180] degrees");

    const double deg = M_PI / 180.0;
    const double az0 = std::atan2(vp.outward_normal.y, vp.outward_normal.x);
    const double haf = config.horizontal_fov_deg * deg;
    const double vaf = config.vertical_fov_deg * deg;

    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<size_t>(config.total_rays()));
    for (int i = 0; i < config.n_azimuth; ++i) {
        double az = az0 - haf / 2.0 + (i + 0.5) * haf / config.n_azimuth;
        double caz = std::cos(az), saz = std::sin(az);
        for (int j = 0; j < config.n_elevation; ++j) {
            double el = -vaf / 2.0 + (j + 0.5) * vaf / config.n_elevation;
            double cel = std::cos(el), sel = std::sin(el);
            dirs.push_back({caz * cel, saz * cel, sel});
        }
    }
    return dirs;
}

ConeCounts cast_cone(const Bvh& bvh, const Viewpoint& vp, const RayConfig& config) {
    ConeCounts cc;
    for (const Vec3& dir : ray_directions(vp, config)) {
        double t;
        int prim = bvh.closest_hit(vp.position, dir, config.max_range, t);
        if (prim < 0) {
            cc.counts[kCatSky - 1][kNumDistanceBins - 1] += 1;
        } else {
            int cat = bvh.scene().prims[prim].category;
            cc.counts[cat - 1][distance_bin(t) - 1] += 1;
        }
    }
    return cc;
}

VisualShareTensor visual_share_with(const Bvh& bvh, const CityModel& city,
                                    const std::string& building_id, const RayConfig& config,
                                    double spacing, double story_height) {
    VisualShareTensor tensor;
    tensor.building_id = building_id;
    tensor.n_rays_per_viewpoint = config.total_rays();
    for (const Viewpoint& vp : generate_viewpoints(city, building_id, spacing, story_height))
        tensor.per_viewpoint.push_back(cast_cone(bvh, vp, config));
    return tensor;
}

VisualShareTensor visual_share(const CityModel& city, const std::string& building_id,
                               const RayConfig& config, double spacing, double story_height) {
    Scene scene = build_scene(city);
    Bvh bvh(scene);
    return visual_share_with(bvh, city, building_id, config, spacing, story_height);
}

static void write_share_rows(std::ostream& out, const VisualShareTensor& tensor) {
    char buf[64];
    for (size_t v = 0; v < tensor.n_viewpoints(); ++v) {
        for (int l = 1; l <= kNumCategories; ++l) {
            for (int d = 1; d <= kNumDistanceBins; ++d) {
                uint32_t c = tensor.count(v, l, d);
                std::snprintf(buf, sizeof buf, "%.12g",
                              static_cast<double>(c) / tensor.n_rays_per_viewpoint);
                out << tensor.building_id << ',' << v << ',' << l << ',' << d << ',' << c << ','
                    << buf << '\n';
            }
        }
    }
}

void write_shares_csv(const VisualShareTensor& tensor, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id,viewpoint_index,category_code,distance_bin,count,share\n";
    write_share_rows(out, tensor);
}

void write_shares_csv(const std::vector<VisualShareTensor>& tensors, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id,viewpoint_index,category_code,distance_bin,count,share\n";
    for (const VisualShareTensor& tensor : tensors) write_share_rows(out, tensor);
}

} // namespace visar
