#pragma once

#include "visar/bvh.hpp"
#include "visar/categories.hpp"
#include "visar/citymodel.hpp"

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace visar {

/// Ray fan of the view-cone simulation: an equal-angle azimuth x elevation
/// grid centered on the facade normal and the horizon.
struct RayConfig {
    int n_azimuth = 65;
    int n_elevation = 40;
    double horizontal_fov_deg = 120.0;
    double vertical_fov_deg = 120.0;
    double max_range = 50000.0;

    int total_rays() const { return n_azimuth * n_elevation; }
};

/// Distance class for a hit at Euclidean distance d (meters):
/// 1: [0, 50), 2: [50, 250), 3: [250, 1000), 4: [1000, inf). Sky is bin 4.
int distance_bin(double d);

inline constexpr double kDefaultViewpointSpacing = 8.0; ///< m along each facade
inline constexpr double kDefaultStoryHeight = 3.0;      ///< m between viewpoint levels
inline constexpr double kFirstViewpointHeight = 1.5;    ///< m above ground
inline constexpr double kViewpointOffset = 0.1;         ///< m outward from the wall

struct Viewpoint {
    std::string building_id;
    Vec3 position;
    Vec2 outward_normal; ///< unit, horizontal
    int floor_index = 0;
    int facade_index = 0;
};

/// Places viewpoints on every exterior facade segment of the building:
/// n = ceil(len/spacing) evenly centered stations per segment, repeated at
/// heights 1.5 m + k * story_height while strictly below the eave, offset
/// 0.1 m outward. Segments that colinearly overlap another building's wall
/// by more than the joint snap tolerance are party walls and get none.
/// Ordering: facade segment, then arc length, then floor.
std::vector<Viewpoint> generate_viewpoints(const CityModel& city, const std::string& building_id,
                                           double spacing = kDefaultViewpointSpacing,
                                           double story_height = kDefaultStoryHeight);

/// Hit counts of one view cone: counts[l-1][d-1] rays hit category l in bin d.
struct ConeCounts {
    std::array<std::array<uint32_t, kNumDistanceBins>, kNumCategories> counts{};

    uint32_t total() const {
        uint32_t s = 0;
        for (const auto& row : counts)
            for (uint32_t v : row) s += v;
        return s;
    }
};

/// Unit ray directions of the cone in their fixed order (azimuth-major,
/// elevation inner), for diagnostics and reference implementations.
std::vector<Vec3> ray_directions(const Viewpoint& vp, const RayConfig& config);

/// Casts the full cone against the accelerated scene. Every ray lands in
/// exactly one (category, bin) cell; no hit within max_range counts as sky
/// in the far bin.
ConeCounts cast_cone(const Bvh& bvh, const Viewpoint& vp, const RayConfig& config);

/// Per-building stack of viewpoint hit counts (the Z_j array).
struct VisualShareTensor {
    std::string building_id;
    int n_rays_per_viewpoint = 0;
    std::vector<ConeCounts> per_viewpoint; ///< in generate_viewpoints order

    size_t n_viewpoints() const { return per_viewpoint.size(); }
    uint32_t count(size_t vp, int category, int bin) const {
        return per_viewpoint[vp].counts[category - 1][bin - 1];
    }
    double share(size_t vp, int category, int bin) const {
        return static_cast<double>(count(vp, category, bin)) / n_rays_per_viewpoint;
    }
};

/// Runs the viewpoint visual-share simulation for one building against a
/// prebuilt scene (reused across buildings of the same scenario).
VisualShareTensor visual_share_with(const Bvh& bvh, const CityModel& city,
                                    const std::string& building_id, const RayConfig& config = {},
                                    double spacing = kDefaultViewpointSpacing,
                                    double story_height = kDefaultStoryHeight);

/// Convenience wrapper that builds the scene for a single evaluation.
VisualShareTensor visual_share(const CityModel& city, const std::string& building_id,
                               const RayConfig& config = {},
                               double spacing = kDefaultViewpointSpacing,
                               double story_height = kDefaultStoryHeight);

/// Long-format CSV: building_id, viewpoint_index, category_code,
/// distance_bin, count, share (all 20 x 4 cells per viewpoint).
void write_shares_csv(const VisualShareTensor& tensor, const std::string& path);
void write_shares_csv(const std::vector<VisualShareTensor>& tensors, const std::string& path);

} // namespace visar
