#pragma once

#include "visar/citymodel.hpp"
#include "visar/geometry.hpp"

#include <cstdint>
#include <vector>

namespace visar {

/// Hits closer than this along the ray are ignored, so a ray never re-hits
/// the surface it starts on.
inline constexpr double kMinHitT = 1e-7;

/// Primitive kinds in tie-break priority order (lower value wins at equal t).
enum class PrimKind : uint8_t { Wall = 0, Roof = 1, CanopyBox = 2, TerrainColumn = 3 };

/// One intersectable piece of the scene. Walls and roofs are triangles
/// (a, b, c); canopy cells and terrain cells are axis-aligned boxes (lo, hi).
struct ScenePrim {
    PrimKind kind = PrimKind::Wall;
    uint8_t category = 0; ///< landcover code recorded when a ray hits this
    int32_t owner = -1;   ///< building index, or -1 for terrain/canopy
    Vec3 a, b, c;         ///< triangle vertices (triangle kinds)
    Vec3 lo, hi;          ///< box corners (box kinds); also the bounds cache
};

struct Scene {
    std::vector<ScenePrim> prims;
};

/// Builds the primitive soup for a city model:
///  - walls: vertical quads per footprint edge, split where a gabled ridge
///    crosses so every top edge is straight; gable ends included
///  - roofs: footprint triangulation lifted to the eave plane (flat) or to
///    the tent surface between ridge and eaves (gabled), split at the ridge
///  - canopy: one box per cell with canopy height > 0, from terrain up
///  - terrain: one solid box per valid cell from a common base below the
///    minimum elevation up to the cell elevation
Scene build_scene(const CityModel& city);

/// Ray/primitive intersection. `inv_dir` components are 1/dir (infinities
/// allowed). On a hit, writes the ray parameter to `t_out` (t > kMinHitT for
/// triangles; box entry t >= kMinHitT) and returns true.
bool intersect_prim(const ScenePrim& prim, const Vec3& origin, const Vec3& dir,
                    const Vec3& inv_dir, double& t_out);

/// Total hit order: smaller t wins; ties broken by kind priority, then by
/// primitive index. Used identically by the accelerated and the reference
/// caster so both resolve coincident surfaces the same way.
inline bool hit_beats(double t_new, int idx_new, double t_cur, int idx_cur, const Scene& scene) {
    if (t_new != t_cur) return t_new < t_cur;
    if (idx_cur < 0) return true;
    auto k_new = static_cast<uint8_t>(scene.prims[idx_new].kind);
    auto k_cur = static_cast<uint8_t>(scene.prims[idx_cur].kind);
    if (k_new != k_cur) return k_new < k_cur;
    return idx_new < idx_cur;
}

/// Axis-aligned bounds of a primitive (exact for boxes, tight for triangles).
void prim_bounds(const ScenePrim& prim, Vec3& lo, Vec3& hi);

} // namespace visar
