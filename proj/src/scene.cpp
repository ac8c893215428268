#include "visar/scene.hpp"
#include "visar/categories.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace visar {

namespace {

constexpr double kDegenerateArea2 = 1e-12; // twice-area threshold for dropped slivers

void set_tri_bounds(ScenePrim& p) {
    p.lo = {std::min({p.a.x, p.b.x, p.c.x}), std::min({p.a.y, p.b.y, p.c.y}),
            std::min({p.a.z, p.b.z, p.c.z})};
    p.hi = {std::max({p.a.x, p.b.x, p.c.x}), std::max({p.a.y, p.b.y, p.c.y}),
            std::max({p.a.z, p.b.z, p.c.z})};
}

void push_tri(Scene& scene, PrimKind kind, int cat, int owner, const Vec3& a, const Vec3& b,
              const Vec3& c) {
    ScenePrim p;
    p.kind = kind;
    p.category = static_cast<uint8_t>(cat);
    p.owner = owner;
    p.a = a; p.b = b; p.c = c;
    // Drop exactly degenerate triangles (e.g. ridge-aligned slivers).
    Vec3 n = (b - a).cross(c - a);
    if (n.norm() <= 0.0) return;
    set_tri_bounds(p);
    scene.prims.push_back(p);
}

void push_box(Scene& scene, PrimKind kind, int cat, int owner, const Vec3& lo, const Vec3& hi) {
    if (!(hi.x > lo.x && hi.y > lo.y && hi.z > lo.z)) return;
    ScenePrim p;
    p.kind = kind;
    p.category = static_cast<uint8_t>(cat);
    p.owner = owner;
    p.lo = lo; p.hi = hi;
    scene.prims.push_back(p);
}

// Tent-roof height field for a gabled building: linear falloff from the
// ridge line (through the footprint centroid, along ridge_axis) down to the
// eave at the farthest footprint vertex.
struct TentRoof {
    Vec2 center;
    Vec2 perp;        // unit normal of the ridge line
    double s_max = 1; // distance at which the roof reaches the eave
    double z_ridge = 0, z_eave = 0;

    double offset(const Vec2& p) const { return (p - center).dot(perp); }
    double height_at_offset(double d) const {
        return z_ridge - (z_ridge - z_eave) * (std::abs(d) / s_max);
    }
    double height(const Vec2& p) const { return height_at_offset(offset(p)); }
};

TentRoof make_tent(const Building& b) {
    TentRoof t;
    t.center = polygon_centroid(b.footprint);
    Vec2 axis = b.roof.ridge_axis.normalized();
    t.perp = axis.perp_right();
    t.z_ridge = b.ground_elevation + b.roof.ridge_height;
    t.z_eave = b.ground_elevation + b.eave_height;
    double s = 0.0;
    for (const auto& ring : b.footprint.rings)
        for (const auto& v : ring) s = std::max(s, std::abs(t.offset(v)));
    t.s_max = s > 0.0 ? s : 1.0;
    return t;
}

// Clips a 2D triangle against one side of the ridge line (keep d*side >= 0)
// and emits the clipped piece as a fan of triangles.
void clip_tri_to_side(const Tri2& tri, const TentRoof& tent, double side,
                      std::vector<Tri2>& out) {
    const Vec2 pts[3] = {tri.a, tri.b, tri.c};
    std::vector<Vec2> kept;
    for (int i = 0; i < 3; ++i) {
        const Vec2& p = pts[i];
        const Vec2& q = pts[(i + 1) % 3];
        double dp = tent.offset(p) * side;
        double dq = tent.offset(q) * side;
        if (dp >= 0.0) kept.push_back(p);
        if ((dp > 0.0 && dq < 0.0) || (dp < 0.0 && dq > 0.0)) {
            double f = dp / (dp - dq);
            kept.push_back({p.x + f * (q.x - p.x), p.y + f * (q.y - p.y)});
        }
    }
    for (size_t i = 1; i + 1 < kept.size(); ++i) {
        Tri2 t{kept[0], kept[i], kept[i + 1]};
        double twice_area = std::abs((t.b - t.a).cross(t.c - t.a));
        if (twice_area > kDegenerateArea2) out.push_back(t);
    }
}

void add_building(Scene& scene, const Building& b, int owner) {
    const double z0 = b.ground_elevation;
    const bool gabled = b.roof.type == RoofType::Gabled;
    TentRoof tent;
    if (gabled) tent = make_tent(b);

    auto top_z = [&](const Vec2& p) {
        return gabled ? tent.height(p) : b.ground_elevation + b.eave_height;
    };

    // Walls: one vertical quad per footprint edge, split where the ridge
    // line crosses so the top edge stays straight.
    auto add_wall = [&](const Vec2& p1, const Vec2& p2) {
        double zt1 = top_z(p1), zt2 = top_z(p2);
        Vec3 a{p1.x, p1.y, z0}, d{p2.x, p2.y, z0};
        Vec3 a_top{p1.x, p1.y, zt1}, d_top{p2.x, p2.y, zt2};
        push_tri(scene, PrimKind::Wall, kCatFacade, owner, a, d, d_top);
        push_tri(scene, PrimKind::Wall, kCatFacade, owner, a, d_top, a_top);
    };
    for (const auto& ring : b.footprint.rings) {
        for (size_t i = 0; i < ring.size(); ++i) {
            Vec2 p1 = ring[i], p2 = ring[(i + 1) % ring.size()];
            if (gabled) {
                double d1 = tent.offset(p1), d2 = tent.offset(p2);
                if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0)) {
                    double f = d1 / (d1 - d2);
                    Vec2 pm{p1.x + f * (p2.x - p1.x), p1.y + f * (p2.y - p1.y)};
                    add_wall(p1, pm);
                    add_wall(pm, p2);
                    continue;
                }
            }
            add_wall(p1, p2);
        }
    }

    // Roof: triangulate the footprint, split each triangle at the ridge, lift.
    std::vector<Tri2> flat_tris = triangulate(b.footprint);
    std::vector<Tri2> pieces;
    if (gabled) {
        for (const auto& t : flat_tris) {
            clip_tri_to_side(t, tent, +1.0, pieces);
            clip_tri_to_side(t, tent, -1.0, pieces);
        }
    } else {
        pieces = std::move(flat_tris);
    }
    for (const auto& t : pieces) {
        Vec3 a{t.a.x, t.a.y, top_z(t.a)};
        Vec3 bb{t.b.x, t.b.y, top_z(t.b)};
        Vec3 c{t.c.x, t.c.y, top_z(t.c)};
        push_tri(scene, PrimKind::Roof, kCatRoof, owner, a, bb, c);
    }
}

} // namespace

Scene build_scene(const CityModel& city) {
    Scene scene;

    for (size_t i = 0; i < city.buildings.size(); ++i)
        add_building(scene, city.buildings[i], static_cast<int>(i));

    const Grid& terr = city.terrain;
    const Grid& can = city.canopy;
    const Grid& lc = city.landcover;

    // Canopy: opaque prism from the terrain surface to terrain + height.
    for (int row = 0; row < can.nrows; ++row) {
        for (int col = 0; col < can.ncols; ++col) {
            double h = can.at(col, row);
            double tz = terr.at(col, row);
            if (h == can.nodata || tz == terr.nodata || h <= 0.0) continue;
            double x0 = can.xll + col * can.cell;
            double y0 = can.yll + (can.nrows - 1 - row) * can.cell;
            push_box(scene, PrimKind::CanopyBox, kCatVegetation, -1,
                     {x0, y0, tz}, {x0 + can.cell, y0 + can.cell, tz + h});
        }
    }

    // Terrain: solid column per cell from a common base up to the cell
    // elevation, so rays see the stepped surface from every direction.
    double zmin = std::numeric_limits<double>::infinity();
    for (double v : terr.values)
        if (v != terr.nodata) zmin = std::min(zmin, v);
    if (!std::isfinite(zmin)) zmin = 0.0;
    const double base = zmin - 100.0;

    for (int row = 0; row < terr.nrows; ++row) {
        for (int col = 0; col < terr.ncols; ++col) {
            double tz = terr.at(col, row);
            if (tz == terr.nodata) continue;
            int cat = kCatOther;
            double code = lc.at(col, row);
            if (code != lc.nodata) {
                int c = static_cast<int>(std::lround(code));
                if (c >= 1 && c <= kNumCategories) cat = c;
            }
            double x0 = terr.xll + col * terr.cell;
            double y0 = terr.yll + (terr.nrows - 1 - row) * terr.cell;
            push_box(scene, PrimKind::TerrainColumn, cat, -1,
                     {x0, y0, base}, {x0 + terr.cell, y0 + terr.cell, tz});
        }
    }
    return scene;
}

bool intersect_prim(const ScenePrim& prim, const Vec3& origin, const Vec3& dir,
                    const Vec3& inv_dir, double& t_out) {
    if (prim.kind == PrimKind::Wall || prim.kind == PrimKind::Roof) {
        // Moller-Trumbore.
        Vec3 e1 = prim.b - prim.a;
        Vec3 e2 = prim.c - prim.a;
        Vec3 pvec = dir.cross(e2);
        double det = e1.dot(pvec);
        if (std::abs(det) < 1e-14) return false;
        double inv_det = 1.0 / det;
        Vec3 tvec = origin - prim.a;
        double u = tvec.dot(pvec) * inv_det;
        if (u < 0.0 || u > 1.0) return false;
        Vec3 qvec = tvec.cross(e1);
        double v = dir.dot(qvec) * inv_det;
        if (v < 0.0 || u + v > 1.0) return false;
        double t = e2.dot(qvec) * inv_det;
        if (t <= kMinHitT) return false;
        t_out = t;
        return true;
    }

    // Slab test with explicit zero-direction branches (no NaN from 0 * inf).
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double inv[3] = {inv_dir.x, inv_dir.y, inv_dir.z};
    const double lo[3] = {prim.lo.x, prim.lo.y, prim.lo.z};
    const double hi[3] = {prim.hi.x, prim.hi.y, prim.hi.z};
    for (int axis = 0; axis < 3; ++axis) {
        if (d[axis] == 0.0) {
            if (o[axis] < lo[axis] || o[axis] > hi[axis]) return false;
            continue;
        }
        double t1 = (lo[axis] - o[axis]) * inv[axis];
        double t2 = (hi[axis] - o[axis]) * inv[axis];
        if (t1 > t2) std::swap(t1, t2);
        t_enter = std::max(t_enter, t1);
        t_exit = std::min(t_exit, t2);
        if (t_enter > t_exit) return false;
    }
    if (t_enter < kMinHitT) return false; // starts inside or behind: pass through
    t_out = t_enter;
    return true;
}

void prim_bounds(const ScenePrim& prim, Vec3& lo, Vec3& hi) {
    lo = prim.lo;
    hi = prim.hi;
}

} // namespace visar
