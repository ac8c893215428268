#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace visar {

struct Vec2 {
    double x = 0.0, y = 0.0;

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::sqrt(x * x + y * y); }
    Vec2 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec2{x / n, y / n} : Vec2{0.0, 0.0};
    }
    /// Right-hand perpendicular; for a CCW ring this points outward.
    Vec2 perp_right() const { return {y, -x}; }
    bool operator==(const Vec2&) const = default;
};

struct Vec3 {
    double x = 0.0, y = 0.0, z = 0.0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec3 normalized() const {
        double n = norm();
        return n > 0.0 ? Vec3{x / n, y / n, z / n} : Vec3{0.0, 0.0, 0.0};
    }
    bool operator==(const Vec3&) const = default;
};

/// Planar polygon as a list of rings. Ring 0 is the exterior boundary,
/// stored counter-clockwise; any further rings are holes, stored clockwise.
/// Rings are open (no repeated closing vertex).
struct Polygon {
    std::vector<std::vector<Vec2>> rings;

    const std::vector<Vec2>& exterior() const { return rings.front(); }
    bool empty() const { return rings.empty() || rings.front().size() < 3; }
};

struct Tri2 {
    Vec2 a, b, c;
};

/// Signed area of a ring (positive when counter-clockwise).
double signed_area(const std::vector<Vec2>& ring);

/// Area of a polygon: exterior minus holes (always >= 0 for a valid polygon).
double polygon_area(const Polygon& poly);

/// Area-weighted centroid of a polygon (holes subtract mass).
Vec2 polygon_centroid(const Polygon& poly);

/// True if the point lies inside the ring (even-odd rule; boundary is unspecified).
bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring);

/// True if the point lies inside the solid footprint (exterior minus holes).
bool point_in_polygon(const Vec2& p, const Polygon& poly);

/// True when the ring has no duplicate vertices, no zero-length edges and no
/// pair of non-adjacent edges that intersect.
bool ring_is_simple(const std::vector<Vec2>& ring);

/// Normalizes ring orientations in place: exterior CCW, holes CW.
void normalize_orientation(Polygon& poly);

/// Triangulates a polygon (holes supported) by ear clipping after bridging
/// holes into the exterior ring. The union of the triangles covers the solid
/// footprint; total triangle area equals polygon_area within rounding.
std::vector<Tri2> triangulate(const Polygon& poly);

/// Length of the colinear overlap between segment (p1,p2) and segment (q1,q2).
/// Returns 0 unless both q endpoints within the overlapped span lie within
/// `tol` of the line through p1-p2. A pure endpoint touch has overlap 0.
double colinear_overlap(const Vec2& p1, const Vec2& p2,
                        const Vec2& q1, const Vec2& q2, double tol);

} // namespace visar
