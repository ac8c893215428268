#include "visar/geometry.hpp"

#include <algorithm>
#include <limits>

namespace visar {

double signed_area(const std::vector<Vec2>& ring) {
    double acc = 0.0;
    size_t n = ring.size();
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        acc += a.cross(b);
    }
    return 0.5 * acc;
}

double polygon_area(const Polygon& poly) {
    if (poly.empty()) return 0.0;
    double a = std::abs(signed_area(poly.rings[0]));
    for (size_t r = 1; r < poly.rings.size(); ++r)
        a -= std::abs(signed_area(poly.rings[r]));
    return a;
}

Vec2 polygon_centroid(const Polygon& poly) {
    // Standard area-weighted vertex formula per ring; hole rings carry
    // negative weight via their normalized (CW) orientation.
    double ax = 0.0, ay = 0.0, atot = 0.0;
    for (const auto& ring : poly.rings) {
        size_t n = ring.size();
        for (size_t i = 0; i < n; ++i) {
            const Vec2& p = ring[i];
            const Vec2& q = ring[(i + 1) % n];
            double w = p.cross(q);
            ax += (p.x + q.x) * w;
            ay += (p.y + q.y) * w;
            atot += w;
        }
    }
    if (std::abs(atot) == 0.0)
        return poly.rings.empty() || poly.rings[0].empty() ? Vec2{} : poly.rings[0][0];
    return {ax / (3.0 * atot), ay / (3.0 * atot)};
}

bool point_in_ring(const Vec2& p, const std::vector<Vec2>& ring) {
    bool inside = false;
    size_t n = ring.size();
    for (size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[j];
        if ((a.y > p.y) != (b.y > p.y)) {
            double xint = (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x;
            if (p.x < xint) inside = !inside;
        }
    }
    return inside;
}

bool point_in_polygon(const Vec2& p, const Polygon& poly) {
    if (poly.empty()) return false;
    if (!point_in_ring(p, poly.rings[0])) return false;
    for (size_t r = 1; r < poly.rings.size(); ++r)
        if (point_in_ring(p, poly.rings[r])) return false;
    return true;
}

namespace {

// Orientation sign of the triangle (a,b,c): >0 CCW, <0 CW, 0 colinear.
int orient(const Vec2& a, const Vec2& b, const Vec2& c) {
    double v = (b - a).cross(c - a);
    if (v > 0.0) return 1;
    if (v < 0.0) return -1;
    return 0;
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p) {
    return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) &&
           std::min(a.y, b.y) <= p.y && p.y <= std::max(a.y, b.y);
}

// Proper or improper intersection of closed segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    int o1 = orient(a, b, c), o2 = orient(a, b, d);
    int o3 = orient(c, d, a), o4 = orient(c, d, b);
    if (o1 != o2 && o3 != o4) return true;
    if (o1 == 0 && on_segment(a, b, c)) return true;
    if (o2 == 0 && on_segment(a, b, d)) return true;
    if (o3 == 0 && on_segment(c, d, a)) return true;
    if (o4 == 0 && on_segment(c, d, b)) return true;
    return false;
}

} // namespace

bool ring_is_simple(const std::vector<Vec2>& ring) {
    size_t n = ring.size();
    if (n < 3) return false;
    for (size_t i = 0; i < n; ++i) {
        const Vec2& a = ring[i];
        const Vec2& b = ring[(i + 1) % n];
        if ((b - a).norm() < 1e-12) return false;
        for (size_t j = i + 1; j < n; ++j) {
            // Skip edges adjacent to edge i (they share an endpoint by construction).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j) continue;
            const Vec2& c = ring[j];
            const Vec2& d = ring[(j + 1) % n];
            if (segments_intersect(a, b, c, d)) return false;
        }
    }
    return true;
}

void normalize_orientation(Polygon& poly) {
    for (size_t r = 0; r < poly.rings.size(); ++r) {
        double sa = signed_area(poly.rings[r]);
        bool want_ccw = (r == 0);
        if ((sa > 0.0) != want_ccw)
            std::reverse(poly.rings[r].begin(), poly.rings[r].end());
    }
}

namespace {

bool point_in_triangle(const Vec2& p, const Vec2& a, const Vec2& b, const Vec2& c) {
    double d1 = (b - a).cross(p - a);
    double d2 = (c - b).cross(p - b);
    double d3 = (a - c).cross(p - c);
    bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
    bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
    return !(has_neg && has_pos);
}

// Ear clipping over a single weakly-simple CCW ring.
std::vector<Tri2> earclip(std::vector<Vec2> ring) {
    std::vector<Tri2> tris;
    if (ring.size() < 3) return tris;
    size_t guard = 0;
    size_t guard_limit = ring.size() * ring.size() * 4 + 64;
    while (ring.size() > 3 && guard++ < guard_limit) {
        size_t n = ring.size();
        bool clipped = false;
        for (size_t i = 0; i < n; ++i) {
            const Vec2& prev = ring[(i + n - 1) % n];
            const Vec2& cur = ring[i];
            const Vec2& next = ring[(i + 1) % n];
            if (orient(prev, cur, next) <= 0) continue; // reflex or degenerate
            bool contains_other = false;
            for (size_t j = 0; j < n; ++j) {
                if (j == i || j == (i + n - 1) % n || j == (i + 1) % n) continue;
                // Bridge duplicates coincide with corner points; ignore them.
                if (ring[j] == prev || ring[j] == cur || ring[j] == next) continue;
                if (point_in_triangle(ring[j], prev, cur, next)) {
                    contains_other = true;
                    break;
                }
            }
            if (contains_other) continue;
            tris.push_back({prev, cur, next});
            ring.erase(ring.begin() + static_cast<long>(i));
            clipped = true;
            break;
        }
        if (!clipped) {
            // Numerically stuck (collinear run); drop the flattest corner and continue.
            size_t flat = 0;
            double best = std::numeric_limits<double>::max();
            for (size_t i = 0; i < ring.size(); ++i) {
                size_t n2 = ring.size();
                double v = std::abs((ring[i] - ring[(i + n2 - 1) % n2])
                                        .cross(ring[(i + 1) % n2] - ring[i]));
                if (v < best) { best = v; flat = i; }
            }
            ring.erase(ring.begin() + static_cast<long>(flat));
        }
    }
    if (ring.size() == 3) tris.push_back({ring[0], ring[1], ring[2]});
    return tris;
}

// Merge one hole (CW) into the outer ring (CCW) with a two-way bridge at the
// hole vertex of maximum x, connected to a visible outer vertex.
std::vector<Vec2> bridge_hole(const std::vector<Vec2>& outer, const std::vector<Vec2>& hole) {
    size_t hi = 0;
    for (size_t i = 1; i < hole.size(); ++i)
        if (hole[i].x > hole[hi].x) hi = i;
    const Vec2 m = hole[hi];

    // Candidate outer vertices sorted by closeness; pick the first from which the
    // bridge segment crosses no outer edge.
    std::vector<size_t> order(outer.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        return (outer[a] - m).norm() < (outer[b] - m).norm();
    });
    size_t oi = order[0];
    for (size_t cand : order) {
        if (outer[cand].x < m.x) continue; // bridge should head outward (+x side)
        bool blocked = false;
        for (size_t e = 0; e < outer.size(); ++e) {
            size_t f = (e + 1) % outer.size();
            if (e == cand || f == cand) continue;
            if (segments_intersect(m, outer[cand], outer[e], outer[f])) { blocked = true; break; }
        }
        if (!blocked) { oi = cand; break; }
    }

    std::vector<Vec2> merged;
    merged.reserve(outer.size() + hole.size() + 2);
    for (size_t i = 0; i <= oi; ++i) merged.push_back(outer[i]);
    for (size_t i = 0; i < hole.size() + 1; ++i)
        merged.push_back(hole[(hi + i) % hole.size()]);
    merged.push_back(outer[oi]);
    for (size_t i = oi + 1; i < outer.size(); ++i) merged.push_back(outer[i]);
    return merged;
}

} // namespace

std::vector<Tri2> triangulate(const Polygon& poly) {
    if (poly.empty()) return {};
    Polygon p = poly;
    normalize_orientation(p);
    std::vector<Vec2> ring = p.rings[0];
    for (size_t r = 1; r < p.rings.size(); ++r)
        ring = bridge_hole(ring, p.rings[r]);
    return earclip(std::move(ring));
}

double colinear_overlap(const Vec2& p1, const Vec2& p2,
                        const Vec2& q1, const Vec2& q2, double tol) {
    Vec2 d = p2 - p1;
    double len = d.norm();
    if (len < 1e-12) return 0.0;
    Vec2 u = d * (1.0 / len);
    Vec2 nrm = u.perp_right();

    double tq1 = (q1 - p1).dot(u), tq2 = (q2 - p1).dot(u);
    double lo = std::max(0.0, std::min(tq1, tq2));
    double hi = std::min(len, std::max(tq1, tq2));
    if (hi <= lo) return 0.0;

    // The q segment must hug the p line over the overlapped span.
    double dq1 = std::abs((q1 - p1).dot(nrm));
    double dq2 = std::abs((q2 - p1).dot(nrm));
    if (dq1 > tol || dq2 > tol) return 0.0;
    return hi - lo;
}

} // namespace visar
