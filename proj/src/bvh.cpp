#include "visar/bvh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace visar {

namespace {

constexpr int kLeafSize = 4;

// Entry distance of a ray into a node box, or +inf on a miss. Unlike
// primitive boxes, starting inside counts as entry at 0 so the node is
// still descended into.
double node_entry(const Vec3& lo_v, const Vec3& hi_v, const Vec3& origin, const Vec3& dir,
                  const Vec3& inv_dir) {
    double t_enter = -std::numeric_limits<double>::infinity();
    double t_exit = std::numeric_limits<double>::infinity();
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double inv[3] = {inv_dir.x, inv_dir.y, inv_dir.z};
    const double lo[3] = {lo_v.x, lo_v.y, lo_v.z};
    const double hi[3] = {hi_v.x, hi_v.y, hi_v.z};
    for (int axis = 0; axis < 3; ++axis) {
        if (d[axis] == 0.0) {
            if (o[axis] < lo[axis] || o[axis] > hi[axis])
                return std::numeric_limits<double>::infinity();
            continue;
        }
        double t1 = (lo[axis] - o[axis]) * inv[axis];
        double t2 = (hi[axis] - o[axis]) * inv[axis];
        if (t1 > t2) std::swap(t1, t2);
        t_enter = std::max(t_enter, t1);
        t_exit = std::min(t_exit, t2);
        if (t_enter > t_exit) return std::numeric_limits<double>::infinity();
    }
    if (t_exit < 0.0) return std::numeric_limits<double>::infinity();
    return std::max(t_enter, 0.0);
}

} // namespace

Bvh::Bvh(const Scene& scene) : scene_(&scene) {
    prim_order_.resize(scene.prims.size());
    for (size_t i = 0; i < prim_order_.size(); ++i) prim_order_[i] = static_cast<int>(i);
    if (!prim_order_.empty()) {
        nodes_.reserve(2 * prim_order_.size());
        build(prim_order_, 0, static_cast<int>(prim_order_.size()));
    }
}

int Bvh::build(std::vector<int>& items, int begin, int end) {
    Node node;
    node.lo = {std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
    node.hi = {-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
               -std::numeric_limits<double>::infinity()};
    for (int i = begin; i < end; ++i) {
        Vec3 lo, hi;
        prim_bounds(scene_->prims[items[i]], lo, hi);
        node.lo = {std::min(node.lo.x, lo.x), std::min(node.lo.y, lo.y), std::min(node.lo.z, lo.z)};
        node.hi = {std::max(node.hi.x, hi.x), std::max(node.hi.y, hi.y), std::max(node.hi.z, hi.z)};
    }

    int idx = static_cast<int>(nodes_.size());
    nodes_.push_back(node);

    int n = end - begin;
    if (n <= kLeafSize) {
        nodes_[idx].first = begin;
        nodes_[idx].count = n;
        return idx;
    }

    // Median split along the widest axis of primitive centroids.
    Vec3 ext = node.hi - node.lo;
    int axis = 0;
    if (ext.y > ext.x) axis = 1;
    if (ext.z > (axis == 0 ? ext.x : ext.y)) axis = 2;

    auto centroid = [&](int prim_idx) {
        Vec3 lo, hi;
        prim_bounds(scene_->prims[prim_idx], lo, hi);
        double c[3] = {(lo.x + hi.x) * 0.5, (lo.y + hi.y) * 0.5, (lo.z + hi.z) * 0.5};
        return c[axis];
    };

    int mid = begin + n / 2;
    std::nth_element(items.begin() + begin, items.begin() + mid, items.begin() + end,
                     [&](int a, int b) {
                         double ca = centroid(a), cb = centroid(b);
                         if (ca != cb) return ca < cb;
                         return a < b; // total order keeps the build deterministic
                     });

    int left = build(items, begin, mid);
    int right = build(items, mid, end);
    nodes_[idx].left = left;
    nodes_[idx].right = right;
    return idx;
}

int Bvh::closest_hit(const Vec3& origin, const Vec3& dir, double max_range, double& t_out) const {
    if (nodes_.empty()) return -1;

    const Vec3 inv_dir{1.0 / dir.x, 1.0 / dir.y, 1.0 / dir.z};
    double best_t = max_range;
    int best_prim = -1;

    // Manual stack; near child pushed last so it is visited first.
    int stack[128];
    int top = 0;
    double root_entry = node_entry(nodes_[0].lo, nodes_[0].hi, origin, dir, inv_dir);
    if (!(root_entry <= best_t)) return -1;
    stack[top++] = 0;

    while (top > 0) {
        const Node& node = nodes_[stack[--top]];
        // Re-check against the current best: it may have tightened since push.
        double entry = node_entry(node.lo, node.hi, origin, dir, inv_dir);
        if (entry > best_t) continue;

        if (node.count > 0) {
            for (int i = node.first; i < node.first + node.count; ++i) {
                int prim_idx = prim_order_[i];
                double t;
                if (!intersect_prim(scene_->prims[prim_idx], origin, dir, inv_dir, t)) continue;
                if (t > max_range) continue;
                if (best_prim < 0 ? t <= best_t : hit_beats(t, prim_idx, best_t, best_prim, *scene_)) {
                    best_t = t;
                    best_prim = prim_idx;
                }
            }
            continue;
        }

        double e_left = node_entry(nodes_[node.left].lo, nodes_[node.left].hi, origin, dir, inv_dir);
        double e_right =
            node_entry(nodes_[node.right].lo, nodes_[node.right].hi, origin, dir, inv_dir);
        int near = node.left, far = node.right;
        double e_near = e_left, e_far = e_right;
        if (e_right < e_left) {
            near = node.right; far = node.left;
            e_near = e_right; e_far = e_left;
        }
        // Prune only when entry strictly exceeds the best t, so equal-t
        // candidates are still visited and the tie rule can pick between them.
        if (e_far <= best_t && top < 127) stack[top++] = far;
        if (e_near <= best_t && top < 127) stack[top++] = near;
    }

    if (best_prim < 0) return -1;
    t_out = best_t;
    return best_prim;
}

} // namespace visar
