#pragma once

#include "visar/scene.hpp"

#include <cstdint>
#include <vector>

namespace visar {

/// Bounding volume hierarchy over scene primitives. Built once per scene,
/// read-only during casting, safe to share across threads.
class Bvh {
  public:
    explicit Bvh(const Scene& scene);

    /// Closest hit along the ray under the total order of hit_beats.
    /// Returns the primitive index, or -1 if nothing is hit within max_range.
    /// On a hit, t_out receives the ray parameter.
    int closest_hit(const Vec3& origin, const Vec3& dir, double max_range, double& t_out) const;

    const Scene& scene() const { return *scene_; }

  private:
    struct Node {
        Vec3 lo, hi;
        int32_t left = -1;   // internal: child node index
        int32_t right = -1;
        int32_t first = 0;   // leaf: range into prim_order_
        int32_t count = 0;   // leaf iff count > 0
    };

    int build(std::vector<int>& items, int begin, int end);

    const Scene* scene_;
    std::vector<Node> nodes_;
    std::vector<int> prim_order_;
};

} // namespace visar
