#pragma once

#include "visar/visibility.hpp"

#include <string>
#include <vector>

namespace visar {

enum class Aggregator { MaxOverViewpoints, MeanOverViewpoints };

/// How a metric reduces the (viewpoint x category x bin) count tensor:
///  - Share: per-viewpoint summed share over the selector, then aggregated.
///  - Richness: Max = number of categories whose per-category maxVSH exceeds
///    one ray; Mean = mean per-viewpoint count of visible categories.
///  - Balance: mean normalized entropy of the distance-bin marginal.
///  - Sentiment: sum over selected categories of their aggregated VSH.
enum class MetricKind { Share, Richness, Balance, Sentiment };

struct MetricDef {
    std::string name;
    Aggregator aggregator = Aggregator::MaxOverViewpoints;
    std::vector<int> categories; ///< category codes the metric looks at
    std::vector<int> bins;       ///< distance bins the metric looks at
    MetricKind kind = MetricKind::Share;
};

struct MetricRegistry {
    std::vector<MetricDef> defs;

    size_t size() const { return defs.size(); }
    int index_of(const std::string& name) const; ///< -1 if absent
    std::vector<std::string> names() const;
};

struct MetricVector {
    std::string building_id;
    std::vector<double> values; ///< one per registry entry, registry order
};

/// The shipped 54-metric registry: per-category max/mean visual shares,
/// near and far distance shares, element and panorama richness, distance
/// balance, sentiment composites and average sky exposure.
MetricRegistry default_registry();

/// Reduces a building's visual-share tensor to its metric vector.
MetricVector aggregate(const VisualShareTensor& tensor, const MetricRegistry& registry);

MetricRegistry registry_from_json(const std::string& path);
void registry_to_json(const MetricRegistry& registry, const std::string& path);

/// Wide CSV: building_id column followed by one column per metric.
void write_metrics_csv(const std::vector<MetricVector>& rows, const MetricRegistry& registry,
                       const std::string& path);

} // namespace visar
