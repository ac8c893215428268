#include "visar/viewmetrics.hpp"
#include "visar/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

namespace visar {

using nlohmann::json;

int MetricRegistry::index_of(const std::string& name) const {
    for (size_t i = 0; i < defs.size(); ++i)
        if (defs[i].name == name) return static_cast<int>(i);
    return -1;
}

std::vector<std::string> MetricRegistry::names() const {
    std::vector<std::string> out;
    out.reserve(defs.size());
    for (const auto& d : defs) out.push_back(d.name);
    return out;
}

namespace {

std::vector<int> all_categories() {
    std::vector<int> v(kNumCategories);
    for (int i = 0; i < kNumCategories; ++i) v[i] = i + 1;
    return v;
}

std::vector<int> all_bins() { return {1, 2, 3, 4}; }

std::vector<int> non_sky_categories() {
    std::vector<int> v;
    for (int c = 1; c <= kNumCategories; ++c)
        if (c != kCatSky) v.push_back(c);
    return v;
}

} // namespace

MetricRegistry default_registry() {
    MetricRegistry reg;
    const auto& names = category_names();

    for (int c = 1; c <= kNumCategories; ++c) {
        reg.defs.push_back({"maxVSH:" + names[c - 1], Aggregator::MaxOverViewpoints, {c},
                            all_bins(), MetricKind::Share});
        reg.defs.push_back({"meanVSH:" + names[c - 1], Aggregator::MeanOverViewpoints, {c},
                            all_bins(), MetricKind::Share});
    }

    // Near and far distance shares over everything that is not sky (sky's
    // far-bin assignment is bookkeeping, not an observed distance).
    reg.defs.push_back({"maxVSH:Near", Aggregator::MaxOverViewpoints, non_sky_categories(), {1},
                        MetricKind::Share});
    reg.defs.push_back({"meanVSH:Near", Aggregator::MeanOverViewpoints, non_sky_categories(), {1},
                        MetricKind::Share});
    reg.defs.push_back({"maxVSH:Far", Aggregator::MaxOverViewpoints, non_sky_categories(), {4},
                        MetricKind::Share});
    reg.defs.push_back({"meanVSH:Far", Aggregator::MeanOverViewpoints, non_sky_categories(), {4},
                        MetricKind::Share});

    reg.defs.push_back({"ElementRichness", Aggregator::MaxOverViewpoints, all_categories(),
                        all_bins(), MetricKind::Richness});
    reg.defs.push_back({"PanoramaRichness", Aggregator::MeanOverViewpoints, all_categories(),
                        all_bins(), MetricKind::Richness});
    reg.defs.push_back({"DistanceBalance", Aggregator::MeanOverViewpoints, non_sky_categories(),
                        all_bins(), MetricKind::Balance});

    auto group = [](auto arr) { return std::vector<int>(arr.begin(), arr.end()); };
    const std::vector<int> pos = group(kPositiveCategories);
    const std::vector<int> neg = group(kNegativeCategories);
    const std::vector<int> neu = group(kNeutralCategories);
    reg.defs.push_back({"maxSentiment:Positive", Aggregator::MaxOverViewpoints, pos, all_bins(),
                        MetricKind::Sentiment});
    reg.defs.push_back({"meanSentiment:Positive", Aggregator::MeanOverViewpoints, pos, all_bins(),
                        MetricKind::Sentiment});
    reg.defs.push_back({"maxSentiment:Negative", Aggregator::MaxOverViewpoints, neg, all_bins(),
                        MetricKind::Sentiment});
    reg.defs.push_back({"meanSentiment:Negative", Aggregator::MeanOverViewpoints, neg, all_bins(),
                        MetricKind::Sentiment});
    reg.defs.push_back({"maxSentiment:Neutral", Aggregator::MaxOverViewpoints, neu, all_bins(),
                        MetricKind::Sentiment});
    reg.defs.push_back({"meanSentiment:Neutral", Aggregator::MeanOverViewpoints, neu, all_bins(),
                        MetricKind::Sentiment});

    reg.defs.push_back({"avgSkyExposure", Aggregator::MeanOverViewpoints, {kCatSky}, all_bins(),
                        MetricKind::Share});
    return reg;
}

namespace {

double aggregate_values(Aggregator agg, const std::vector<double>& per_viewpoint) {
    if (per_viewpoint.empty()) return 0.0;
    if (agg == Aggregator::MaxOverViewpoints)
        return *std::max_element(per_viewpoint.begin(), per_viewpoint.end());
    double s = 0.0;
    for (double v : per_viewpoint) s += v;
    return s / static_cast<double>(per_viewpoint.size());
}

// Per-viewpoint summed share over the selector.
std::vector<double> selector_shares(const VisualShareTensor& t, const std::vector<int>& cats,
                                    const std::vector<int>& bins) {
    std::vector<double> out;
    out.reserve(t.n_viewpoints());
    for (size_t v = 0; v < t.n_viewpoints(); ++v) {
        uint64_t c = 0;
        for (int cat : cats)
            for (int bin : bins) c += t.count(v, cat, bin);
        out.push_back(static_cast<double>(c) / t.n_rays_per_viewpoint);
    }
    return out;
}

double metric_share(const VisualShareTensor& t, const MetricDef& d) {
    return aggregate_values(d.aggregator, selector_shares(t, d.categories, d.bins));
}

double metric_richness(const VisualShareTensor& t, const MetricDef& d) {
    if (d.aggregator == Aggregator::MaxOverViewpoints) {
        // Element richness: categories seen by more than one ray from the
        // best viewpoint (share strictly above 1/n_rays).
        int n = 0;
        for (int cat : d.categories) {
            uint32_t best = 0;
            for (size_t v = 0; v < t.n_viewpoints(); ++v) {
                uint32_t c = 0;
                for (int bin : d.bins) c += t.count(v, cat, bin);
                best = std::max(best, c);
            }
            if (best > 1) ++n;
        }
        return static_cast<double>(n);
    }
    // Panorama richness: mean per-viewpoint count of categories hit at all.
    std::vector<double> per_vp;
    per_vp.reserve(t.n_viewpoints());
    for (size_t v = 0; v < t.n_viewpoints(); ++v) {
        int n = 0;
        for (int cat : d.categories) {
            uint32_t c = 0;
            for (int bin : d.bins) c += t.count(v, cat, bin);
            if (c > 0) ++n;
        }
        per_vp.push_back(static_cast<double>(n));
    }
    return aggregate_values(Aggregator::MeanOverViewpoints, per_vp);
}

double metric_balance(const VisualShareTensor& t, const MetricDef& d) {
    std::vector<double> per_vp;
    per_vp.reserve(t.n_viewpoints());
    for (size_t v = 0; v < t.n_viewpoints(); ++v) {
        double bin_counts[kNumDistanceBins] = {0, 0, 0, 0};
        double total = 0.0;
        for (int cat : d.categories) {
            for (int bin : d.bins) {
                double c = t.count(v, cat, bin);
                bin_counts[bin - 1] += c;
                total += c;
            }
        }
        if (total <= 0.0) {
            per_vp.push_back(0.0);
            continue;
        }
        double h = 0.0;
        for (double c : bin_counts) {
            if (c <= 0.0) continue;
            double p = c / total;
            h -= p * std::log(p);
        }
        per_vp.push_back(h / std::log(4.0));
    }
    return aggregate_values(Aggregator::MeanOverViewpoints, per_vp);
}

double metric_sentiment(const VisualShareTensor& t, const MetricDef& d) {
    double s = 0.0;
    for (int cat : d.categories)
        s += aggregate_values(d.aggregator, selector_shares(t, {cat}, d.bins));
    return s;
}

} // namespace

MetricVector aggregate(const VisualShareTensor& tensor, const MetricRegistry& registry) {
    if (tensor.n_viewpoints() == 0)
        throw ValidationError("no viewpoints for building '" + tensor.building_id + "'");
    MetricVector out;
    out.building_id = tensor.building_id;
    out.values.reserve(registry.size());
    for (const auto& d : registry.defs) {
        double v = 0.0;
        switch (d.kind) {
            case MetricKind::Share: v = metric_share(tensor, d); break;
            case MetricKind::Richness: v = metric_richness(tensor, d); break;
            case MetricKind::Balance: v = metric_balance(tensor, d); break;
            case MetricKind::Sentiment: v = metric_sentiment(tensor, d); break;
        }
        out.values.push_back(v);
    }
    return out;
}

namespace {

const char* aggregator_name(Aggregator a) {
    return a == Aggregator::MaxOverViewpoints ? "max_over_viewpoints" : "mean_over_viewpoints";
}

Aggregator aggregator_from(const std::string& s) {
    if (s == "max_over_viewpoints") return Aggregator::MaxOverViewpoints;
    if (s == "mean_over_viewpoints") return Aggregator::MeanOverViewpoints;
    throw ValidationError("unknown aggregator '" + s + "'");
}

const char* kind_name(MetricKind k) {
    switch (k) {
        case MetricKind::Share: return "share";
        case MetricKind::Richness: return "richness";
        case MetricKind::Balance: return "balance";
        case MetricKind::Sentiment: return "sentiment";
    }
    return "share";
}

MetricKind kind_from(const std::string& s) {
    if (s == "share") return MetricKind::Share;
    if (s == "richness") return MetricKind::Richness;
    if (s == "balance") return MetricKind::Balance;
    if (s == "sentiment") return MetricKind::Sentiment;
    throw ValidationError("unknown metric kind '" + s + "'");
}

} // namespace

MetricRegistry registry_from_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }
    if (!j.is_array()) throw ValidationError(path + ": registry must be a JSON array");

    MetricRegistry reg;
    for (const auto& dj : j) {
        MetricDef d;
        d.name = dj.at("name").get<std::string>();
        d.aggregator = aggregator_from(dj.at("aggregator").get<std::string>());
        d.kind = kind_from(dj.value("kind", "share"));
        for (const auto& c : dj.at("categories")) {
            int code = c.is_string() ? category_code(c.get<std::string>()) : c.get<int>();
            if (code < 1 || code > kNumCategories)
                throw ValidationError("metric '" + d.name + "': bad category");
            d.categories.push_back(code);
        }
        for (const auto& b : dj.at("bins")) {
            int bin = b.get<int>();
            if (bin < 1 || bin > kNumDistanceBins)
                throw ValidationError("metric '" + d.name + "': bad distance bin");
            d.bins.push_back(bin);
        }
        reg.defs.push_back(std::move(d));
    }
    for (size_t i = 0; i < reg.defs.size(); ++i)
        for (size_t k = i + 1; k < reg.defs.size(); ++k)
            if (reg.defs[i].name == reg.defs[k].name)
                throw ValidationError("duplicate metric name '" + reg.defs[i].name + "'");
    return reg;
}

void registry_to_json(const MetricRegistry& registry, const std::string& path) {
    json j = json::array();
    for (const auto& d : registry.defs) {
        j.push_back({{"name", d.name},
                     {"aggregator", aggregator_name(d.aggregator)},
                     {"kind", kind_name(d.kind)},
                     {"categories", d.categories},
                     {"bins", d.bins}});
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(1) << "\n";
}

void write_metrics_csv(const std::vector<MetricVector>& rows, const MetricRegistry& registry,
                       const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id";
    for (const auto& d : registry.defs) out << ',' << d.name;
    out << '\n';
    char buf[64];
    for (const auto& row : rows) {
        if (row.values.size() != registry.size())
            throw ValidationError("metric vector for '" + row.building_id +
                                  "' does not match the registry size");
        out << row.building_id;
        for (double v : row.values) {
            std::snprintf(buf, sizeof buf, "%.12g", v);
            out << ',' << buf;
        }
        out << '\n';
    }
}

} // namespace visar
