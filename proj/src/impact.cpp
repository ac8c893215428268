#include "visar/impact.hpp"
#include "visar/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <set>

namespace visar {

using nlohmann::json;

ImpactMatrix delta(const MetricMatrix& v_alt, const MetricMatrix& v_ref) {
    if (v_alt.metric_names != v_ref.metric_names)
        throw ValidationError("metric registries of the two matrices do not match");

    ImpactMatrix out;
    out.metric_names = v_ref.metric_names;
    const size_t m = out.metric_names.size();
    for (const auto& [bid, alt_values] : v_alt.values) {
        auto it = v_ref.values.find(bid);
        if (it == v_ref.values.end()) continue; // evaluated in alt only: outside the mask
        const auto& ref_values = it->second;
        if (alt_values.size() != m || ref_values.size() != m)
            throw ValidationError("metric vector for '" + bid + "' has the wrong length");
        ImpactEntry e;
        e.building_id = bid;
        e.scenario_id = v_alt.scenario_id;
        e.v_ref = ref_values;
        e.v_alt = alt_values;
        e.delta.resize(m);
        for (size_t i = 0; i < m; ++i) e.delta[i] = alt_values[i] - ref_values[i];
        out.entries.push_back(std::move(e));
    }
    return out;
}

ImpactMatrix delta_many(const std::vector<MetricMatrix>& alts, const MetricMatrix& v_ref) {
    ImpactMatrix out;
    out.metric_names = v_ref.metric_names;
    for (const auto& alt : alts) {
        ImpactMatrix one = delta(alt, v_ref);
        for (auto& e : one.entries) out.entries.push_back(std::move(e));
    }
    return out;
}

ImpactMatrix relative_change(const ImpactMatrix& impact) {
    ImpactMatrix out = impact;
    const size_t m = out.metric_names.size();
    for (auto& e : out.entries) {
        e.rel_change.assign(m, 0.0);
        e.flags.assign(m, kFlagNone);
        for (size_t i = 0; i < m; ++i) {
            double ref = e.v_ref[i], alt = e.v_alt[i], d = e.delta[i];
            if (ref > 0.0) {
                e.rel_change[i] = d / ref;
                if (alt == 0.0) e.flags[i] = kFlagFullObstruction;
            } else if (d == 0.0) {
                e.rel_change[i] = 0.0;
            } else {
                e.flags[i] = kFlagNewView;
                e.rel_change[i] = std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return out;
}

std::vector<MevmEntry> mevm(const ImpactMatrix& impact, bool loss_only) {
    std::vector<MevmEntry> out;
    out.reserve(impact.entries.size());
    for (const auto& e : impact.entries) {
        if (e.rel_change.empty())
            throw ValidationError("relative changes not computed; call relative_change first");
        MevmEntry best{e.building_id, e.scenario_id, "", 0.0};
        double best_mag = -1.0;
        for (size_t i = 0; i < e.rel_change.size(); ++i) {
            if (e.flags[i] == kFlagNewView) continue;
            double rc = e.rel_change[i];
            if (loss_only && !(rc < 0.0)) continue;
            double mag = std::abs(rc);
            if (mag > best_mag) { // strict: first metric wins ties (registry order)
                best_mag = mag;
                best.metric_name = impact.metric_names[i];
                best.rc = rc;
            }
        }
        out.push_back(std::move(best));
    }
    return out;
}

namespace {

// The modified building of a scenario, or nullptr when not annotated.
const std::string* modified_of(const ImpactMatrix& impact, const std::string& scenario_id) {
    auto it = impact.modified_building.find(scenario_id);
    if (it == impact.modified_building.end() || it->second.empty()) return nullptr;
    return &it->second;
}

std::vector<std::string> scenario_order(const ImpactMatrix& impact) {
    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& e : impact.entries)
        if (seen.insert(e.scenario_id).second) order.push_back(e.scenario_id);
    return order;
}

} // namespace

std::vector<EffectVector> direct_effects(const ImpactMatrix& impact) {
    std::vector<EffectVector> out;
    for (const auto& sid : scenario_order(impact)) {
        const std::string* mod = modified_of(impact, sid);
        if (!mod)
            throw ValidationError("scenario '" + sid + "' has no modified building");
        const ImpactEntry* found = nullptr;
        for (const auto& e : impact.entries)
            if (e.scenario_id == sid && e.building_id == *mod) { found = &e; break; }
        if (!found)
            throw ValidationError("scenario '" + sid + "': modified building '" + *mod +
                                  "' was not evaluated");
        out.push_back({sid, found->delta});
    }
    return out;
}

std::vector<ImpactEntry> local_effects(const ImpactMatrix& impact) {
    std::vector<ImpactEntry> out;
    for (const auto& e : impact.entries) {
        const std::string* mod = modified_of(impact, e.scenario_id);
        if (mod && *mod == e.building_id) continue;
        out.push_back(e);
    }
    return out;
}

std::vector<EffectVector> cumulative_local_effects(const ImpactMatrix& impact) {
    const size_t m = impact.metric_names.size();
    std::vector<EffectVector> out;
    for (const auto& sid : scenario_order(impact)) out.push_back({sid, std::vector<double>(m, 0.0)});
    auto slot = [&](const std::string& sid) -> std::vector<double>& {
        for (auto& ev : out)
            if (ev.scenario_id == sid) return ev.values;
        throw NumericError("unreachable: scenario vanished");
    };
    for (const auto& e : impact.entries) {
        const std::string* mod = modified_of(impact, e.scenario_id);
        if (mod && *mod == e.building_id) continue;
        auto& acc = slot(e.scenario_id);
        for (size_t i = 0; i < m; ++i) acc[i] += e.delta[i];
    }
    return out;
}

std::vector<ExposureVector> exposure_to_local_effects(const ImpactMatrix& impact) {
    const size_t m = impact.metric_names.size();
    std::map<std::string, ExposureVector> by_building;
    for (const auto& e : impact.entries) {
        const std::string* mod = modified_of(impact, e.scenario_id);
        if (mod && *mod == e.building_id) continue;
        auto [it, fresh] = by_building.try_emplace(e.building_id);
        ExposureVector& x = it->second;
        if (fresh) {
            x.building_id = e.building_id;
            x.values.assign(m, 0.0);
            x.no_adverse.assign(m, 1);
        }
        for (size_t i = 0; i < m; ++i) {
            if (e.delta[i] < 0.0 && (x.no_adverse[i] || e.delta[i] < x.values[i])) {
                x.values[i] = e.delta[i];
                x.no_adverse[i] = 0;
            }
        }
    }
    std::vector<ExposureVector> out;
    out.reserve(by_building.size());
    for (auto& [bid, x] : by_building) out.push_back(std::move(x));
    return out;
}

PriceImpact price_impact(const std::map<std::string, double>& vc_ref,
                         const std::vector<VcEntry>& vc_alt, const HedonicModel& model,
                         const std::string& agglomeration,
                         const std::map<std::string, std::string>& modified_building) {
    const double beta = vc_coefficient(model, agglomeration);

    PriceImpact out;
    out.cells.reserve(vc_alt.size());
    for (const auto& e : vc_alt) {
        auto it = vc_ref.find(e.building_id);
        if (it == vc_ref.end())
            throw ValidationError("no reference VC for building '" + e.building_id + "'");
        double d = beta * (e.vc - it->second);
        out.cells.push_back({e.scenario_id, e.building_id, d, std::expm1(d)});
    }

    std::vector<std::string> order;
    std::set<std::string> seen;
    for (const auto& c : out.cells)
        if (seen.insert(c.scenario_id).second) order.push_back(c.scenario_id);

    for (const auto& sid : order) {
        PriceImpact::PerScenario ps;
        ps.scenario_id = sid;
        auto mit = modified_building.find(sid);
        const std::string* mod =
            (mit != modified_building.end() && !mit->second.empty()) ? &mit->second : nullptr;
        for (const auto& c : out.cells) {
            if (c.scenario_id != sid) continue;
            if (mod && c.building_id == *mod) {
                ps.has_direct = true;
                ps.de = c.d_ln_price;
            } else {
                ps.cle += c.d_ln_price;
            }
        }
        ps.net = ps.de + ps.cle;
        out.per_scenario.push_back(ps);
    }

    std::map<std::string, PriceImpact::PerBuilding> by_building;
    for (const auto& c : out.cells) {
        auto mit = modified_building.find(c.scenario_id);
        if (mit != modified_building.end() && mit->second == c.building_id) continue;
        auto [it, fresh] = by_building.try_emplace(c.building_id);
        if (fresh) {
            it->second.building_id = c.building_id;
            it->second.no_adverse = true;
        }
        if (c.d_ln_price < 0.0 &&
            (it->second.no_adverse || c.d_ln_price < it->second.ele)) {
            it->second.ele = c.d_ln_price;
            it->second.no_adverse = false;
        }
    }
    for (auto& [bid, pb] : by_building) out.per_building.push_back(pb);
    return out;
}

std::vector<DriverRanking> rank_metric_drivers(const ImpactMatrix& impact,
                                               const VcScorer& scorer) {
    if (scorer.type != VcScorer::Type::Linear)
        throw ValidationError("driver ranking requires linear scorer");
    if (scorer.weights.size() != impact.metric_names.size())
        throw ValidationError("scorer weight count does not match the impact metrics");

    std::vector<DriverRanking> out;
    out.reserve(impact.entries.size());
    for (const auto& e : impact.entries) {
        DriverRanking r;
        r.building_id = e.building_id;
        r.scenario_id = e.scenario_id;
        std::vector<size_t> idx;
        for (size_t i = 0; i < e.delta.size(); ++i)
            if (scorer.weights[i] * e.delta[i] != 0.0) idx.push_back(i);
        std::stable_sort(idx.begin(), idx.end(), [&](size_t a, size_t b) {
            return std::abs(scorer.weights[a] * e.delta[a]) >
                   std::abs(scorer.weights[b] * e.delta[b]);
        });
        for (size_t i : idx)
            r.ranked.emplace_back(impact.metric_names[i], scorer.weights[i] * e.delta[i]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_impact_csv(const ImpactMatrix& impact, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id,scenario_id,metric,v_ref,v_alt,delta,rel_change,flags\n";
    char buf[64];
    auto put = [&](double v) {
        if (std::isnan(v)) {
            out << ",nan";
            return;
        }
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << ',' << buf;
    };
    for (const auto& e : impact.entries) {
        for (size_t i = 0; i < impact.metric_names.size(); ++i) {
            out << e.building_id << ',' << e.scenario_id << ',' << impact.metric_names[i];
            put(e.v_ref[i]);
            put(e.v_alt[i]);
            put(e.delta[i]);
            if (e.rel_change.empty()) out << ',';
            else put(e.rel_change[i]);
            const char* flag = "";
            if (!e.flags.empty()) {
                if (e.flags[i] == kFlagNewView) flag = "new_view";
                else if (e.flags[i] == kFlagFullObstruction) flag = "full_obstruction";
            }
            out << ',' << flag << '\n';
        }
    }
}

std::vector<BuildingImpactSummary> summarize_impacts(
    const PriceImpact& pi, const std::map<std::string, std::string>& modified_building,
    const std::vector<DriverRanking>& rankings) {
    // Reverse map: building -> the scenario that modified it (first wins).
    std::map<std::string, std::string> scenario_of;
    for (const auto& [sid, bid] : modified_building)
        if (!bid.empty()) scenario_of.try_emplace(bid, sid);

    auto driver_for = [&](const std::string& bid, const std::string& sid) -> std::string {
        for (const auto& r : rankings)
            if (r.building_id == bid && r.scenario_id == sid)
                return r.ranked.empty() ? "" : r.ranked.front().first;
        return "";
    };

    std::set<std::string> buildings;
    for (const auto& c : pi.cells) buildings.insert(c.building_id);

    std::vector<BuildingImpactSummary> out;
    for (const auto& bid : buildings) {
        BuildingImpactSummary s;
        s.building_id = bid;

        auto sit = scenario_of.find(bid);
        if (sit != scenario_of.end()) {
            for (const auto& ps : pi.per_scenario)
                if (ps.scenario_id == sit->second && ps.has_direct) {
                    s.de = ps.de;
                    break;
                }
        }

        if (s.de) {
            s.d_ln_price = s.de;
            s.top_driver = driver_for(bid, sit->second);
        } else {
            // Worst local effect the building experiences.
            bool any = false;
            double worst = 0.0;
            std::string worst_sid;
            for (const auto& c : pi.cells) {
                if (c.building_id != bid) continue;
                auto mit = modified_building.find(c.scenario_id);
                if (mit != modified_building.end() && mit->second == bid) continue;
                if (!any || c.d_ln_price < worst) {
                    any = true;
                    worst = c.d_ln_price;
                    worst_sid = c.scenario_id;
                }
            }
            if (any) {
                s.d_ln_price = worst;
                s.top_driver = driver_for(bid, worst_sid);
            }
        }
        if (s.d_ln_price) s.rel_price_change = std::expm1(*s.d_ln_price);

        for (const auto& pb : pi.per_building) {
            if (pb.building_id != bid) continue;
            s.ele = pb.ele;
            s.no_adverse = pb.no_adverse;
            break;
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_impact_geojson(const CityModel& city,
                          const std::vector<BuildingImpactSummary>& summaries,
                          const std::string& path) {
    auto find_summary = [&](const std::string& bid) -> const BuildingImpactSummary* {
        for (const auto& s : summaries)
            if (s.building_id == bid) return &s;
        return nullptr;
    };

    json features = json::array();
    for (const auto& b : city.buildings) {
        json coords = json::array();
        for (const auto& ring : b.footprint.rings) {
            json rj = json::array();
            for (const auto& p : ring) rj.push_back({p.x, p.y});
            rj.push_back({ring.front().x, ring.front().y});
            coords.push_back(std::move(rj));
        }
        json props;
        props["id"] = b.id;
        const BuildingImpactSummary* s = find_summary(b.id);
        auto opt = [](const std::optional<double>& v) {
            return v ? json(*v) : json(nullptr);
        };
        props["d_lnP"] = s ? opt(s->d_ln_price) : json(nullptr);
        props["rel_price_change"] = s ? opt(s->rel_price_change) : json(nullptr);
        props["DE"] = s ? opt(s->de) : json(nullptr);
        props["ELE"] = s ? opt(s->ele) : json(nullptr);
        props["no_adverse_exposure"] = s ? json(s->no_adverse) : json(nullptr);
        props["top_driver"] =
            (s && !s->top_driver.empty()) ? json(s->top_driver) : json(nullptr);
        features.push_back({{"type", "Feature"},
                            {"properties", std::move(props)},
                            {"geometry", {{"type", "Polygon"}, {"coordinates", std::move(coords)}}}});
    }
    json fc = {{"type", "FeatureCollection"}, {"features", std::move(features)}};
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << fc.dump(1) << "\n";
}

} // namespace visar
