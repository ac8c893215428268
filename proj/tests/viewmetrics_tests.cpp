#include "visar/errors.hpp"
#include "visar/viewmetrics.hpp"

#include "support/test_util.hpp"

#include <doctest/doctest.h>

#include <cmath>
#include <set>
#include <sstream>

using namespace visar;

namespace {

ConeCounts cone(std::initializer_list<std::array<uint32_t, 3>> cells) {
    ConeCounts cc;
    for (const auto& c : cells) cc.counts[c[0] - 1][c[1] - 1] = c[2];
    return cc;
}

VisualShareTensor hand_tensor() {
    VisualShareTensor t;
    t.building_id = "h";
    t.n_rays_per_viewpoint = 100;
    t.per_viewpoint.push_back(cone({{kCatWater, 2, 2}, {kCatGrass, 1, 8}, {kCatSky, 4, 90}}));
    t.per_viewpoint.push_back(cone({{kCatWater, 1, 8},
                                    {kCatNature, 2, 20},
                                    {kCatRock, 3, 1},
                                    {kCatSky, 4, 71}}));
    return t;
}

double value_of(const MetricVector& mv, const MetricRegistry& reg, const std::string& name) {
    int i = reg.index_of(name);
    REQUIRE(i >= 0);
    return mv.values[static_cast<size_t>(i)];
}

} // namespace

TEST_CASE("default registry layout") {
    MetricRegistry reg = default_registry();
    CHECK(reg.size() == 54);

    std::vector<std::string> names = reg.names();
    std::set<std::string> uniq(names.begin(), names.end());
    CHECK(uniq.size() == reg.size());

    CHECK(reg.index_of("maxVSH:Sky") == 0);
    CHECK(reg.index_of("meanVSH:Sky") == 1);
    CHECK(reg.index_of("maxVSH:Water") == 8);
    CHECK(reg.index_of("maxVSH:Near") == 40);
    CHECK(reg.index_of("ElementRichness") == 44);
    CHECK(reg.index_of("avgSkyExposure") == 53);
    CHECK(reg.index_of("nope") == -1);
}

TEST_CASE("share metrics on a hand tensor") {
    MetricRegistry reg = default_registry();
    VisualShareTensor t = hand_tensor();
    MetricVector mv = aggregate(t, reg);
    REQUIRE(mv.values.size() == 54);
    CHECK(mv.building_id == "h");

    CHECK(value_of(mv, reg, "maxVSH:Water") == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(value_of(mv, reg, "meanVSH:Water") == doctest::Approx(0.05).epsilon(1e-12));
    CHECK(value_of(mv, reg, "maxVSH:Nature") == doctest::Approx(0.20).epsilon(1e-12));
    CHECK(value_of(mv, reg, "meanVSH:Nature") == doctest::Approx(0.10).epsilon(1e-12));
    CHECK(value_of(mv, reg, "maxVSH:Sky") == doctest::Approx(0.90).epsilon(1e-12));
    CHECK(value_of(mv, reg, "avgSkyExposure") == doctest::Approx(0.805).epsilon(1e-12));
    CHECK(value_of(mv, reg, "maxVSH:Glacier") == 0.0);

    // Near/far pool every non-sky category in the respective bin.
    CHECK(value_of(mv, reg, "maxVSH:Near") == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(value_of(mv, reg, "meanVSH:Near") == doctest::Approx(0.08).epsilon(1e-12));
    CHECK(value_of(mv, reg, "maxVSH:Far") == 0.0);
}

TEST_CASE("richness metrics") {
    MetricRegistry reg = default_registry();
    VisualShareTensor t = hand_tensor();
    MetricVector mv = aggregate(t, reg);

    // Water, Grass, Nature and Sky all peak above one ray; Rock's single
    // ray does not count.
    CHECK(value_of(mv, reg, "ElementRichness") == doctest::Approx(4.0));
    // Per-viewpoint present categories: 3 and 4.
    CHECK(value_of(mv, reg, "PanoramaRichness") == doctest::Approx(3.5));
}

TEST_CASE("distance balance") {
    MetricRegistry reg = default_registry();

    VisualShareTensor t = hand_tensor();
    MetricVector mv = aggregate(t, reg);
    auto entropy4 = [](std::initializer_list<double> counts) {
        double total = 0.0;
        for (double c : counts) total += c;
        double h = 0.0;
        for (double c : counts) {
            if (c <= 0.0) continue;
            h -= (c / total) * std::log(c / total);
        }
        return h / std::log(4.0);
    };
    double expected = 0.5 * (entropy4({8, 2}) + entropy4({8, 20, 1}));
    CHECK(value_of(mv, reg, "DistanceBalance") == doctest::Approx(expected).epsilon(1e-12));

    // Uniform spread over the four bins is perfectly balanced.
    VisualShareTensor u;
    u.building_id = "u";
    u.n_rays_per_viewpoint = 100;
    u.per_viewpoint.push_back(cone({{kCatGrass, 1, 25},
                                    {kCatGrass, 2, 25},
                                    {kCatWater, 3, 25},
                                    {kCatRoof, 4, 25}}));
    CHECK(value_of(aggregate(u, reg), reg, "DistanceBalance") == doctest::Approx(1.0));

    // Everything in one bin has zero entropy.
    VisualShareTensor s;
    s.building_id = "s";
    s.n_rays_per_viewpoint = 100;
    s.per_viewpoint.push_back(cone({{kCatGrass, 1, 100}}));
    CHECK(value_of(aggregate(s, reg), reg, "DistanceBalance") == 0.0);

    // Pure sky viewpoints contribute zero, not NaN.
    VisualShareTensor k;
    k.building_id = "k";
    k.n_rays_per_viewpoint = 100;
    k.per_viewpoint.push_back(cone({{kCatSky, 4, 100}}));
    CHECK(value_of(aggregate(k, reg), reg, "DistanceBalance") == 0.0);
}

TEST_CASE("sentiment composites sum per-category aggregates") {
    MetricRegistry reg = default_registry();
    VisualShareTensor t = hand_tensor();
    MetricVector mv = aggregate(t, reg);

    // Per-category maxima live at different viewpoints, so the composite
    // exceeds the best single-viewpoint group share (0.28).
    CHECK(value_of(mv, reg, "maxSentiment:Positive") == doctest::Approx(0.36).epsilon(1e-12));
    CHECK(value_of(mv, reg, "meanSentiment:Positive") == doctest::Approx(0.19).epsilon(1e-12));
    CHECK(value_of(mv, reg, "maxSentiment:Negative") == 0.0);
    CHECK(value_of(mv, reg, "meanSentiment:Neutral") == 0.0);
}

TEST_CASE("single viewpoint collapses max onto mean") {
    MetricRegistry reg = default_registry();
    VisualShareTensor t;
    t.building_id = "one";
    t.n_rays_per_viewpoint = 100;
    t.per_viewpoint.push_back(cone({{kCatWater, 2, 30}, {kCatSky, 4, 70}}));
    MetricVector mv = aggregate(t, reg);
    for (size_t i = 0; i < reg.size(); ++i) {
        const auto& d = reg.defs[i];
        if (d.kind != MetricKind::Share) continue;
        if (d.aggregator != Aggregator::MaxOverViewpoints) continue;
        int mean_idx = -1;
        for (size_t k = 0; k < reg.size(); ++k)
            if (reg.defs[k].kind == d.kind && reg.defs[k].categories == d.categories &&
                reg.defs[k].bins == d.bins &&
                reg.defs[k].aggregator == Aggregator::MeanOverViewpoints)
                mean_idx = static_cast<int>(k);
        if (mean_idx < 0) continue;
        CHECK(mv.values[i] == mv.values[static_cast<size_t>(mean_idx)]);
    }
}

TEST_CASE("aggregate rejects empty tensors") {
    VisualShareTensor t;
    t.building_id = "void";
    t.n_rays_per_viewpoint = 100;
    CHECK_THROWS_WITH_AS(aggregate(t, default_registry()),
                         doctest::Contains("void"), ValidationError);
}

TEST_CASE("registry json round trip") {
    testutil::TempDir tmp;
    MetricRegistry reg = default_registry();
    registry_to_json(reg, tmp.file("reg.json"));
    MetricRegistry back = registry_from_json(tmp.file("reg.json"));
    REQUIRE(back.size() == reg.size());
    CHECK(back.names() == reg.names());
    for (size_t i = 0; i < reg.size(); ++i) {
        CHECK(back.defs[i].aggregator == reg.defs[i].aggregator);
        CHECK(back.defs[i].kind == reg.defs[i].kind);
        CHECK(back.defs[i].categories == reg.defs[i].categories);
        CHECK(back.defs[i].bins == reg.defs[i].bins);
    }
    MetricVector a = aggregate(hand_tensor(), reg);
    MetricVector b = aggregate(hand_tensor(), back);
    CHECK(a.values == b.values);
}

TEST_CASE("registry json validation") {
    testutil::TempDir tmp;

    testutil::spit(tmp.file("byname.json"),
                   R"([{"name":"water1","aggregator":"max_over_viewpoints",
                        "kind":"share","categories":["Water"],"bins":[1]}])");
    MetricRegistry byname = registry_from_json(tmp.file("byname.json"));
    REQUIRE(byname.size() == 1);
    CHECK(byname.defs[0].categories == std::vector<int>{kCatWater});

    testutil::spit(tmp.file("dup.json"),
                   R"([{"name":"m","aggregator":"max_over_viewpoints","categories":[1],"bins":[1]},
                       {"name":"m","aggregator":"mean_over_viewpoints","categories":[2],"bins":[2]}])");
    CHECK_THROWS_WITH_AS(registry_from_json(tmp.file("dup.json")),
                         doctest::Contains("duplicate metric name 'm'"), ValidationError);

    testutil::spit(tmp.file("badcat.json"),
                   R"([{"name":"m","aggregator":"max_over_viewpoints","categories":[21],"bins":[1]}])");
    CHECK_THROWS_WITH_AS(registry_from_json(tmp.file("badcat.json")),
                         doctest::Contains("bad category"), ValidationError);

    testutil::spit(tmp.file("badbin.json"),
                   R"([{"name":"m","aggregator":"max_over_viewpoints","categories":[1],"bins":[5]}])");
    CHECK_THROWS_WITH_AS(registry_from_json(tmp.file("badbin.json")),
                         doctest::Contains("bad distance bin"), ValidationError);

    testutil::spit(tmp.file("badagg.json"),
                   R"([{"name":"m","aggregator":"median","categories":[1],"bins":[1]}])");
    CHECK_THROWS_WITH_AS(registry_from_json(tmp.file("badagg.json")),
                         doctest::Contains("unknown aggregator"), ValidationError);

    testutil::spit(tmp.file("notarray.json"), R"({"name":"m"})");
    CHECK_THROWS_AS(registry_from_json(tmp.file("notarray.json")), ValidationError);

    CHECK_THROWS_AS(registry_from_json(tmp.file("absent.json")), ValidationError);
}

TEST_CASE("metrics csv") {
    testutil::TempDir tmp;
    MetricRegistry reg = default_registry();
    MetricVector mv = aggregate(hand_tensor(), reg);
    write_metrics_csv({mv}, reg, tmp.file("m.csv"));

    std::istringstream in(testutil::slurp(tmp.file("m.csv")));
    std::string header, row;
    REQUIRE(std::getline(in, header));
    REQUIRE(std::getline(in, row));
    CHECK(header.rfind("building_id,maxVSH:Sky,meanVSH:Sky,", 0) == 0);
    CHECK(header.find("avgSkyExposure") != std::string::npos);
    CHECK(row.rfind("h,0.9,", 0) == 0);

    MetricVector broken = mv;
    broken.values.pop_back();
    CHECK_THROWS_WITH_AS(write_metrics_csv({broken}, reg, tmp.file("b.csv")),
                         doctest::Contains("does not match"), ValidationError);
}
