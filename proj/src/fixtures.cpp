#include "visar/fixtures.hpp"
#include "visar/categories.hpp"

#include <cmath>

namespace visar {

namespace {

Building make_box(const std::string& id, double x0, double y0, double w, double d, double eave) {
    Building b;
    b.id = id;
    b.footprint.rings.push_back({{x0, y0}, {x0 + w, y0}, {x0 + w, y0 + d}, {x0, y0 + d}});
    b.ground_elevation = 0.0;
    b.eave_height = eave;
    b.roof.type = RoofType::Flat;
    return b;
}

Building make_gabled(const std::string& id, double x0, double y0, double w, double d, double eave,
                     double ridge) {
    Building b = make_box(id, x0, y0, w, d, eave);
    b.roof.type = RoofType::Gabled;
    b.roof.ridge_height = ridge;
    b.roof.ridge_axis = {1.0, 0.0};
    return b;
}

} // namespace

CityModel make_toy_commune() {
    CityModel city;

    const int n = 100;
    const double cell = 10.0;
    for (Grid* g : {&city.terrain, &city.canopy, &city.landcover}) {
        g->ncols = n;
        g->nrows = n;
        g->xll = 0.0;
        g->yll = 0.0;
        g->cell = cell;
        g->nodata = -9999.0;
        g->values.assign(static_cast<size_t>(n) * n, 0.0);
    }

    for (int row = 0; row < n; ++row) {
        for (int col = 0; col < n; ++col) {
            double x = col * cell, y = (n - 1 - row) * cell; // cell lower-left corner
            int code = kCatGrass;
            double canopy = 0.0;
            if (y < 200.0) {
                code = kCatWater; // lake strip along the southern edge
            } else if (x >= 700.0 && x < 900.0 && y >= 600.0 && y < 800.0) {
                code = kCatNature; // forest patch
                canopy = 15.0;
            } else if (x >= 480.0 && x < 500.0 && y >= 200.0) {
                code = kCatMajorRoad; // north-south road
            }
            city.landcover.at(col, row) = code;
            city.canopy.at(col, row) = canopy;
        }
    }

    // Shoreline row: 88 m slabs with 12 m gaps, nearly walling off the lake.
    char id[8];
    for (int i = 0; i < 8; ++i) {
        std::snprintf(id, sizeof id, "b%02d", i + 1);
        city.buildings.push_back(make_box(id, 40.0 + 100.0 * i, 220.0, 88.0, 30.0, 10.0));
    }
    // Middle row: alternating flat and gabled.
    for (int i = 0; i < 6; ++i) {
        std::snprintf(id, sizeof id, "b%02d", i + 9);
        double x0 = 80.0 + 130.0 * i;
        if (i % 2 == 0)
            city.buildings.push_back(make_box(id, x0, 320.0, 60.0, 30.0, 10.0));
        else
            city.buildings.push_back(make_gabled(id, x0, 320.0, 60.0, 30.0, 10.0, 13.0));
    }
    // Back row: lower eaves.
    for (int i = 0; i < 6; ++i) {
        std::snprintf(id, sizeof id, "b%02d", i + 15);
        city.buildings.push_back(make_box(id, 80.0 + 130.0 * i, 420.0, 60.0, 30.0, 7.0));
    }

    city.scenario_id = "ref";
    validate_city(city);
    return city;
}

void write_toy_commune(const std::string& dir) {
    CityModel city = make_toy_commune();
    write_asc(city.terrain, dir + "/terrain.asc");
    write_asc(city.canopy, dir + "/canopy.asc");
    write_asc(city.landcover, dir + "/landcover.asc");
    write_buildings_geojson(city.buildings, dir + "/buildings.geojson");
}

std::vector<Building> make_toy_massing() {
    // Three towers on the block of b10/b11.
    std::vector<Building> towers;
    towers.push_back(make_box("tower-a", 210.0, 320.0, 34.0, 30.0, 35.0));
    towers.push_back(make_box("tower-b", 254.0, 320.0, 34.0, 30.0, 35.0));
    towers.push_back(make_box("tower-c", 298.0, 320.0, 32.0, 30.0, 35.0));
    return towers;
}

std::vector<std::string> toy_massing_removed_ids() { return {"b10", "b11"}; }

VcScorer make_reference_scorer(const MetricRegistry& registry) {
    VcScorer s;
    s.type = VcScorer::Type::Linear;
    s.metric_names = registry.names();
    s.weights.assign(registry.size(), 0.0);
    s.bias = -0.5;
    s.squash = Squash::Logistic;

    auto set = [&](const std::string& name, double w) {
        int idx = registry.index_of(name);
        if (idx >= 0) s.weights[idx] = w;
    };
    set("maxVSH:Water", 1.2);
    set("meanVSH:Water", 0.6);
    set("maxVSH:Nature", 0.8);
    set("meanVSH:Nature", 0.4);
    set("maxVSH:UrbanGreen", 0.5);
    set("maxVSH:Grass", 0.3);
    set("maxVSH:Vegetation", 0.3);
    set("avgSkyExposure", 0.6);
    set("maxVSH:Sky", 0.3);
    set("maxVSH:Far", 0.4);
    set("DistanceBalance", 0.3);
    set("PanoramaRichness", 0.05);
    set("ElementRichness", 0.02);
    set("maxSentiment:Positive", 0.2);
    set("maxSentiment:Negative", -0.8);
    set("meanSentiment:Negative", -0.4);
    set("maxVSH:Industrial", -0.5);
    set("maxVSH:MajorRoad", -0.4);
    set("maxVSH:Rail", -0.3);
    set("maxVSH:Near", -0.2);
    return s;
}

HedonicModel make_lakeside_model() {
    HedonicModel m;
    m.spec.vc_mode = VcMode::ByAgglomeration;
    m.spec.year_mode = YearMode::Continuous;
    m.spec.intercept = true;
    m.spec.covariates = {"log_volume",     "n_rooms", "condition",     "fitout_standard",
                         "log_distance_water", "age",     "log_plot_area", "log_macro_location"};
    m.agglomerations = {"Biel/Bienne", "Genève", "Lausanne",       "Luzern", "Neuchâtel",
                        "Thun",        "Vevey-Montreux", "Zug",    "Zürich"};
    m.n = 7651;
    m.r2 = 0.81;
    m.adj_r2 = 0.81;

    auto add = [&](const std::string& name, double beta, double se) {
        m.coef_names.push_back(name);
        m.beta.push_back(beta);
        m.robust_se.push_back(se);
    };
    add("Intercept", -61.87, 2.79);
    add("VC:[Biel/Bienne]", 0.29, 0.03);
    add("VC:[Genève]", 0.37, 0.03);
    add("VC:[Lausanne]", 0.35, 0.03);
    add("VC:[Luzern]", 0.34, 0.03);
    add("VC:[Neuchâtel]", 0.30, 0.03);
    add("VC:[Thun]", 0.32, 0.03);
    add("VC:[Vevey-Montreux]", 0.33, 0.02);
    add("VC:[Zug]", 0.40, 0.03);
    add("VC:[Zürich]", 0.39, 0.03);
    add("log_volume", 0.39, 0.02);
    add("n_rooms", 0.05, 0.005);
    add("condition", 0.05, 0.005);
    add("fitout_standard", 0.14, 0.005);
    add("log_distance_water", -0.08, 0.005);
    add("age", 0.34, 0.30);
    add("log_plot_area", 0.18, 0.01);
    add("log_macro_location", 0.40, 0.01);
    add("year", 0.03, 0.002);
    return m;
}

} // namespace visar
