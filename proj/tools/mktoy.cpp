// Regenerates the committed demo data: the toy lakeside commune, the
// replacement massing, the reference scorer and the shipped pricing model.

#include "visar/citymodel.hpp"
#include "visar/fixtures.hpp"
#include "visar/hedonic.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"

#include <filesystem>
#include <iostream>
#include <string>

namespace fs = std::filesystem;
using namespace visar;

int main(int argc, char** argv) {
    std::string root = argc > 1 ? argv[1] : "data";
    fs::create_directories(fs::path(root) / "toy");

    write_toy_commune((fs::path(root) / "toy").string());
    write_buildings_geojson(make_toy_massing(), (fs::path(root) / "toy" / "massing.geojson").string());

    MetricRegistry registry = default_registry();
    registry_to_json(registry, (fs::path(root) / "registry_default.json").string());
    save_scorer(make_reference_scorer(registry), (fs::path(root) / "scorer_reference.json").string());
    save_model(make_lakeside_model(), (fs::path(root) / "model_lakeside.json").string());

    std::cout << "wrote toy commune and built-in artifacts under " << root << std::endl;
    return 0;
}
