#include "visar/citymodel.hpp"
#include "visar/grid.hpp"
#include "visar/hedonic.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"
#include "visar/visibility.hpp"

#include "support/test_util.hpp"

#include <doctest/doctest.h>

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <string>
#include <sys/wait.h>

using namespace visar;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CmdResult run_cli(testutil::TempDir& tmp, const std::string& args) {
    const char* bin = std::getenv("VISAR_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "VISAR_BIN must point at the visar executable");
    static int counter = 0;
    std::string tag = std::to_string(counter++);
    std::string out_file = tmp.file("cli-out-" + tag + ".txt");
    std::string err_file = tmp.file("cli-err-" + tag + ".txt");
    std::string cmd = std::string(bin) + " " + args + " > " + out_file + " 2> " + err_file;
    int status = std::system(cmd.c_str());
    CmdResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = testutil::slurp(out_file);
    r.err = testutil::slurp(err_file);
    return r;
}

// Two-building city on disk, for end-to-end runs.
struct DiskCity {
    std::string terrain, buildings, canopy, landcover;
    CityModel model;

    explicit DiskCity(testutil::TempDir& tmp) {
        model = testutil::flat_city(6, 6, 10.0);
        model.buildings.push_back(testutil::box_building("a", 10, 10, 12, 10, 6));
        model.buildings.push_back(testutil::box_building("b", 35, 30, 10, 10, 9));
        terrain = tmp.file("terrain.asc");
        canopy = tmp.file("canopy.asc");
        landcover = tmp.file("landcover.asc");
        buildings = tmp.file("buildings.geojson");
        write_asc(model.terrain, terrain);
        write_asc(model.canopy, canopy);
        write_asc(model.landcover, landcover);
        write_buildings_geojson(model.buildings, buildings);
    }

    std::string flags() const {
        return "--terrain " + terrain + " --buildings " + buildings + " --canopy " + canopy +
               " --landcover " + landcover;
    }
};

} // namespace

TEST_CASE("cli synth is reproducible") {
    testutil::TempDir tmp;
    CmdResult r1 = run_cli(tmp, "synth --n 10 --seed 5 -o " + tmp.file("t1.csv"));
    CHECK(r1.exit_code == 0);
    CHECK(r1.out.find("true coefficients") != std::string::npos);

    std::string body = testutil::slurp(tmp.file("t1.csv"));
    size_t lines = 0;
    for (char c : body)
        if (c == '\n') ++lines;
    CHECK(lines == 11); // header + 10 rows

    CmdResult r2 = run_cli(tmp, "synth --n 10 --seed 5 -o " + tmp.file("t2.csv"));
    CHECK(r2.exit_code == 0);
    CHECK(testutil::slurp(tmp.file("t2.csv")) == body);

    TransactionSet set = read_transactions_csv(tmp.file("t1.csv"));
    CHECK(set.size() == 10);
}

TEST_CASE("cli fit writes a loadable model") {
    testutil::TempDir tmp;
    REQUIRE(run_cli(tmp, "synth --n 200 --seed 8 -o " + tmp.file("tx.csv")).exit_code == 0);

    CmdResult r = run_cli(tmp, "fit --transactions " + tmp.file("tx.csv") + " -o " +
                                   tmp.file("model.json"));
    CHECK(r.exit_code == 0);
    CHECK(r.out.find("R2 = ") != std::string::npos);
    CHECK(r.out.find("VC = ") != std::string::npos);

    HedonicModel m = load_model(tmp.file("model.json"));
    CHECK(m.n == 200);
    // Intercept + VC + 4 covariates + year.
    CHECK(m.beta.size() == 7);

    CmdResult byagg = run_cli(tmp, "fit --transactions " + tmp.file("tx.csv") +
                                       " --vc-mode by-agglomeration -o " + tmp.file("m2.json"));
    CHECK(byagg.exit_code == 0);
    HedonicModel m2 = load_model(tmp.file("m2.json"));
    CHECK(m2.beta.size() == 9);
    CHECK(m2.coef_index("VC:[Midtown]") >= 0);
}

TEST_CASE("cli fit reports rank deficiency as a numeric failure") {
    testutil::TempDir tmp;
    std::ofstream out(tmp.file("dup.csv"));
    out << "id,ln_price,vc,agglomeration,year,size,size_copy\n";
    for (int i = 0; i < 12; ++i) {
        double vc = 0.2 + 0.05 * ((i * 7) % 11); // not collinear with anything else
        out << "r" << i << ',' << 1.0 + 0.1 * i << ',' << vc << ",T," << 2008 + i % 3 << ','
            << 5.0 + i << ',' << 5.0 + i << '\n';
    }
    out.close();

    CmdResult r = run_cli(tmp, "fit --transactions " + tmp.file("dup.csv"));
    CHECK(r.exit_code == 3);
    CHECK(r.err.find("collinear columns:") != std::string::npos);
    bool names_column = r.err.find("size") != std::string::npos;
    CHECK(names_column);
}

TEST_CASE("cli input errors exit with code 2") {
    testutil::TempDir tmp;
    DiskCity city(tmp);

    CmdResult missing = run_cli(tmp, "simulate --terrain " + tmp.file("nope.asc") +
                                         " --buildings " + city.buildings + " --canopy " +
                                         city.canopy + " --landcover " + city.landcover);
    CHECK(missing.exit_code == 2);
    CHECK(missing.err.find("error:") != std::string::npos);

    CmdResult ghost =
        run_cli(tmp, "simulate " + city.flags() + " --building zz -o " + tmp.dir("g"));
    CHECK(ghost.exit_code == 2);
    CHECK(ghost.err.find("unknown building id 'zz'") != std::string::npos);

    CHECK(run_cli(tmp, "").exit_code == 2);       // a subcommand is required
    CHECK(run_cli(tmp, "--help").exit_code == 0); // but help is not an error
}

TEST_CASE("cli simulate matches direct library output byte for byte") {
    testutil::TempDir tmp;
    DiskCity city(tmp);

    CmdResult r = run_cli(tmp, "simulate " + city.flags() + " --workers 2 -o " + tmp.dir("cli"));
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("simulated 2 buildings") != std::string::npos);

    CityModel loaded = load_city(city.terrain, city.buildings, city.canopy, city.landcover);
    MetricRegistry reg = default_registry();
    std::vector<VisualShareTensor> tensors;
    std::vector<MetricVector> rows;
    for (const auto& b : loaded.buildings) {
        tensors.push_back(visual_share(loaded, b.id));
        rows.push_back(aggregate(tensors.back(), reg));
    }
    write_shares_csv(tensors, tmp.file("lib-shares.csv"));
    write_metrics_csv(rows, reg, tmp.file("lib-metrics.csv"));

    CHECK(testutil::slurp(tmp.dir("cli") + "/shares.csv") ==
          testutil::slurp(tmp.file("lib-shares.csv")));
    CHECK(testutil::slurp(tmp.dir("cli") + "/metrics.csv") ==
          testutil::slurp(tmp.file("lib-metrics.csv")));
}

TEST_CASE("cli worker count leaves outputs unchanged") {
    testutil::TempDir tmp;
    DiskCity city(tmp);

    REQUIRE(run_cli(tmp, "simulate " + city.flags() + " --workers 1 -o " + tmp.dir("w1"))
                .exit_code == 0);
    REQUIRE(run_cli(tmp, "simulate " + city.flags() + " --workers 4 -o " + tmp.dir("w4"))
                .exit_code == 0);
    CHECK(testutil::slurp(tmp.dir("w1") + "/shares.csv") ==
          testutil::slurp(tmp.dir("w4") + "/shares.csv"));
    CHECK(testutil::slurp(tmp.dir("w1") + "/metrics.csv") ==
          testutil::slurp(tmp.dir("w4") + "/metrics.csv"));
}

TEST_CASE("cli appraise writes vc for every building") {
    testutil::TempDir tmp;
    DiskCity city(tmp);

    CmdResult r = run_cli(tmp, "appraise " + city.flags() + " -o " + tmp.dir("ap"));
    REQUIRE(r.exit_code == 0);
    std::string vc = testutil::slurp(tmp.dir("ap") + "/vc.csv");
    CHECK(vc.rfind("building_id,vc\n", 0) == 0);
    CHECK(vc.find("\na,") != std::string::npos);
    CHECK(vc.find("\nb,") != std::string::npos);
}

TEST_CASE("cli build and export") {
    testutil::TempDir tmp;
    DiskCity city(tmp);

    CmdResult b = run_cli(tmp, "build " + city.flags() + " -o " + tmp.dir("bd"));
    CHECK(b.exit_code == 0);
    CHECK(b.out.find("buildings: 2") != std::string::npos);
    CHECK(b.out.find("model hash: ") != std::string::npos);
    auto norm = read_buildings_geojson(tmp.dir("bd") + "/buildings_normalized.geojson");
    CHECK(norm.size() == 2);

    CmdResult e = run_cli(tmp, "export -o " + tmp.dir("ex"));
    CHECK(e.exit_code == 0);
    CHECK(registry_from_json(tmp.dir("ex") + "/registry_default.json").size() ==
          default_registry().size());
    VcScorer scorer = load_scorer(tmp.dir("ex") + "/scorer_reference.json");
    CHECK(scorer.metric_names.size() == default_registry().size());
    HedonicModel model = load_model(tmp.dir("ex") + "/model_lakeside.json");
    CHECK(model.coef_index("VC:[Lausanne]") >= 0);
}
