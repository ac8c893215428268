// Command-line front end: every subcommand is a thin shell around the
// library so that file outputs are byte-identical to direct library calls.

#include "visar/citymodel.hpp"
#include "visar/errors.hpp"
#include "visar/fixtures.hpp"
#include "visar/hedonic.hpp"
#include "visar/impact.hpp"
#include "visar/parallel.hpp"
#include "visar/scenario.hpp"
#include "visar/vcscore.hpp"
#include "visar/viewmetrics.hpp"
#include "visar/visibility.hpp"

#include <CLI/CLI.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace visar;

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

int default_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 1 : static_cast<int>(n);
}

struct CityOpts {
    std::string terrain, buildings, canopy, landcover;
};

void add_city_opts(CLI::App* cmd, CityOpts& o) {
    cmd->add_option("--terrain", o.terrain, "Terrain elevation grid (.asc)")->required();
    cmd->add_option("--buildings", o.buildings, "Building footprints (GeoJSON)")->required();
    cmd->add_option("--canopy", o.canopy, "Vegetation height grid (.asc)")->required();
    cmd->add_option("--landcover", o.landcover, "Land-cover category grid (.asc)")->required();
}

struct SimOpts {
    std::string registry_path;
    double spacing = kDefaultViewpointSpacing;
    double story_height = kDefaultStoryHeight;
    int rays_azimuth = 65;
    int rays_elevation = 40;
    double hfov = 120.0;
    double vfov = 120.0;
    double max_range = 50000.0;
    int workers = default_workers();
};

void add_sim_opts(CLI::App* cmd, SimOpts& o) {
    cmd->add_option("--registry", o.registry_path, "Metric registry JSON (default: built-in)");
    cmd->add_option("--spacing", o.spacing, "Viewpoint spacing along facades, m")
        ->capture_default_str();
    cmd->add_option("--story-height", o.story_height, "Vertical viewpoint spacing, m")
        ->capture_default_str();
    cmd->add_option("--rays-azimuth", o.rays_azimuth, "Horizontal ray count")
        ->capture_default_str();
    cmd->add_option("--rays-elevation", o.rays_elevation, "Vertical ray count")
        ->capture_default_str();
    cmd->add_option("--hfov", o.hfov, "Horizontal field of view, degrees")->capture_default_str();
    cmd->add_option("--vfov", o.vfov, "Vertical field of view, degrees")->capture_default_str();
    cmd->add_option("--max-range", o.max_range, "Ray cutoff distance, m")->capture_default_str();
    cmd->add_option("--workers", o.workers, "Worker threads")->capture_default_str();
}

RayConfig ray_config(const SimOpts& o) {
    RayConfig c;
    c.n_azimuth = o.rays_azimuth;
    c.n_elevation = o.rays_elevation;
    c.horizontal_fov_deg = o.hfov;
    c.vertical_fov_deg = o.vfov;
    c.max_range = o.max_range;
    return c;
}

MetricRegistry make_registry(const SimOpts& o) {
    return o.registry_path.empty() ? default_registry() : registry_from_json(o.registry_path);
}

std::string out_path(const std::string& dir, const std::string& name) {
    fs::create_directories(dir.empty() ? "." : dir);
    return (fs::path(dir.empty() ? "." : dir) / name).string();
}

/// Casts every requested building against one shared scene. Results land in
/// slots indexed by input order, so the worker count never changes output.
std::pair<std::vector<VisualShareTensor>, std::vector<MetricVector>>
simulate_city(const CityModel& city, const std::vector<std::string>& ids,
              const MetricRegistry& registry, const RayConfig& cfg, const SimOpts& o) {
    Scene scene = build_scene(city);
    Bvh bvh(scene);
    std::vector<VisualShareTensor> tensors(ids.size());
    std::vector<MetricVector> rows(ids.size());
    parallel_for(ids.size(), o.workers, [&](size_t i) {
        tensors[i] = visual_share_with(bvh, city, ids[i], cfg, o.spacing, o.story_height);
        rows[i] = aggregate(tensors[i], registry);
    });
    return {std::move(tensors), std::move(rows)};
}

std::vector<std::string> all_ids(const CityModel& city) {
    std::vector<std::string> ids;
    ids.reserve(city.buildings.size());
    for (const auto& b : city.buildings) ids.push_back(b.id);
    return ids;
}

void write_vc_csv(const std::vector<VisualCapital>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id,vc\n";
    for (const auto& r : rows) out << r.building_id << ',' << fmt(r.vc) << '\n';
}

void write_run_vc_csv(const RunResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "scenario_id,building_id,vc\n";
    for (const auto& [bid, vc] : res.vc_ref) out << "ref," << bid << ',' << fmt(vc) << '\n';
    for (const auto& e : res.vc_alt)
        out << e.scenario_id << ',' << e.building_id << ',' << fmt(e.vc) << '\n';
}

void write_mevm_csv(const ImpactMatrix& impact, const std::string& path) {
    auto signed_rows = mevm(impact, false);
    auto loss_rows = mevm(impact, true);
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "building_id,scenario_id,metric,rc,metric_loss_only,rc_loss_only\n";
    for (size_t i = 0; i < signed_rows.size(); ++i) {
        const auto& s = signed_rows[i];
        const auto& l = loss_rows[i];
        out << s.building_id << ',' << s.scenario_id << ',' << s.metric_name << ','
            << (s.metric_name.empty() ? "" : fmt(s.rc)) << ',' << l.metric_name << ','
            << (l.metric_name.empty() ? "" : fmt(l.rc)) << '\n';
    }
}

void write_price_csvs(const PriceImpact& pi, const std::string& dir) {
    {
        std::ofstream out(out_path(dir, "price_impact.csv"));
        if (!out) throw ValidationError("cannot write price_impact.csv");
        out << "scenario_id,building_id,d_ln_price,rel_price_change\n";
        for (const auto& c : pi.cells)
            out << c.scenario_id << ',' << c.building_id << ',' << fmt(c.d_ln_price) << ','
                << fmt(c.relative) << '\n';
    }
    {
        std::ofstream out(out_path(dir, "price_scenarios.csv"));
        if (!out) throw ValidationError("cannot write price_scenarios.csv");
        out << "scenario_id,direct_effect,cumulative_local_effect,net_effect\n";
        for (const auto& s : pi.per_scenario)
            out << s.scenario_id << ',' << (s.has_direct ? fmt(s.de) : std::string()) << ','
                << fmt(s.cle) << ',' << (s.has_direct ? fmt(s.net) : std::string()) << '\n';
    }
    {
        std::ofstream out(out_path(dir, "price_buildings.csv"));
        if (!out) throw ValidationError("cannot write price_buildings.csv");
        out << "building_id,exposure,no_adverse\n";
        for (const auto& b : pi.per_building)
            out << b.building_id << ',' << fmt(b.ele) << ',' << (b.no_adverse ? 1 : 0) << '\n';
    }
}

struct AssessOpts {
    CityOpts city;
    SimOpts sim;
    std::string scorer_path;
    std::string model_path;
    std::string agglomeration = "Lausanne";
    std::string out_dir = ".";
};

void add_assess_opts(CLI::App* cmd, AssessOpts& o) {
    add_city_opts(cmd, o.city);
    add_sim_opts(cmd, o.sim);
    cmd->add_option("--scorer", o.scorer_path, "Visual-capital scorer JSON (default: built-in)");
    cmd->add_option("--model", o.model_path, "Hedonic model JSON (default: built-in)");
    cmd->add_option("--agglomeration", o.agglomeration,
                    "Agglomeration whose VC coefficient prices the changes")
        ->capture_default_str();
    cmd->add_option("-o,--out", o.out_dir, "Output directory")->capture_default_str();
}

void run_assessment(const AssessOpts& o, const ScenarioSet& set) {
    MetricRegistry registry = make_registry(o.sim);
    VcScorer scorer = o.scorer_path.empty() ? make_reference_scorer(registry)
                                            : load_scorer(o.scorer_path);
    check_alignment(scorer, registry);
    HedonicModel model = o.model_path.empty() ? make_lakeside_model() : load_model(o.model_path);
    // Fail before the simulation if the agglomeration has no VC coefficient.
    vc_coefficient(model, o.agglomeration);

    size_t planned = planned_evaluations(set);
    write_plan_manifest(set, out_path(o.out_dir, "plan.json"));
    std::cout << "scenarios: " << set.scenarios.size() << "\nplanned evaluations: " << planned
              << std::endl;

    auto t0 = std::chrono::steady_clock::now();
    RunResult res = run_plan(set, ray_config(o.sim), registry, scorer, o.sim.workers,
                             o.sim.spacing, o.sim.story_height);
    auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::cout << "executed evaluations: " << res.evaluations << " in " << fmt(dt) << " s"
              << std::endl;

    ImpactMatrix impact = delta_many(res.alts, res.ref);
    impact.modified_building = res.modified_building;
    impact = relative_change(impact);

    write_impact_csv(impact, out_path(o.out_dir, "impact.csv"));
    write_mevm_csv(impact, out_path(o.out_dir, "mevm.csv"));
    write_run_vc_csv(res, out_path(o.out_dir, "vc.csv"));

    PriceImpact pi =
        price_impact(res.vc_ref, res.vc_alt, model, o.agglomeration, res.modified_building);
    write_price_csvs(pi, o.out_dir);

    std::vector<DriverRanking> rankings;
    if (scorer.type == VcScorer::Type::Linear) rankings = rank_metric_drivers(impact, scorer);
    auto summaries = summarize_impacts(pi, res.modified_building, rankings);
    write_impact_geojson(set.reference, summaries, out_path(o.out_dir, "impact.geojson"));
    std::cout << "wrote plan.json, impact.csv, mevm.csv, vc.csv, price_*.csv, impact.geojson to "
              << o.out_dir << std::endl;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"visar: building-level visual landscape simulation and appraisal"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a TOML/INI file (flags win)");

    const std::map<std::string, VcMode> vc_modes{{"pooled", VcMode::Pooled},
                                                 {"by-agglomeration", VcMode::ByAgglomeration}};
    const std::map<std::string, YearMode> year_modes{{"continuous", YearMode::Continuous},
                                                     {"dummies", YearMode::Dummies}};

    // build
    auto* cmd_build = app.add_subcommand("build", "Load, validate and normalize a city model");
    CityOpts build_city;
    std::string build_out = ".";
    add_city_opts(cmd_build, build_city);
    cmd_build->add_option("-o,--out", build_out, "Output directory")->capture_default_str();
    cmd_build->callback([&] {
        CityModel city = load_city(build_city.terrain, build_city.buildings, build_city.canopy,
                                   build_city.landcover);
        city = merge_joint_structures(city);
        write_buildings_geojson(city.buildings, out_path(build_out, "buildings_normalized.geojson"));
        std::vector<std::string> groups;
        for (const auto& b : city.buildings)
            if (!b.joint_group.empty()) groups.push_back(b.joint_group);
        std::sort(groups.begin(), groups.end());
        groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
        char hash[32];
        std::snprintf(hash, sizeof hash, "%016llx",
                      static_cast<unsigned long long>(city_hash(city)));
        std::cout << "buildings: " << city.buildings.size() << "\njoint groups: " << groups.size()
                  << "\nterrain: " << city.terrain.ncols << "x" << city.terrain.nrows << " cells @ "
                  << fmt(city.terrain.cell) << " m\nmodel hash: " << hash << std::endl;
    });

    // simulate
    auto* cmd_sim = app.add_subcommand("simulate", "Cast view cones; write shares and metrics");
    CityOpts sim_city;
    SimOpts sim_opts;
    std::vector<std::string> sim_only;
    std::string sim_out = ".";
    add_city_opts(cmd_sim, sim_city);
    add_sim_opts(cmd_sim, sim_opts);
    cmd_sim->add_option("--building", sim_only, "Only these building ids (default: all)")
        ->delimiter(',');
    cmd_sim->add_option("-o,--out", sim_out, "Output directory")->capture_default_str();
    cmd_sim->callback([&] {
        CityModel city =
            load_city(sim_city.terrain, sim_city.buildings, sim_city.canopy, sim_city.landcover);
        MetricRegistry registry = make_registry(sim_opts);
        std::vector<std::string> ids = sim_only.empty() ? all_ids(city) : sim_only;
        for (const auto& id : ids)
            if (find_building(city, id) < 0)
                throw ValidationError("unknown building id '" + id + "'");
        auto [tensors, rows] = simulate_city(city, ids, registry, ray_config(sim_opts), sim_opts);
        write_shares_csv(tensors, out_path(sim_out, "shares.csv"));
        write_metrics_csv(rows, registry, out_path(sim_out, "metrics.csv"));
        size_t n_vp = 0;
        for (const auto& t : tensors) n_vp += t.n_viewpoints();
        std::cout << "simulated " << ids.size() << " buildings, " << n_vp << " viewpoints, "
                  << tensors.front().n_rays_per_viewpoint << " rays each\nwrote shares.csv, "
                  << "metrics.csv to " << sim_out << std::endl;
    });

    // appraise
    auto* cmd_appraise =
        app.add_subcommand("appraise", "Score visual capital for every building");
    CityOpts app_city;
    SimOpts app_opts;
    std::string app_scorer, app_out = ".";
    add_city_opts(cmd_appraise, app_city);
    add_sim_opts(cmd_appraise, app_opts);
    cmd_appraise->add_option("--scorer", app_scorer,
                             "Visual-capital scorer JSON (default: built-in)");
    cmd_appraise->add_option("-o,--out", app_out, "Output directory")->capture_default_str();
    cmd_appraise->callback([&] {
        CityModel city =
            load_city(app_city.terrain, app_city.buildings, app_city.canopy, app_city.landcover);
        MetricRegistry registry = make_registry(app_opts);
        VcScorer scorer =
            app_scorer.empty() ? make_reference_scorer(registry) : load_scorer(app_scorer);
        check_alignment(scorer, registry);
        auto ids = all_ids(city);
        auto [tensors, rows] = simulate_city(city, ids, registry, ray_config(app_opts), app_opts);
        std::vector<VisualCapital> vcs;
        vcs.reserve(rows.size());
        for (const auto& r : rows) vcs.push_back(score(r, scorer));
        write_metrics_csv(rows, registry, out_path(app_out, "metrics.csv"));
        write_vc_csv(vcs, out_path(app_out, "vc.csv"));
        std::cout << "appraised " << vcs.size() << " buildings\nwrote metrics.csv, vc.csv to "
                  << app_out << std::endl;
    });

    // fit
    auto* cmd_fit = app.add_subcommand("fit", "Fit the hedonic pricing model from transactions");
    std::string fit_tx, fit_out = "model.json";
    ModelSpec fit_spec;
    std::vector<std::string> fit_covs;
    bool fit_no_intercept = false;
    cmd_fit->add_option("--transactions", fit_tx, "Transactions CSV")->required();
    cmd_fit->add_option("--vc-mode", fit_spec.vc_mode, "VC coefficient structure")
        ->transform(CLI::CheckedTransformer(vc_modes, CLI::ignore_case))
        ->default_str("pooled");
    cmd_fit->add_option("--year-mode", fit_spec.year_mode, "Year effect structure")
        ->transform(CLI::CheckedTransformer(year_modes, CLI::ignore_case))
        ->default_str("continuous");
    cmd_fit->add_option("--covariates", fit_covs,
                        "Covariate columns to include (default: all in the CSV)")
        ->delimiter(',');
    cmd_fit->add_flag("--no-intercept", fit_no_intercept, "Drop the intercept");
    cmd_fit->add_option("-o,--out", fit_out, "Model JSON path")->capture_default_str();
    cmd_fit->callback([&] {
        TransactionSet tx = read_transactions_csv(fit_tx);
        fit_spec.intercept = !fit_no_intercept;
        fit_spec.covariates = fit_covs.empty() ? tx.covariate_names : fit_covs;
        HedonicModel model = fit(tx, fit_spec);
        save_model(model, fit_out);
        std::cout << "n = " << model.n << ", k = " << model.beta.size()
                  << ", R2 = " << fmt(model.r2) << ", adj R2 = " << fmt(model.adj_r2) << '\n';
        for (size_t i = 0; i < model.beta.size(); ++i)
            std::cout << "  " << model.coef_names[i] << " = " << fmt(model.beta[i]) << "  [se "
                      << fmt(model.robust_se[i]) << "]\n";
        std::cout << "wrote " << fit_out << std::endl;
    });

    // assess single | regional
    auto* cmd_assess = app.add_subcommand("assess", "Quantify design-scenario price impacts");
    cmd_assess->require_subcommand(1);

    auto* cmd_single =
        cmd_assess->add_subcommand("single", "One development replacing existing buildings");
    AssessOpts single_opts;
    std::vector<std::string> single_removed;
    std::string single_massing;
    double single_radius = kDefaultDevelopmentRadius;
    add_assess_opts(cmd_single, single_opts);
    cmd_single->add_option("--remove", single_removed, "Building ids the development replaces")
        ->delimiter(',')
        ->required();
    cmd_single->add_option("--massing", single_massing, "Replacement massing (GeoJSON)")
        ->required();
    cmd_single->add_option("--radius", single_radius, "Evaluation window radius, m")
        ->capture_default_str();
    cmd_single->callback([&] {
        CityModel city = load_city(single_opts.city.terrain, single_opts.city.buildings,
                                   single_opts.city.canopy, single_opts.city.landcover);
        ScenarioSet set = single_development(city, single_removed, single_massing, single_radius);
        run_assessment(single_opts, set);
    });

    auto* cmd_regional =
        cmd_assess->add_subcommand("regional", "Up-zone every building in turn");
    AssessOpts regional_opts;
    int regional_floors = kDefaultUpzoneFloors;
    int regional_neighbors = kDefaultNeighborCount;
    add_assess_opts(cmd_regional, regional_opts);
    cmd_regional->add_option("--floors", regional_floors, "Floors added per scenario")
        ->capture_default_str();
    cmd_regional->add_option("--neighbors", regional_neighbors,
                             "Evaluated neighbors per scenario")
        ->capture_default_str();
    cmd_regional->callback([&] {
        CityModel city = load_city(regional_opts.city.terrain, regional_opts.city.buildings,
                                   regional_opts.city.canopy, regional_opts.city.landcover);
        ScenarioSet set = regional_upzoning(city, regional_floors, regional_neighbors);
        run_assessment(regional_opts, set);
    });

    // synth
    auto* cmd_synth = app.add_subcommand("synth", "Generate synthetic transactions");
    SynthOptions synth_opts;
    std::string synth_out = "transactions.csv";
    cmd_synth->add_option("--n", synth_opts.n, "Rows")->capture_default_str();
    cmd_synth->add_option("--seed", synth_opts.seed, "RNG seed")->capture_default_str();
    cmd_synth->add_option("--sigma", synth_opts.noise_sigma, "Noise standard deviation")
        ->capture_default_str();
    cmd_synth->add_option("--vc-mode", synth_opts.vc_mode, "VC coefficient structure")
        ->transform(CLI::CheckedTransformer(vc_modes, CLI::ignore_case))
        ->default_str("pooled");
    cmd_synth->add_option("-o,--out", synth_out, "Output CSV path")->capture_default_str();
    cmd_synth->callback([&] {
        SyntheticData data = make_synthetic_transactions(synth_opts);
        write_transactions_csv(data.records, synth_out);
        std::cout << "wrote " << data.records.size() << " transactions to " << synth_out
                  << "\ntrue coefficients:\n";
        for (const auto& [name, beta] : data.true_beta)
            std::cout << "  " << name << " = " << fmt(beta) << '\n';
        std::cout.flush();
    });

    // export
    auto* cmd_export =
        app.add_subcommand("export", "Write the built-in registry, scorer and model");
    std::string export_out = ".";
    cmd_export->add_option("-o,--out", export_out, "Output directory")->capture_default_str();
    cmd_export->callback([&] {
        MetricRegistry registry = default_registry();
        registry_to_json(registry, out_path(export_out, "registry_default.json"));
        save_scorer(make_reference_scorer(registry), out_path(export_out, "scorer_reference.json"));
        save_model(make_lakeside_model(), out_path(export_out, "model_lakeside.json"));
        std::cout << "wrote registry_default.json, scorer_reference.json, model_lakeside.json to "
                  << export_out << std::endl;
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 4;
    }
    return 0;
}
