#include "visar/hedonic.hpp"
#include "visar/errors.hpp"
#include "visar/rng.hpp"

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace visar {

using nlohmann::json;

const std::vector<double>* TransactionSet::covariate(const std::string& name) const {
    for (size_t i = 0; i < covariate_names.size(); ++i)
        if (covariate_names[i] == name) return &covariates[i];
    return nullptr;
}

int HedonicModel::coef_index(const std::string& name) const {
    for (size_t i = 0; i < coef_names.size(); ++i)
        if (coef_names[i] == name) return static_cast<int>(i);
    return -1;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : line) {
        if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_double(const std::string& s, const std::string& where) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        if (!std::isfinite(v)) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError(where + ": cannot parse '" + s + "' as a number");
    }
}

} // namespace

TransactionSet read_transactions_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);

    std::string line;
    if (!std::getline(in, line)) throw ValidationError(path + ": empty file");
    std::vector<std::string> header = split_csv_line(line);

    int c_id = -1, c_lnp = -1, c_vc = -1, c_agg = -1, c_year = -1;
    std::vector<int> cov_cols;
    TransactionSet set;
    for (size_t i = 0; i < header.size(); ++i) {
        const std::string& h = header[i];
        if (h == "id") c_id = static_cast<int>(i);
        else if (h == "ln_price") c_lnp = static_cast<int>(i);
        else if (h == "vc") c_vc = static_cast<int>(i);
        else if (h == "agglomeration") c_agg = static_cast<int>(i);
        else if (h == "year") c_year = static_cast<int>(i);
        else {
            cov_cols.push_back(static_cast<int>(i));
            set.covariate_names.push_back(h);
        }
    }
    if (c_lnp < 0 || c_vc < 0 || c_agg < 0 || c_year < 0)
        throw ValidationError(path + ": header must contain ln_price, vc, agglomeration, year");
    set.covariates.resize(set.covariate_names.size());

    size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::vector<std::string> cells = split_csv_line(line);
        if (cells.size() != header.size()) {
            std::ostringstream os;
            os << path << ":" << lineno << ": expected " << header.size() << " cells, got "
               << cells.size();
            throw ValidationError(os.str());
        }
        std::string where = path + ":" + std::to_string(lineno);
        set.ids.push_back(c_id >= 0 ? cells[c_id] : "");
        set.ln_price.push_back(parse_double(cells[c_lnp], where + " ln_price"));
        set.vc.push_back(parse_double(cells[c_vc], where + " vc"));
        if (cells[c_agg].empty()) throw ValidationError(where + ": empty agglomeration");
        set.agglomeration.push_back(cells[c_agg]);
        set.year.push_back(parse_double(cells[c_year], where + " year"));
        for (size_t k = 0; k < cov_cols.size(); ++k)
            set.covariates[k].push_back(
                parse_double(cells[cov_cols[k]], where + " " + set.covariate_names[k]));
    }
    return set;
}

void write_transactions_csv(const TransactionSet& set, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << "id,ln_price,vc,agglomeration,year";
    for (const auto& n : set.covariate_names) out << ',' << n;
    out << '\n';
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.12g", v);
        out << ',' << buf;
    };
    for (size_t r = 0; r < set.size(); ++r) {
        out << (r < set.ids.size() ? set.ids[r] : "");
        put(set.ln_price[r]);
        put(set.vc[r]);
        out << ',' << set.agglomeration[r];
        put(set.year[r]);
        for (const auto& col : set.covariates) put(col[r]);
        out << '\n';
    }
}

namespace {

// The design layout shared by fit and predict: ordered column names plus a
// row builder.
struct Design {
    std::vector<std::string> names;
    std::vector<std::string> agglomerations;
    std::vector<double> years;
};

Design plan_design(const TransactionSet& set, const ModelSpec& spec) {
    Design d;
    if (spec.vc_mode == VcMode::ByAgglomeration) {
        std::set<std::string> uniq(set.agglomeration.begin(), set.agglomeration.end());
        d.agglomerations.assign(uniq.begin(), uniq.end());
        if (d.agglomerations.empty())
            throw ValidationError("by_agglomeration fit needs agglomeration values");
    }
    if (spec.year_mode == YearMode::Dummies) {
        std::set<double> uniq(set.year.begin(), set.year.end());
        d.years.assign(uniq.begin(), uniq.end());
    }

    if (spec.intercept) d.names.push_back("Intercept");
    if (spec.vc_mode == VcMode::Pooled) {
        d.names.push_back("VC");
    } else {
        for (const auto& g : d.agglomerations) d.names.push_back("VC:[" + g + "]");
    }
    for (const auto& c : spec.covariates) d.names.push_back(c);
    if (spec.year_mode == YearMode::Continuous) {
        d.names.push_back("year");
    } else {
        for (size_t i = 1; i < d.years.size(); ++i) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.10g", d.years[i]);
            d.names.push_back(std::string("year:") + buf);
        }
    }
    if (d.names.empty()) throw ValidationError("empty design");
    return d;
}

void fill_design_row(Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> row, const Design& d,
                     const ModelSpec& spec,
                     double vc, const std::string& agglo, double year,
                     const std::vector<const std::vector<double>*>& cov_cols, size_t r) {
    int c = 0;
    if (spec.intercept) row(c++) = 1.0;
    if (spec.vc_mode == VcMode::Pooled) {
        row(c++) = vc;
    } else {
        for (const auto& g : d.agglomerations) row(c++) = (agglo == g) ? vc : 0.0;
    }
    for (const auto* col : cov_cols) row(c++) = (*col)[r];
    if (spec.year_mode == YearMode::Continuous) {
        row(c++) = year;
    } else {
        for (size_t i = 1; i < d.years.size(); ++i) row(c++) = (year == d.years[i]) ? 1.0 : 0.0;
    }
}

} // namespace

HedonicModel fit(const TransactionSet& records, const ModelSpec& spec) {
    const auto n = static_cast<Eigen::Index>(records.size());
    if (n == 0) throw ValidationError("no records");

    Design d = plan_design(records, spec);
    const auto k = static_cast<Eigen::Index>(d.names.size());
    if (n <= k) {
        std::ostringstream os;
        os << "too few observations: n = " << n << " for " << k << " design columns";
        throw ValidationError(os.str());
    }

    std::vector<const std::vector<double>*> cov_cols;
    for (const auto& name : spec.covariates) {
        const auto* col = records.covariate(name);
        if (!col) throw ValidationError("unknown covariate column '" + name + "'");
        cov_cols.push_back(col);
    }

    Eigen::MatrixXd X(n, k);
    Eigen::VectorXd y(n);
    for (Eigen::Index r = 0; r < n; ++r) {
        fill_design_row(X.row(r), d, spec, records.vc[r], records.agglomeration[r],
                        records.year[r], cov_cols, static_cast<size_t>(r));
        y(r) = records.ln_price[r];
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
    if (qr.rank() < k) {
        // Columns pivoted past the numerical rank are the dependent ones.
        const auto& perm = qr.colsPermutation().indices();
        std::ostringstream os;
        os << "design is rank deficient; collinear columns:";
        for (Eigen::Index i = qr.rank(); i < k; ++i) os << ' ' << d.names[perm(i)];
        throw NumericError(os.str());
    }

    Eigen::VectorXd beta = qr.solve(y);
    Eigen::VectorXd resid = y - X * beta;

    // HC1 sandwich: (X'X)^-1 X' diag(e^2) X (X'X)^-1 * n/(n-k), with
    // (X'X)^-1 recovered from the R factor.
    Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
    Eigen::MatrixXd Rinv = R.triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
    Eigen::MatrixXd P = qr.colsPermutation();
    Eigen::MatrixXd xtx_inv = P * (Rinv * Rinv.transpose()) * P.transpose();
    Eigen::MatrixXd meat = X.transpose() * resid.array().square().matrix().asDiagonal() * X;
    Eigen::MatrixXd cov = xtx_inv * meat * xtx_inv *
                          (static_cast<double>(n) / static_cast<double>(n - k));

    double ss_res = resid.squaredNorm();
    double ss_tot;
    if (spec.intercept) {
        double mean = y.mean();
        ss_tot = (y.array() - mean).square().sum();
    } else {
        ss_tot = y.squaredNorm();
    }
    double r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;

    HedonicModel model;
    model.spec = spec;
    model.coef_names = d.names;
    model.agglomerations = d.agglomerations;
    model.years = d.years;
    model.n = n;
    model.r2 = r2;
    model.adj_r2 = 1.0 - (1.0 - r2) * (static_cast<double>(n - 1) / static_cast<double>(n - k));
    model.beta.assign(beta.data(), beta.data() + k);
    model.robust_se.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) model.robust_se[i] = std::sqrt(std::max(0.0, cov(i, i)));
    return model;
}

double predict(const HedonicModel& model, const Attributes& attrs) {
    double acc = 0.0;
    size_t c = 0;
    const ModelSpec& spec = model.spec;
    auto next = [&]() -> double { return model.beta.at(c++); };

    if (spec.intercept) acc += next();
    if (spec.vc_mode == VcMode::Pooled) {
        acc += next() * attrs.vc;
    } else {
        bool found = false;
        for (const auto& g : model.agglomerations) {
            double b = next();
            if (g == attrs.agglomeration) {
                acc += b * attrs.vc;
                found = true;
            }
        }
        if (!found)
            throw ValidationError("unknown agglomeration '" + attrs.agglomeration + "'");
    }
    for (const auto& name : spec.covariates) {
        auto it = attrs.covariates.find(name);
        if (it == attrs.covariates.end())
            throw ValidationError("missing attribute '" + name + "'");
        acc += next() * it->second;
    }
    if (spec.year_mode == YearMode::Continuous) {
        acc += next() * attrs.year;
    } else {
        bool known = !model.years.empty() && attrs.year == model.years.front();
        for (size_t i = 1; i < model.years.size(); ++i) {
            double b = next();
            if (attrs.year == model.years[i]) {
                acc += b;
                known = true;
            }
        }
        if (!known) throw ValidationError("unknown year in dummies mode");
    }
    return acc;
}

double vc_coefficient(const HedonicModel& model, const std::string& agglomeration) {
    std::string name =
        model.spec.vc_mode == VcMode::Pooled ? "VC" : "VC:[" + agglomeration + "]";
    int idx = model.coef_index(name);
    if (idx < 0) throw ValidationError("unknown agglomeration '" + agglomeration + "'");
    return model.beta[idx];
}

PriceDelta price_delta_vc(const HedonicModel& model, const std::string& agglomeration,
                          double dvc) {
    double b = vc_coefficient(model, agglomeration);
    PriceDelta out;
    out.d_ln_price = b * dvc;
    out.relative = std::expm1(out.d_ln_price);
    return out;
}

HedonicModel load_model(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }

    HedonicModel m;
    const auto& sj = j.at("spec");
    std::string vm = sj.value("vc_mode", "pooled");
    if (vm == "pooled") m.spec.vc_mode = VcMode::Pooled;
    else if (vm == "by_agglomeration") m.spec.vc_mode = VcMode::ByAgglomeration;
    else throw ValidationError("unknown vc_mode '" + vm + "'");
    std::string ym = sj.value("year_mode", "continuous");
    if (ym == "continuous") m.spec.year_mode = YearMode::Continuous;
    else if (ym == "dummies") m.spec.year_mode = YearMode::Dummies;
    else throw ValidationError("unknown year_mode '" + ym + "'");
    m.spec.intercept = sj.value("intercept", true);
    m.spec.covariates = sj.value("covariates", std::vector<std::string>{});
    m.agglomerations = sj.value("agglomerations", std::vector<std::string>{});
    m.years = sj.value("years", std::vector<double>{});

    m.n = j.value("n", 0);
    m.r2 = j.value("r2", 0.0);
    m.adj_r2 = j.value("adj_r2", 0.0);
    for (const auto& cj : j.at("coefficients")) {
        m.coef_names.push_back(cj.at("name").get<std::string>());
        m.beta.push_back(cj.at("beta").get<double>());
        m.robust_se.push_back(cj.value("robust_se", 0.0));
    }
    if (m.beta.empty()) throw ValidationError(path + ": model has no coefficients");
    return m;
}

void save_model(const HedonicModel& m, const std::string& path) {
    json coeffs = json::array();
    for (size_t i = 0; i < m.beta.size(); ++i)
        coeffs.push_back({{"name", m.coef_names[i]},
                          {"beta", m.beta[i]},
                          {"robust_se", m.robust_se[i]}});
    json j = {
        {"spec",
         {{"vc_mode", m.spec.vc_mode == VcMode::Pooled ? "pooled" : "by_agglomeration"},
          {"year_mode", m.spec.year_mode == YearMode::Continuous ? "continuous" : "dummies"},
          {"intercept", m.spec.intercept},
          {"covariates", m.spec.covariates},
          {"agglomerations", m.agglomerations},
          {"years", m.years}}},
        {"n", m.n},
        {"r2", m.r2},
        {"adj_r2", m.adj_r2},
        {"coefficients", std::move(coeffs)},
    };
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(1) << "\n";
}

SyntheticData make_synthetic_transactions(const SynthOptions& options) {
    Rng rng(options.seed);
    const std::vector<std::string> agglos = {"Eastshore", "Midtown", "Westshore"};
    const std::vector<double> vc_beta = {0.29, 0.35, 0.40};
    const double pooled_vc_beta = 0.35;
    const double intercept = -60.0, year_beta = 0.03;
    const std::vector<std::pair<std::string, double>> cov_beta = {
        {"log_volume", 0.39}, {"log_plot_area", 0.18}, {"n_rooms", 0.05}, {"condition", 0.05}};

    TransactionSet set;
    set.covariate_names.reserve(cov_beta.size());
    for (const auto& [name, beta] : cov_beta) set.covariate_names.push_back(name);
    set.covariates.resize(cov_beta.size());

    for (size_t i = 0; i < options.n; ++i) {
        size_t gi = static_cast<size_t>(rng.uniform_int(0, static_cast<int64_t>(agglos.size()) - 1));
        double vc = rng.uniform(0.2, 0.8);
        double year = static_cast<double>(rng.uniform_int(2008, 2017));
        double cov_vals[4] = {rng.normal(6.5, 0.4), rng.normal(6.0, 0.5),
                              static_cast<double>(rng.uniform_int(2, 8)),
                              static_cast<double>(rng.uniform_int(1, 5))};

        double mu = intercept + year_beta * year;
        mu += (options.vc_mode == VcMode::Pooled ? pooled_vc_beta : vc_beta[gi]) * vc;
        for (size_t c = 0; c < cov_beta.size(); ++c) mu += cov_beta[c].second * cov_vals[c];

        set.ids.push_back("t" + std::to_string(i));
        set.ln_price.push_back(mu + rng.normal(0.0, options.noise_sigma));
        set.vc.push_back(vc);
        set.agglomeration.push_back(agglos[gi]);
        set.year.push_back(year);
        for (size_t c = 0; c < cov_beta.size(); ++c) set.covariates[c].push_back(cov_vals[c]);
    }

    SyntheticData out;
    out.records = std::move(set);
    out.true_beta.emplace_back("Intercept", intercept);
    if (options.vc_mode == VcMode::Pooled) {
        out.true_beta.emplace_back("VC", pooled_vc_beta);
    } else {
        for (size_t g = 0; g < agglos.size(); ++g)
            out.true_beta.emplace_back("VC:[" + agglos[g] + "]", vc_beta[g]);
    }
    for (const auto& [name, beta] : cov_beta) out.true_beta.emplace_back(name, beta);
    out.true_beta.emplace_back("year", year_beta);
    return out;
}

} // namespace visar
