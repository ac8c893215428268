#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace visar {

/// Column-oriented transaction table. `covariates` holds every numeric
/// column from the CSV besides the reserved ones, indexed like
/// `covariate_names`.
struct TransactionSet {
    std::vector<std::string> ids;
    std::vector<double> ln_price;
    std::vector<double> vc;
    std::vector<std::string> agglomeration;
    std::vector<double> year;
    std::vector<std::string> covariate_names;
    std::vector<std::vector<double>> covariates; ///< [covariate][row]

    size_t size() const { return ln_price.size(); }
    const std::vector<double>* covariate(const std::string& name) const;
};

enum class VcMode { Pooled, ByAgglomeration };
enum class YearMode { Continuous, Dummies };

struct ModelSpec {
    VcMode vc_mode = VcMode::Pooled;
    YearMode year_mode = YearMode::Continuous;
    bool intercept = true;
    std::vector<std::string> covariates; ///< names of included numeric columns
};

/// Fitted log-price regression. Coefficient names follow the design:
/// "Intercept", "VC" (pooled) or "VC:[<agglomeration>]", covariates by
/// their column names, and "year" or "year:<y>" dummies (first year is the
/// baseline).
struct HedonicModel {
    ModelSpec spec;
    std::vector<std::string> coef_names;
    std::vector<double> beta;
    std::vector<double> robust_se; ///< HC1
    double r2 = 0.0;
    double adj_r2 = 0.0;
    int64_t n = 0;
    std::vector<std::string> agglomerations; ///< distinct, sorted (by_agglomeration)
    std::vector<double> years;               ///< distinct, sorted (dummies)

    int coef_index(const std::string& name) const; ///< -1 if absent
};

/// One property's attribute vector for prediction.
struct Attributes {
    double vc = 0.0;
    double year = 0.0;
    std::string agglomeration;
    std::map<std::string, double> covariates;
};

/// CSV with a declared header. Reserved columns: id (optional), ln_price,
/// vc, agglomeration, year; all other columns are numeric covariates.
TransactionSet read_transactions_csv(const std::string& path);
void write_transactions_csv(const TransactionSet& set, const std::string& path);

/// Least squares via column-pivoted QR with HC1 robust standard errors.
/// Throws on rank deficiency (naming the dependent columns) and when n is
/// not larger than the design width.
HedonicModel fit(const TransactionSet& records, const ModelSpec& spec);

double predict(const HedonicModel& model, const Attributes& attrs);

/// The VC coefficient that applies in the given agglomeration.
double vc_coefficient(const HedonicModel& model, const std::string& agglomeration);

struct PriceDelta {
    double d_ln_price = 0.0;
    double relative = 0.0; ///< exp(d_ln_price) - 1
};

/// Log-price effect of a VC change, holding everything else fixed.
PriceDelta price_delta_vc(const HedonicModel& model, const std::string& agglomeration, double dvc);

HedonicModel load_model(const std::string& path);
void save_model(const HedonicModel& model, const std::string& path);

struct SynthOptions {
    size_t n = 5000;
    uint64_t seed = 42;
    double noise_sigma = 0.1;
    VcMode vc_mode = VcMode::Pooled;
};

struct SyntheticData {
    TransactionSet records;
    std::vector<std::pair<std::string, double>> true_beta; ///< design-coefficient truth
};

/// Deterministic synthetic transactions drawn from a known linear model,
/// for fitting demos and recovery tests.
SyntheticData make_synthetic_transactions(const SynthOptions& options);

} // namespace visar
