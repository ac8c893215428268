#include "visar/vcscore.hpp"
#include "visar/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace visar {

using nlohmann::json;

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    double e = std::exp(x);
    return e / (1.0 + e);
}

namespace {

void validate_scorer(const VcScorer& s) {
    const size_t m = s.metric_names.size();
    if (m == 0) throw ValidationError("scorer has no metric names");
    if (s.type == VcScorer::Type::Linear) {
        if (s.weights.size() != m) {
            std::ostringstream os;
            os << "scorer has " << s.weights.size() << " weights for " << m << " metric names";
            throw ValidationError(os.str());
        }
        return;
    }
    if (s.layer_sizes.size() < 2) throw ValidationError("mlp needs at least two layer sizes");
    if (static_cast<size_t>(s.layer_sizes.front()) != m)
        throw ValidationError("mlp input size does not match the metric names");
    if (s.layer_sizes.back() != 1) throw ValidationError("mlp output size must be 1");
    size_t n_layers = s.layer_sizes.size() - 1;
    if (s.layer_weights.size() != n_layers || s.layer_biases.size() != n_layers)
        throw ValidationError("mlp weight/bias count does not match the layer sizes");
    for (size_t k = 0; k < n_layers; ++k) {
        size_t in = static_cast<size_t>(s.layer_sizes[k]);
        size_t outn = static_cast<size_t>(s.layer_sizes[k + 1]);
        if (s.layer_weights[k].size() != in * outn)
            throw ValidationError("mlp weight matrix " + std::to_string(k) + " has wrong shape");
        if (s.layer_biases[k].size() != outn)
            throw ValidationError("mlp bias vector " + std::to_string(k) + " has wrong shape");
    }
}

} // namespace

VcScorer load_scorer(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ValidationError(path + ": " + e.what());
    }

    VcScorer s;
    std::string type = j.value("type", "linear");
    if (type == "linear") {
        s.type = VcScorer::Type::Linear;
        s.weights = j.at("weights").get<std::vector<double>>();
        s.bias = j.value("bias", 0.0);
        std::string sq = j.value("squash", "logistic");
        if (sq == "none") s.squash = Squash::None;
        else if (sq == "logistic") s.squash = Squash::Logistic;
        else throw ValidationError("unknown squash '" + sq + "'");
    } else if (type == "mlp") {
        s.type = VcScorer::Type::Mlp;
        s.layer_sizes = j.at("layer_sizes").get<std::vector<int>>();
        for (const auto& w : j.at("weights")) s.layer_weights.push_back(w.get<std::vector<double>>());
        for (const auto& b : j.at("biases")) s.layer_biases.push_back(b.get<std::vector<double>>());
        std::string act = j.value("activation", "relu");
        if (act == "relu") s.activation = Activation::Relu;
        else if (act == "tanh") s.activation = Activation::Tanh;
        else throw ValidationError("unknown activation '" + act + "'");
    } else {
        throw ValidationError("unknown scorer type '" + type + "'");
    }
    s.metric_names = j.at("metric_names").get<std::vector<std::string>>();
    validate_scorer(s);
    return s;
}

void save_scorer(const VcScorer& s, const std::string& path) {
    validate_scorer(s);
    json j;
    j["metric_names"] = s.metric_names;
    if (s.type == VcScorer::Type::Linear) {
        j["type"] = "linear";
        j["weights"] = s.weights;
        j["bias"] = s.bias;
        j["squash"] = s.squash == Squash::None ? "none" : "logistic";
    } else {
        j["type"] = "mlp";
        j["layer_sizes"] = s.layer_sizes;
        j["weights"] = s.layer_weights;
        j["biases"] = s.layer_biases;
        j["activation"] = s.activation == Activation::Relu ? "relu" : "tanh";
    }
    std::ofstream out(path);
    if (!out) throw ValidationError("cannot write " + path);
    out << j.dump(1) << "\n";
}

void check_alignment(const VcScorer& scorer, const MetricRegistry& registry) {
    auto reg_names = registry.names();
    if (scorer.metric_names == reg_names) return;

    std::set<std::string> have(scorer.metric_names.begin(), scorer.metric_names.end());
    std::set<std::string> want(reg_names.begin(), reg_names.end());
    std::ostringstream os;
    os << "scorer metric names do not match the registry;";
    bool any = false;
    for (const auto& n : want)
        if (!have.count(n)) { os << (any ? ", " : " missing: ") << n; any = true; }
    bool any_extra = false;
    for (const auto& n : have)
        if (!want.count(n)) { os << (any_extra ? ", " : "; extra: ") << n; any_extra = true; }
    if (!any && !any_extra) os << " same names in a different order";
    throw ValidationError(os.str());
}

VisualCapital score(const MetricVector& v, const VcScorer& scorer) {
    if (v.values.size() != scorer.metric_names.size())
        throw ValidationError("metric vector size does not match the scorer");

    double out;
    if (scorer.type == VcScorer::Type::Linear) {
        double acc = scorer.bias;
        for (size_t i = 0; i < v.values.size(); ++i) acc += scorer.weights[i] * v.values[i];
        out = scorer.squash == Squash::Logistic ? logistic(acc) : acc;
    } else {
        std::vector<double> x = v.values;
        const size_t n_layers = scorer.layer_sizes.size() - 1;
        for (size_t k = 0; k < n_layers; ++k) {
            const size_t in = static_cast<size_t>(scorer.layer_sizes[k]);
            const size_t outn = static_cast<size_t>(scorer.layer_sizes[k + 1]);
            std::vector<double> y(outn);
            for (size_t r = 0; r < outn; ++r) {
                double acc = scorer.layer_biases[k][r];
                for (size_t c = 0; c < in; ++c) acc += scorer.layer_weights[k][r * in + c] * x[c];
                y[r] = acc;
            }
            if (k + 1 < n_layers) {
                for (double& val : y)
                    val = scorer.activation == Activation::Relu ? std::max(0.0, val)
                                                                : std::tanh(val);
            }
            x = std::move(y);
        }
        out = logistic(x[0]);
    }
    if (!std::isfinite(out)) throw NumericError("visual capital is not finite");
    return {v.building_id, out};
}

} // namespace visar
