#pragma once

#include "visar/viewmetrics.hpp"

#include <string>
#include <vector>

namespace visar {

enum class Squash { None, Logistic };
enum class Activation { Relu, Tanh };

/// File-defined map from a metric vector to the scalar visual-capital index.
/// Either a linear form (weights . v + bias, optionally squashed) or a small
/// feed-forward network with a logistic output.
struct VcScorer {
    enum class Type { Linear, Mlp } type = Type::Linear;
    std::vector<std::string> metric_names; ///< must match the registry order

    // Linear
    std::vector<double> weights;
    double bias = 0.0;
    Squash squash = Squash::Logistic;

    // Mlp: layer k maps layer_sizes[k] -> layer_sizes[k+1] inputs/outputs;
    // weight matrices stored row-major (out x in).
    std::vector<int> layer_sizes;
    std::vector<std::vector<double>> layer_weights;
    std::vector<std::vector<double>> layer_biases;
    Activation activation = Activation::Relu;
};

struct VisualCapital {
    std::string building_id;
    double vc = 0.0;
};

VcScorer load_scorer(const std::string& path);
void save_scorer(const VcScorer& scorer, const std::string& path);

/// Throws listing missing and extra names unless the scorer's metric names
/// are exactly the registry's, in order.
void check_alignment(const VcScorer& scorer, const MetricRegistry& registry);

VisualCapital score(const MetricVector& v, const VcScorer& scorer);

/// Numerically stable logistic function.
double logistic(double x);

} // namespace visar
