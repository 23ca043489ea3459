#pragma once

#include "callfuse/error.hpp"
#include "callfuse/ml/matrix.hpp"

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse::ml {

enum class Algorithm {
    LogReg,
    GaussianNb,
    Cart,
    LinReg,
    DnnStd,
    DnnEarly,
    LinearSvm,
    Knn,
    RandomForest,
};

inline constexpr Algorithm kAllAlgorithms[] = {
    Algorithm::LogReg, Algorithm::GaussianNb, Algorithm::Cart,      Algorithm::LinReg,       Algorithm::DnnStd,
    Algorithm::DnnEarly, Algorithm::LinearSvm, Algorithm::Knn,      Algorithm::RandomForest,
};

/// "logreg", "gaussian-nb", "cart", "linreg", "dnn-std", "dnn-early",
/// "linear-svm", "knn", "random-forest"
std::string_view to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view name);

struct ModelConfig {
    int config_id = 0;
    Algorithm algorithm = Algorithm::LogReg;
    std::map<std::string, double> params;

    /// Throws Error when the parameter is absent.
    double param(const std::string& name) const;
    /// e.g. "cart(max_depth=5)"
    std::string describe() const;
};

/// The fixed grid of 36 configurations, config_id 1..36:
///   1-3    logreg         (learning_rate, l2) in {(0.1, 0), (0.1, 0.01), (0.5, 0.001)}, 300 epochs
///   4      gaussian-nb    variance floor 1e-9
///   5-8    cart           max_depth in {5, 10, 20, unbounded (0)}
///   9      linreg         least squares, ridge 1e-8 for numerical safety
///   10-14  dnn-std        hidden layers 8 | 16 | 16x16 | 32x32 | 32x32x32, 100 epochs
///   15-19  dnn-early      same layers, up to 300 epochs, patience 10
///   20-23  linear-svm     lambda in {1e-4, 1e-3, 1e-2, 1e-1}
///   24-31  knn            k in {1, 3, 5, 7, 9, 11, 15, 21}
///   32-36  random-forest  (trees, max_depth) in {(10,5), (25,10), (50,0), (100,10), (100,0)}
std::vector<ModelConfig> enumerate_configs();

class Classifier {
public:
    virtual ~Classifier() = default;
    /// Label in {0, 1}.
    virtual int predict(std::span<const double> row) const = 0;
};

struct TrainedModel {
    Algorithm algorithm = Algorithm::LogReg;
    std::shared_ptr<const Classifier> classifier;
    /// Mean training loss after each epoch (neural networks only).
    std::vector<double> loss_trace;
    /// True when the training data had one class and a constant predictor was returned.
    bool constant = false;

    int predict(std::span<const double> row) const { return classifier->predict(row); }
    Labels predict(const Matrix& x) const;
};

/// Trains one configuration. `x` is expected to be standardized already.
/// Single-class training data yields a constant predictor (with a diagnostic).
/// Deterministic for a given seed.
TrainedModel train(const ModelConfig& config, const Matrix& x, const Labels& y, std::uint64_t seed,
                   Diagnostics* diagnostics = nullptr);

}  // namespace callfuse::ml
