#pragma once

#include "callfuse/dataset.hpp"
#include "callfuse/error.hpp"
#include "callfuse/eval.hpp"
#include "callfuse/ml/models.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace callfuse::ml {

struct CvOptions {
    std::size_t k = 10;
    double oversample_factor = 1.5;
    std::uint64_t seed = 0;
    /// Worker threads for run_experiment; 0 picks the hardware concurrency.
    std::size_t workers = 0;
};

/// Fold index (0..k-1) of every row. Each class is shuffled with the seed and
/// dealt round-robin, so fold sizes per class differ by at most one. Throws
/// Error when k < 2 or a class has fewer than k rows.
std::vector<std::size_t> stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed);

/// Oversamples the training rows, fits the standardizer on them, trains and
/// scores the test rows. Oversampling is skipped for single-class training data.
ConfusionMatrix fit_and_score(const ModelConfig& config, const Matrix& train_x, const Labels& train_y,
                              const Matrix& test_x, const Labels& test_y, double oversample_factor,
                              std::uint64_t seed, Diagnostics* diagnostics = nullptr);

/// One confusion matrix per fold. Seeds depend on the config and fold but not
/// on the feature set, so variants see identical splits.
std::vector<ConfusionMatrix> cross_validate(const ModelConfig& config, const FeatureMatrix& data,
                                            const CvOptions& options, Diagnostics* diagnostics = nullptr);

/// Every (variant, config, fold) triple, run on a worker pool. Results are in
/// (variant order given, config order given, fold) order regardless of the
/// number of workers; diagnostics are merged in the same order.
std::vector<FoldRecord> run_experiment(std::span<const ModelConfig> configs,
                                       std::span<const std::pair<FeatureSetVariant, FeatureMatrix>> datasets,
                                       const CvOptions& options, Diagnostics* diagnostics = nullptr);

/// `{"folds": [{"config_id", "algorithm", "variant", "fold", "tp", "fp", "tn", "fn"}]}`
std::string serialize_results(std::span<const FoldRecord> records);
std::vector<FoldRecord> parse_results(std::string_view document);

}  // namespace callfuse::ml
