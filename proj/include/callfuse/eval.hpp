#pragma once

#include "callfuse/dataset.hpp"
#include "callfuse/ml/matrix.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace callfuse {

struct ConfusionMatrix {
    std::int64_t tp = 0;
    std::int64_t fp = 0;
    std::int64_t tn = 0;
    std::int64_t fn = 0;

    std::int64_t total() const { return tp + fp + tn + fn; }
    ConfusionMatrix& operator+=(const ConfusionMatrix& other);
    bool operator==(const ConfusionMatrix&) const = default;
};

/// Counts with label 1 as the positive class. Sizes must match.
ConfusionMatrix confusion(const ml::Labels& truth, const ml::Labels& predicted);

struct Scores {
    double accuracy = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;
    double mcc = 0.0;

    bool operator==(const Scores&) const = default;
};

/// Harmonic mean of precision and recall; 0 when both are 0.
double f_measure(double precision, double recall);

/// Precision, recall and F are 0 when their denominators are 0; MCC is 0
/// when any marginal is 0. Throws Error for an all-zero matrix.
Scores classification_metrics(const ConfusionMatrix& m);

enum class ScoreName { Accuracy, Precision, Recall, FMeasure, Mcc };

/// "accuracy", "precision", "recall", "f_measure" (or "f-measure"), "mcc".
ScoreName parse_score_name(std::string_view name);
std::string_view to_string(ScoreName name);
double score_of(const Scores& scores, ScoreName name);

/// Confusion matrix of one (config, variant, fold) run.
struct FoldRecord {
    int config_id = 0;
    std::string algorithm;
    FeatureSetVariant variant = FeatureSetVariant::S;
    std::size_t fold = 0;
    ConfusionMatrix matrix;

    bool operator==(const FoldRecord&) const = default;
};

struct ModelResult {
    int config_id = 0;
    std::string algorithm;
    FeatureSetVariant variant = FeatureSetVariant::S;
    ConfusionMatrix matrix;
    Scores scores;

    bool operator==(const ModelResult&) const = default;
};

/// Sums the folds of each (config, variant) and scores the sum. Output is
/// ordered by variant, then config id.
std::vector<ModelResult> aggregate_folds(std::span<const FoldRecord> folds);

struct RankedResult {
    std::size_t rank = 0;  ///< 1-based
    ModelResult result;
};

/// Descending by `by`; ties by F-measure descending, then config id, then
/// variant (S, H, S+H). `top_k` = 0 keeps every row. Throws Error when empty.
std::vector<RankedResult> rank_models(std::span<const ModelResult> results, ScoreName by, std::size_t top_k = 0);

enum class ZeroMethod {
    Wilcox,  ///< drop zero differences before ranking
    Pratt,   ///< rank zeros with the rest, then drop them
};

enum class TestMethod { Exact, NormalApproximation };

/// "exact" / "normal-approximation"
std::string_view to_string(TestMethod method);

struct StatTestResult {
    double T = 0.0;
    double p_value = 1.0;
    std::size_t n_effective = 0;
    TestMethod method = TestMethod::Exact;

    bool operator==(const StatTestResult&) const = default;
};

struct WilcoxonOptions {
    ZeroMethod zero_method = ZeroMethod::Wilcox;
    /// Largest n_effective that uses the exact null distribution.
    std::size_t exact_limit = 20;
};

/// Two-sided signed-rank test of d = x - y with mid-ranks for tied |d|.
/// T = min(W+, W-). Up to `exact_limit` nonzero differences, p is exact
/// over all sign assignments of the observed ranks; beyond it, the normal
/// approximation with tie-corrected variance and a 0.5 continuity
/// correction. All-zero differences give T=0, p=1, n_effective=0, exact.
StatTestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y,
                                    const WilcoxonOptions& options = {});

struct PairTest {
    FeatureSetVariant first = FeatureSetVariant::S;
    FeatureSetVariant second = FeatureSetVariant::H;
    StatTestResult result;

    /// "S vs H"
    std::string label() const;
};

/// Tests every pair of present variants (S vs H, S vs S+H, H vs S+H) on the
/// chosen score, paired by config id. Throws Error when the variants do not
/// cover the same config ids.
std::vector<PairTest> compare_feature_sets(std::span<const ModelResult> results, ScoreName score,
                                           const WilcoxonOptions& options = {});

/// Best result of every algorithm by F-measure (ties: config id, then
/// variant), ordered by each algorithm's smallest config id.
std::vector<ModelResult> best_per_algorithm(std::span<const ModelResult> results);

/// `rank,config_id,algorithm,variant,accuracy,precision,recall,f_measure,mcc`
std::string ranking_csv(std::span<const RankedResult> rows);
/// `pair,T,p_value,n_effective,method`
std::string significance_csv(std::span<const PairTest> tests);
/// `algorithm,config_id,variant,accuracy,precision,recall,f_measure,mcc`
std::string best_per_algorithm_csv(std::span<const ModelResult> rows);

struct ReportOptions {
    std::size_t top_k = 10;
    std::vector<ScoreName> rankings{ScoreName::Recall, ScoreName::FMeasure};
};

/// File name -> contents: one `ranking_<score>.csv` per ranking (all rows),
/// `best_by_algorithm.csv`, `significance.csv` when tests are given, and a
/// Markdown mirror `report.md` with the top-k rows of each ranking.
std::map<std::string, std::string> emit_report(std::span<const ModelResult> results, std::span<const PairTest> tests,
                                               const ReportOptions& options = {});

}  // namespace callfuse
