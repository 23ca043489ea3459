#include "callfuse/eval.hpp"

#include "callfuse/text.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>

namespace callfuse {

ConfusionMatrix& ConfusionMatrix::operator+=(const ConfusionMatrix& other)
{
    tp += other.tp;
    fp += other.fp;
    tn += other.tn;
    fn += other.fn;
    return *this;
}

ConfusionMatrix confusion(const ml::Labels& truth, const ml::Labels& predicted)
{
    if (truth.size() != predicted.size())
        throw Error("label vectors differ in length");
    ConfusionMatrix m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] == 1)
            ++(predicted[i] == 1 ? m.tp : m.fn);
        else
            ++(predicted[i] == 1 ? m.fp : m.tn);
    }
    return m;
}

double f_measure(double precision, double recall)
{
    return precision + recall == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
}

Scores classification_metrics(const ConfusionMatrix& m)
{
    if (m.total() == 0)
        throw Error("empty confusion matrix");
    const auto tp = static_cast<double>(m.tp), fp = static_cast<double>(m.fp);
    const auto tn = static_cast<double>(m.tn), fn = static_cast<double>(m.fn);
    Scores s;
    s.accuracy = (tp + tn) / (tp + fp + tn + fn);
    s.precision = tp + fp == 0 ? 0.0 : tp / (tp + fp);
    s.recall = tp + fn == 0 ? 0.0 : tp / (tp + fn);
    s.f_measure = f_measure(s.precision, s.recall);
    const double denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
    s.mcc = denom == 0.0 ? 0.0 : (tp * tn - fp * fn) / std::sqrt(denom);
    return s;
}

ScoreName parse_score_name(std::string_view name)
{
    if (name == "accuracy")
        return ScoreName::Accuracy;
    if (name == "precision")
        return ScoreName::Precision;
    if (name == "recall")
        return ScoreName::Recall;
    if (name == "f_measure" || name == "f-measure")
        return ScoreName::FMeasure;
    if (name == "mcc")
        return ScoreName::Mcc;
    throw Error("unknown score '" + std::string(name) + "'");
}

std::string_view to_string(ScoreName name)
{
    switch (name) {
    case ScoreName::Accuracy:
        return "accuracy";
    case ScoreName::Precision:
        return "precision";
    case ScoreName::Recall:
        return "recall";
    case ScoreName::FMeasure:
        return "f_measure";
    case ScoreName::Mcc:
        return "mcc";
    }
    return "?";
}

double score_of(const Scores& scores, ScoreName name)
{
    switch (name) {
    case ScoreName::Accuracy:
        return scores.accuracy;
    case ScoreName::Precision:
        return scores.precision;
    case ScoreName::Recall:
        return scores.recall;
    case ScoreName::FMeasure:
        return scores.f_measure;
    case ScoreName::Mcc:
        return scores.mcc;
    }
    return 0.0;
}

std::vector<ModelResult> aggregate_folds(std::span<const FoldRecord> folds)
{
    std::map<std::pair<FeatureSetVariant, int>, ModelResult> sums;
    for (const auto& f : folds) {
        auto& r = sums[{f.variant, f.config_id}];
        r.config_id = f.config_id;
        r.algorithm = f.algorithm;
        r.variant = f.variant;
        r.matrix += f.matrix;
    }
    std::vector<ModelResult> out;
    for (auto& [key, r] : sums) {
        r.scores = classification_metrics(r.matrix);
        out.push_back(std::move(r));
    }
    return out;
}

std::vector<RankedResult> rank_models(std::span<const ModelResult> results, ScoreName by, std::size_t top_k)
{
    if (results.empty())
        throw Error("nothing to rank");
    std::vector<const ModelResult*> order;
    for (const auto& r : results)
        order.push_back(&r);
    std::stable_sort(order.begin(), order.end(), [by](const ModelResult* a, const ModelResult* b) {
        const double sa = score_of(a->scores, by), sb = score_of(b->scores, by);
        if (sa != sb)
            return sa > sb;
        if (a->scores.f_measure != b->scores.f_measure)
            return a->scores.f_measure > b->scores.f_measure;
        return std::tie(a->config_id, a->variant) < std::tie(b->config_id, b->variant);
    });
    if (top_k > 0 && top_k < order.size())
        order.resize(top_k);
    std::vector<RankedResult> out;
    for (std::size_t i = 0; i < order.size(); ++i)
        out.push_back({i + 1, *order[i]});
    return out;
}

std::string_view to_string(TestMethod method)
{
    return method == TestMethod::Exact ? "exact" : "normal-approximation";
}

StatTestResult wilcoxon_signed_rank(std::span<const double> x, std::span<const double> y, const WilcoxonOptions& options)
{
    if (x.size() != y.size() || x.empty())
        throw Error("wilcoxon needs two non-empty samples of equal length");

    struct Diff {
        double abs;
        bool positive;
        bool zero;
    };
    std::vector<Diff> diffs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double d = x[i] - y[i];
        if (d == 0.0 && options.zero_method == ZeroMethod::Wilcox)
            continue;
        diffs.push_back({std::abs(d), d > 0.0, d == 0.0});
    }
    std::sort(diffs.begin(), diffs.end(), [](const Diff& a, const Diff& b) { return a.abs < b.abs; });

    // Doubled mid-ranks stay integral: a tie group at positions [i, i+t) has rank i + (t+1)/2.
    std::vector<std::int64_t> ranks2;
    std::int64_t plus2 = 0, minus2 = 0;
    for (std::size_t i = 0; i < diffs.size();) {
        std::size_t j = i;
        while (j < diffs.size() && diffs[j].abs == diffs[i].abs)
            ++j;
        const auto r2 = static_cast<std::int64_t>(i + j + 1);
        for (std::size_t k = i; k < j; ++k) {
            if (diffs[k].zero)
                continue;
            ranks2.push_back(r2);
            (diffs[k].positive ? plus2 : minus2) += r2;
        }
        i = j;
    }

    StatTestResult result;
    result.n_effective = ranks2.size();
    if (ranks2.empty())
        return result;
    const std::int64_t t2 = std::min(plus2, minus2);
    result.T = static_cast<double>(t2) / 2.0;

    if (ranks2.size() <= options.exact_limit) {
        const std::int64_t total2 = plus2 + minus2;
        std::vector<double> ways(static_cast<std::size_t>(total2) + 1, 0.0);
        ways[0] = 1.0;
        std::int64_t reach = 0;
        for (auto r : ranks2) {
            for (std::int64_t s = reach; s >= 0; --s)
                ways[static_cast<std::size_t>(s + r)] += ways[static_cast<std::size_t>(s)];
            reach += r;
        }
        double at_most = 0.0;
        for (std::int64_t s = 0; s <= t2; ++s)
            at_most += ways[static_cast<std::size_t>(s)];
        const double p = 2.0 * at_most / std::ldexp(1.0, static_cast<int>(ranks2.size()));
        result.p_value = std::min(1.0, p);
        result.method = TestMethod::Exact;
        return result;
    }

    double sum = 0.0, squares = 0.0;
    for (auto r2 : ranks2) {
        const double r = static_cast<double>(r2) / 2.0;
        sum += r;
        squares += r * r;
    }
    const double mean = sum / 2.0;
    const double sd = std::sqrt(squares / 4.0);
    const double z = std::min(0.0, (result.T - mean + 0.5) / sd);
    result.p_value = std::min(1.0, std::erfc(-z / std::numbers::sqrt2));
    result.method = TestMethod::NormalApproximation;
    return result;
}

std::string PairTest::label() const
{
    return std::string(to_string(first)) + " vs " + std::string(to_string(second));
}

std::vector<PairTest> compare_feature_sets(std::span<const ModelResult> results, ScoreName score,
                                           const WilcoxonOptions& options)
{
    std::map<FeatureSetVariant, std::map<int, double>> by_variant;
    for (const auto& r : results) {
        if (!by_variant[r.variant].emplace(r.config_id, score_of(r.scores, score)).second)
            throw Error("config " + std::to_string(r.config_id) + " appears twice for " + std::string(to_string(r.variant)));
    }
    std::vector<PairTest> tests;
    for (auto a = by_variant.begin(); a != by_variant.end(); ++a) {
        for (auto b = std::next(a); b != by_variant.end(); ++b) {
            std::vector<double> xs, ys;
            for (const auto& [id, v] : a->second) {
                auto it = b->second.find(id);
                if (it == b->second.end())
                    throw Error("config " + std::to_string(id) + " missing for " + std::string(to_string(b->first)));
                xs.push_back(v);
                ys.push_back(it->second);
            }
            if (xs.size() != b->second.size())
                throw Error("config coverage differs between " + std::string(to_string(a->first)) + " and " +
                            std::string(to_string(b->first)));
            tests.push_back({a->first, b->first, wilcoxon_signed_rank(xs, ys, options)});
        }
    }
    return tests;
}

std::vector<ModelResult> best_per_algorithm(std::span<const ModelResult> results)
{
    std::map<std::string, const ModelResult*> best;
    std::map<std::string, int> first_id;
    for (const auto& r : results) {
        auto [it, fresh] = first_id.emplace(r.algorithm, r.config_id);
        if (!fresh)
            it->second = std::min(it->second, r.config_id);
        auto& slot = best[r.algorithm];
        if (!slot || r.scores.f_measure > slot->scores.f_measure ||
            (r.scores.f_measure == slot->scores.f_measure &&
             std::tie(r.config_id, r.variant) < std::tie(slot->config_id, slot->variant)))
            slot = &r;
    }
    std::vector<ModelResult> out;
    for (const auto& [name, r] : best)
        out.push_back(*r);
    std::sort(out.begin(), out.end(),
              [&](const ModelResult& a, const ModelResult& b) { return first_id[a.algorithm] < first_id[b.algorithm]; });
    return out;
}

namespace {

std::vector<std::string> score_fields(const Scores& s)
{
    return {format_fixed(s.accuracy, 6), format_fixed(s.precision, 6), format_fixed(s.recall, 6),
            format_fixed(s.f_measure, 6), format_fixed(s.mcc, 6)};
}

std::string markdown_row(const std::vector<std::string>& cells)
{
    std::string out = "|";
    for (const auto& c : cells)
        out += " " + c + " |";
    return out + "\n";
}

std::string markdown_rule(std::size_t n)
{
    std::string out = "|";
    for (std::size_t i = 0; i < n; ++i)
        out += "---|";
    return out + "\n";
}

}  // namespace

std::string ranking_csv(std::span<const RankedResult> rows)
{
    std::string out = csv_line({"rank", "config_id", "algorithm", "variant", "accuracy", "precision", "recall", "f_measure", "mcc"});
    for (const auto& row : rows) {
        std::vector<std::string> fields{std::to_string(row.rank), std::to_string(row.result.config_id), row.result.algorithm,
                                        std::string(to_string(row.result.variant))};
        for (auto& f : score_fields(row.result.scores))
            fields.push_back(std::move(f));
        out += csv_line(fields);
    }
    return out;
}

std::string significance_csv(std::span<const PairTest> tests)
{
    std::string out = csv_line({"pair", "T", "p_value", "n_effective", "method"});
    for (const auto& t : tests) {
        out += csv_line({t.label(), format_double(t.result.T), format_double(t.result.p_value),
                         std::to_string(t.result.n_effective), std::string(to_string(t.result.method))});
    }
    return out;
}

std::string best_per_algorithm_csv(std::span<const ModelResult> rows)
{
    std::string out = csv_line({"algorithm", "config_id", "variant", "accuracy", "precision", "recall", "f_measure", "mcc"});
    for (const auto& r : rows) {
        std::vector<std::string> fields{r.algorithm, std::to_string(r.config_id), std::string(to_string(r.variant))};
        for (auto& f : score_fields(r.scores))
            fields.push_back(std::move(f));
        out += csv_line(fields);
    }
    return out;
}

namespace {

std::string_view score_title(ScoreName name)
{
    switch (name) {
    case ScoreName::FMeasure:
        return "F-measure";
    case ScoreName::Mcc:
        return "MCC";
    default:
        return to_string(name);
    }
}

}  // namespace

std::map<std::string, std::string> emit_report(std::span<const ModelResult> results, std::span<const PairTest> tests,
                                               const ReportOptions& options)
{
    std::map<std::string, std::string> files;
    std::string md = "# Model evaluation\n";
    const std::vector<std::string> header{"rank", "config", "algorithm", "variant", "accuracy", "precision", "recall", "F-measure", "MCC"};

    for (auto score : options.rankings) {
        const auto ranked = rank_models(results, score);
        files["ranking_" + std::string(to_string(score)) + ".csv"] = ranking_csv(ranked);
        md += "\n## Top " + std::to_string(std::min(options.top_k, ranked.size())) + " by " + std::string(score_title(score)) + "\n\n";
        md += markdown_row(header) + markdown_rule(header.size());
        for (std::size_t i = 0; i < ranked.size() && i < options.top_k; ++i) {
            const auto& r = ranked[i].result;
            std::vector<std::string> cells{std::to_string(ranked[i].rank), std::to_string(r.config_id), r.algorithm,
                                           std::string(to_string(r.variant))};
            for (auto& f : score_fields(r.scores))
                cells.push_back(std::move(f));
            md += markdown_row(cells);
        }
    }

    const auto best = best_per_algorithm(results);
    files["best_by_algorithm.csv"] = best_per_algorithm_csv(best);
    md += "\n## Best configuration per algorithm\n\n";
    const std::vector<std::string> best_header{"algorithm", "config", "variant", "accuracy", "precision", "recall", "F-measure", "MCC"};
    md += markdown_row(best_header) + markdown_rule(best_header.size());
    for (const auto& r : best) {
        std::vector<std::string> cells{r.algorithm, std::to_string(r.config_id), std::string(to_string(r.variant))};
        for (auto& f : score_fields(r.scores))
            cells.push_back(std::move(f));
        md += markdown_row(cells);
    }

    if (!tests.empty()) {
        files["significance.csv"] = significance_csv(tests);
        md += "\n## Wilcoxon signed-rank tests\n\n";
        const std::vector<std::string> test_header{"pair", "T", "p-value", "n", "method"};
        md += markdown_row(test_header) + markdown_rule(test_header.size());
        for (const auto& t : tests) {
            md += markdown_row({t.label(), format_double(t.result.T), format_double(t.result.p_value),
                                std::to_string(t.result.n_effective), std::string(to_string(t.result.method))});
        }
    }
    files["report.md"] = md;
    return files;
}

}  // namespace callfuse
