#include <doctest.h>

#include "callfuse/eval.hpp"
#include "callfuse/random.hpp"

#include <algorithm>
#include <cmath>

using namespace callfuse;

namespace {

// Two-sided p as the share of sign assignments whose min(W+, W-) is at most
// the observed one, with ranks computed independently.
std::pair<double, double> enumerate_wilcoxon(const std::vector<double>& x, const std::vector<double>& y)
{
    std::vector<double> d;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[i])
            d.push_back(x[i] - y[i]);
    const std::size_t n = d.size();
    if (n == 0)
        return {0.0, 1.0};
    std::vector<double> rank(n);
    for (std::size_t i = 0; i < n; ++i) {
        double below = 0, equal = 0;
        for (std::size_t j = 0; j < n; ++j) {
            if (std::abs(d[j]) < std::abs(d[i]))
                ++below;
            else if (std::abs(d[j]) == std::abs(d[i]))
                ++equal;
        }
        rank[i] = below + (equal + 1) / 2.0;
    }
    double plus = 0, minus = 0;
    for (std::size_t i = 0; i < n; ++i)
        (d[i] > 0 ? plus : minus) += rank[i];
    const double t = std::min(plus, minus);
    std::size_t hits = 0;
    for (std::size_t mask = 0; mask < (std::size_t{1} << n); ++mask) {
        double p = 0, m = 0;
        for (std::size_t i = 0; i < n; ++i)
            ((mask >> i) & 1 ? p : m) += rank[i];
        if (std::min(p, m) <= t)
            ++hits;
    }
    return {t, static_cast<double>(hits) / static_cast<double>(std::size_t{1} << n)};
}

ModelResult result(int id, FeatureSetVariant v, double recall, double f)
{
    ModelResult r;
    r.config_id = id;
    r.algorithm = "knn";
    r.variant = v;
    r.scores.recall = recall;
    r.scores.f_measure = f;
    return r;
}

}  // namespace

TEST_CASE("F-measure against printed pairs")
{
    CHECK(f_measure(0.753, 0.569) == doctest::Approx(0.648).epsilon(0.0015));
    CHECK(std::abs(f_measure(0.646, 0.635) - 0.641) <= 0.001);
    CHECK(f_measure(0.0, 0.0) == 0.0);
}

TEST_CASE("perfect classifier and zero conventions")
{
    auto s = classification_metrics({5, 0, 5, 0});
    CHECK(s.accuracy == 1.0);
    CHECK(s.precision == 1.0);
    CHECK(s.recall == 1.0);
    CHECK(s.f_measure == 1.0);
    CHECK(s.mcc == 1.0);

    auto none = classification_metrics({0, 0, 7, 3});
    CHECK(none.precision == 0.0);
    CHECK(none.recall == 0.0);
    CHECK(none.f_measure == 0.0);
    CHECK(none.mcc == 0.0);
    CHECK(none.accuracy == 0.7);
    CHECK_THROWS_AS(classification_metrics({}), Error);
}

TEST_CASE("score invariants over random matrices")
{
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        ConfusionMatrix m{static_cast<std::int64_t>(rng.below(30)), static_cast<std::int64_t>(rng.below(30)),
                          static_cast<std::int64_t>(rng.below(30)), static_cast<std::int64_t>(rng.below(30)) + 1};
        auto s = classification_metrics(m);
        CHECK(s.accuracy == static_cast<double>(m.tp + m.tn) / static_cast<double>(m.total()));
        CHECK(s.f_measure >= std::min(s.precision, s.recall) - 1e-15);
        CHECK(s.f_measure <= std::max(s.precision, s.recall) + 1e-15);
        CHECK(s.f_measure <= 2 * std::min(s.precision, s.recall) + 1e-15);
        CHECK(s.mcc >= -1.0);
        CHECK(s.mcc <= 1.0);
    }
}

TEST_CASE("confusion counting")
{
    auto m = confusion({1, 1, 0, 0, 1}, {1, 0, 0, 1, 1});
    CHECK(m == ConfusionMatrix{2, 1, 1, 1});
}

TEST_CASE("ranking order, ties and truncation")
{
    std::vector<ModelResult> rs{result(1, FeatureSetVariant::S, 0.3, 0.5), result(2, FeatureSetVariant::S, 0.9, 0.5),
                                result(3, FeatureSetVariant::S, 0.6, 0.5)};
    auto ranked = rank_models(rs, ScoreName::Recall);
    REQUIRE(ranked.size() == 3);
    CHECK(ranked[0].result.config_id == 2);
    CHECK(ranked[1].result.config_id == 3);
    CHECK(ranked[2].result.config_id == 1);
    CHECK(ranked[2].rank == 3);
    CHECK(rank_models(rs, ScoreName::Recall, 10).size() == 3);
    CHECK(rank_models(rs, ScoreName::Recall, 2).size() == 2);

    std::vector<ModelResult> tied{result(4, FeatureSetVariant::H, 0.5, 0.4), result(3, FeatureSetVariant::S, 0.5, 0.4),
                                  result(9, FeatureSetVariant::S, 0.5, 0.6), result(3, FeatureSetVariant::SH, 0.5, 0.4)};
    ranked = rank_models(tied, ScoreName::Recall);
    CHECK(ranked[0].result.config_id == 9);
    CHECK(ranked[1].result.config_id == 3);
    CHECK(ranked[1].result.variant == FeatureSetVariant::S);
    CHECK(ranked[2].result.variant == FeatureSetVariant::SH);
    CHECK(ranked[3].result.config_id == 4);

    CHECK_THROWS_AS(rank_models({}, ScoreName::Recall), Error);
    CHECK_THROWS_AS(parse_score_name("auc"), Error);
}

TEST_CASE("108 results: top ten equal an independent sort")
{
    Rng rng(3);
    std::vector<ModelResult> rs;
    for (int id = 1; id <= 36; ++id)
        for (auto v : kAllVariants)
            rs.push_back(result(id, v, static_cast<double>(rng.below(20)) / 20.0, static_cast<double>(rng.below(20)) / 20.0));
    auto oracle = rs;
    std::sort(oracle.begin(), oracle.end(), [](const ModelResult& a, const ModelResult& b) {
        if (a.scores.recall != b.scores.recall)
            return a.scores.recall > b.scores.recall;
        if (a.scores.f_measure != b.scores.f_measure)
            return a.scores.f_measure > b.scores.f_measure;
        if (a.config_id != b.config_id)
            return a.config_id < b.config_id;
        return a.variant < b.variant;
    });
    auto top = rank_models(rs, ScoreName::Recall, 10);
    REQUIRE(top.size() == 10);
    for (std::size_t i = 0; i < 10; ++i)
        CHECK(top[i].result == oracle[i]);
    auto all = rank_models(rs, ScoreName::Recall);
    CHECK(all.size() == rs.size());
}

TEST_CASE("wilcoxon small worked cases")
{
    const std::vector<double> x{1, 2, 3}, zero{0, 0, 0};
    auto r = wilcoxon_signed_rank(x, zero);
    CHECK(r.T == 0.0);
    CHECK(r.p_value == 0.25);
    CHECK(r.n_effective == 3);
    CHECK(r.method == TestMethod::Exact);

    auto same = wilcoxon_signed_rank(zero, zero);
    CHECK(same.T == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK(same.n_effective == 0);
    CHECK(same.method == TestMethod::Exact);
    CHECK_THROWS_AS(wilcoxon_signed_rank(x, std::vector<double>{1.0}), Error);
}

TEST_CASE("wilcoxon textbook sample against enumeration")
{
    const std::vector<double> before{125, 115, 130, 140, 140, 115, 140, 125, 140, 135};
    const std::vector<double> after{110, 122, 125, 120, 140, 124, 123, 137, 135, 145};
    auto r = wilcoxon_signed_rank(before, after);
    auto [t, p] = enumerate_wilcoxon(before, after);
    CHECK(r.n_effective == 9);
    CHECK(r.T == t);
    CHECK(std::abs(r.p_value - p) < 1e-12);
}

TEST_CASE("wilcoxon random samples with ties and zeros")
{
    Rng rng(77);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(12);
        std::vector<double> x(n), y(n);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = static_cast<double>(rng.below(6));
            y[i] = static_cast<double>(rng.below(6));
        }
        auto r = wilcoxon_signed_rank(x, y);
        auto [t, p] = enumerate_wilcoxon(x, y);
        CHECK(r.T == t);
        CHECK(std::abs(r.p_value - p) < 1e-12);
        CHECK(r.p_value > 0.0);
        auto back = wilcoxon_signed_rank(y, x);
        CHECK(back.T == r.T);
        CHECK(back.p_value == r.p_value);
    }
}

TEST_CASE("wilcoxon normal approximation")
{
    std::vector<double> s, h;
    for (int i = 0; i < 36; ++i) {
        s.push_back(0.4 + 0.01 * i);
        h.push_back(0.4 + 0.01 * i + 0.01);
    }
    auto r = wilcoxon_signed_rank(s, h);
    CHECK(r.T == 0.0);
    CHECK(r.method == TestMethod::NormalApproximation);
    CHECK(r.p_value < 0.001);
    CHECK(r.p_value > 0.0);

    // n = 20 stays exact; all-positive gives 2 / 2^20
    std::vector<double> a(s.begin(), s.begin() + 20), b(h.begin(), h.begin() + 20);
    auto exact = wilcoxon_signed_rank(a, b);
    CHECK(exact.method == TestMethod::Exact);
    CHECK(exact.p_value == std::ldexp(1.0, -19));

    // closed form at n = 36: z = (0 - 333 + 0.5) / sqrt(36*37*73/24)
    const double z = (0.0 - 333.0 + 0.5) / std::sqrt(36.0 * 37.0 * 73.0 / 24.0);
    std::vector<double> ranks_x, ranks_y;
    for (int i = 1; i <= 36; ++i) {
        ranks_x.push_back(0.0);
        ranks_y.push_back(static_cast<double>(i));
    }
    auto formula = wilcoxon_signed_rank(ranks_x, ranks_y);
    CHECK(formula.p_value == doctest::Approx(std::erfc(-z / std::sqrt(2.0))).epsilon(1e-12));
}

TEST_CASE("pratt keeps zeros in the ranking")
{
    const std::vector<double> x{0, 1, 2, -3}, y{0, 0, 0, 0};
    auto wilcox = wilcoxon_signed_rank(x, y);
    auto pratt = wilcoxon_signed_rank(x, y, {ZeroMethod::Pratt});
    CHECK(wilcox.T == 3.0);
    CHECK(pratt.T == 4.0);
    CHECK(pratt.n_effective == 3);
}

TEST_CASE("feature-set comparison layout")
{
    std::vector<ModelResult> rs;
    for (int id = 1; id <= 6; ++id) {
        rs.push_back(result(id, FeatureSetVariant::S, 0, 0.5));
        rs.push_back(result(id, FeatureSetVariant::H, 0, 0.5 + 0.01 * id));
        rs.push_back(result(id, FeatureSetVariant::SH, 0, 0.5));
    }
    auto tests = compare_feature_sets(rs, ScoreName::FMeasure);
    REQUIRE(tests.size() == 3);
    CHECK(tests[0].label() == "S vs H");
    CHECK(tests[1].label() == "S vs S+H");
    CHECK(tests[2].label() == "H vs S+H");
    CHECK(tests[1].result.p_value == 1.0);
    CHECK(tests[0].result.T == 0.0);

    rs.pop_back();
    CHECK_THROWS_AS(compare_feature_sets(rs, ScoreName::FMeasure), Error);
}

TEST_CASE("aggregation sums folds")
{
    std::vector<FoldRecord> folds{{1, "knn", FeatureSetVariant::S, 0, {1, 0, 1, 0}},
                                  {1, "knn", FeatureSetVariant::S, 1, {0, 1, 1, 1}},
                                  {2, "cart", FeatureSetVariant::S, 0, {2, 0, 0, 0}}};
    auto rs = aggregate_folds(folds);
    REQUIRE(rs.size() == 2);
    CHECK(rs[0].matrix == ConfusionMatrix{1, 1, 2, 1});
    CHECK(rs[0].scores.accuracy == 0.6);
}

TEST_CASE("report shape and stability")
{
    std::vector<ModelResult> rs;
    const char* names[] = {"logreg", "gaussian-nb", "cart", "linreg", "dnn-std", "dnn-early", "linear-svm", "knn", "random-forest"};
    Rng rng(8);
    for (int a = 0; a < 9; ++a) {
        for (auto v : kAllVariants) {
            ModelResult r;
            r.config_id = a * 4 + 1;
            r.algorithm = names[a];
            r.variant = v;
            r.matrix = {static_cast<std::int64_t>(rng.below(20)) + 1, static_cast<std::int64_t>(rng.below(20)),
                        static_cast<std::int64_t>(rng.below(20)), static_cast<std::int64_t>(rng.below(20))};
            r.scores = classification_metrics(r.matrix);
            rs.push_back(r);
        }
    }
    auto tests = compare_feature_sets(rs, ScoreName::FMeasure);
    auto files = emit_report(rs, tests);
    CHECK(files.contains("ranking_recall.csv"));
    CHECK(files.contains("ranking_f_measure.csv"));
    CHECK(files.contains("significance.csv"));
    CHECK(files.contains("report.md"));
    const auto& best = files.at("best_by_algorithm.csv");
    CHECK(std::count(best.begin(), best.end(), '\n') == 10);
    CHECK(best.find("\nlogreg,") != std::string::npos);
    CHECK(files.at("significance.csv").starts_with("pair,T,p_value,n_effective,method\n"));
    CHECK(emit_report(rs, tests) == files);

    auto no_tests = emit_report(rs, {});
    CHECK_FALSE(no_tests.contains("significance.csv"));
    CHECK(no_tests.contains("ranking_recall.csv"));
}
