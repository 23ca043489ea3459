#include "callfuse/ml/cross_validation.hpp"

#include "callfuse/ml/preprocess.hpp"
#include "callfuse/random.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <thread>

namespace callfuse::ml {

namespace {

constexpr std::uint64_t kFoldSalt = 0x464f4c44;
constexpr std::uint64_t kOversampleSalt = 0x4f564552;
constexpr std::uint64_t kTrainSalt = 0x5452414e;

}  // namespace

std::vector<std::size_t> stratified_folds(const Labels& y, std::size_t k, std::uint64_t seed)
{
    if (k < 2)
        throw Error("k must be at least 2");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < y.size(); ++i)
        by_class[y[i] == 1 ? 1 : 0].push_back(i);
    std::vector<std::size_t> fold(y.size(), 0);
    for (int c = 0; c < 2; ++c) {
        auto& rows = by_class[c];
        if (rows.size() < k)
            throw Error("class " + std::to_string(c) + " has " + std::to_string(rows.size()) + " rows, fewer than k=" +
                        std::to_string(k));
        Rng rng(mix_seed(mix_seed(seed, kFoldSalt), static_cast<std::uint64_t>(c)));
        rng.shuffle(std::span<std::size_t>(rows));
        for (std::size_t i = 0; i < rows.size(); ++i)
            fold[rows[i]] = i % k;
    }
    return fold;
}

ConfusionMatrix fit_and_score(const ModelConfig& config, const Matrix& train_x, const Labels& train_y,
                              const Matrix& test_x, const Labels& test_y, double oversample_factor,
                              std::uint64_t seed, Diagnostics* diagnostics)
{
    const auto ones = std::count(train_y.begin(), train_y.end(), 1);
    const bool both = ones > 0 && static_cast<std::size_t>(ones) < train_y.size();
    Matrix x = train_x;
    Labels y = train_y;
    if (both && oversample_factor > 1.0)
        std::tie(x, y) = oversample_minority(train_x, train_y, oversample_factor, mix_seed(seed, kOversampleSalt));
    auto [standardizer, z] = standardize_fit_transform(x, diagnostics);
    auto model = train(config, z, y, mix_seed(seed, kTrainSalt), diagnostics);
    return confusion(test_y, model.predict(standardizer.apply(test_x)));
}

namespace {

std::uint64_t run_seed(std::uint64_t seed, int config_id, std::size_t fold)
{
    return mix_seed(mix_seed(seed, static_cast<std::uint64_t>(config_id)), fold);
}

ConfusionMatrix run_fold(const ModelConfig& config, const FeatureMatrix& data, const std::vector<std::size_t>& folds,
                         std::size_t fold, const CvOptions& options, Diagnostics* diagnostics)
{
    std::vector<std::size_t> train_rows, test_rows;
    for (std::size_t i = 0; i < folds.size(); ++i)
        (folds[i] == fold ? test_rows : train_rows).push_back(i);
    Labels train_y, test_y;
    for (auto i : train_rows)
        train_y.push_back(data.y[i]);
    for (auto i : test_rows)
        test_y.push_back(data.y[i]);
    return fit_and_score(config, data.x.select_rows(train_rows), train_y, data.x.select_rows(test_rows), test_y,
                         options.oversample_factor, run_seed(options.seed, config.config_id, fold), diagnostics);
}

}  // namespace

std::vector<ConfusionMatrix> cross_validate(const ModelConfig& config, const FeatureMatrix& data,
                                            const CvOptions& options, Diagnostics* diagnostics)
{
    const auto folds = stratified_folds(data.y, options.k, options.seed);
    std::vector<ConfusionMatrix> out;
    for (std::size_t f = 0; f < options.k; ++f)
        out.push_back(run_fold(config, data, folds, f, options, diagnostics));
    return out;
}

std::vector<FoldRecord> run_experiment(std::span<const ModelConfig> configs,
                                       std::span<const std::pair<FeatureSetVariant, FeatureMatrix>> datasets,
                                       const CvOptions& options, Diagnostics* diagnostics)
{
    std::vector<std::vector<std::size_t>> folds;
    for (const auto& [variant, data] : datasets)
        folds.push_back(stratified_folds(data.y, options.k, options.seed));

    struct Task {
        std::size_t dataset;
        std::size_t config;
        std::size_t fold;
    };
    std::vector<Task> tasks;
    for (std::size_t d = 0; d < datasets.size(); ++d)
        for (std::size_t c = 0; c < configs.size(); ++c)
            for (std::size_t f = 0; f < options.k; ++f)
                tasks.push_back({d, c, f});

    std::vector<FoldRecord> records(tasks.size());
    std::vector<Diagnostics> notes(tasks.size());
    std::vector<std::exception_ptr> failures(tasks.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            const auto& t = tasks[i];
            const auto& config = configs[t.config];
            try {
                auto m = run_fold(config, datasets[t.dataset].second, folds[t.dataset], t.fold, options, &notes[i]);
                records[i] = {config.config_id, std::string(to_string(config.algorithm)), datasets[t.dataset].first, t.fold, m};
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };

    std::size_t workers = options.workers ? options.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, std::max<std::size_t>(1, tasks.size()));
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t w = 0; w < workers; ++w)
            pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < tasks.size(); ++i) {
        if (failures[i])
            std::rethrow_exception(failures[i]);
        if (diagnostics) {
            for (auto& m : notes[i].messages)
                diagnostics->add(std::move(m));
        }
    }
    return records;
}

std::string serialize_results(std::span<const FoldRecord> records)
{
    nlohmann::ordered_json folds = nlohmann::ordered_json::array();
    for (const auto& r : records) {
        folds.push_back({{"config_id", r.config_id},
                         {"algorithm", r.algorithm},
                         {"variant", std::string(to_string(r.variant))},
                         {"fold", r.fold},
                         {"tp", r.matrix.tp},
                         {"fp", r.matrix.fp},
                         {"tn", r.matrix.tn},
                         {"fn", r.matrix.fn}});
    }
    nlohmann::ordered_json doc;
    doc["folds"] = std::move(folds);
    return doc.dump(2) + "\n";
}

std::vector<FoldRecord> parse_results(std::string_view document)
{
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(document);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("results document: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("folds") || !doc["folds"].is_array())
        throw ParseError("results document needs a \"folds\" array");
    std::vector<FoldRecord> out;
    try {
        for (const auto& f : doc["folds"]) {
            FoldRecord r;
            r.config_id = f.at("config_id").get<int>();
            r.algorithm = f.at("algorithm").get<std::string>();
            r.variant = parse_variant(f.at("variant").get<std::string>());
            r.fold = f.at("fold").get<std::size_t>();
            r.matrix = {f.at("tp").get<std::int64_t>(), f.at("fp").get<std::int64_t>(), f.at("tn").get<std::int64_t>(),
                        f.at("fn").get<std::int64_t>()};
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("results document: ") + e.what());
    }
    return out;
}

}  // namespace callfuse::ml
