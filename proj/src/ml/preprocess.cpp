#include "callfuse/ml/preprocess.hpp"

#include "callfuse/random.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace callfuse::ml {

Matrix Standardizer::apply(const Matrix& x) const
{
    Matrix out(x.rows(), kept.size());
    for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t j = 0; j < kept.size(); ++j)
            out(r, j) = (x(r, kept[j]) - means[j]) / stddevs[j];
    }
    return out;
}

std::vector<double> Standardizer::apply_row(std::span<const double> row) const
{
    std::vector<double> out(kept.size());
    for (std::size_t j = 0; j < kept.size(); ++j)
        out[j] = (row[kept[j]] - means[j]) / stddevs[j];
    return out;
}

std::pair<Standardizer, Matrix> standardize_fit_transform(const Matrix& train, Diagnostics* diagnostics)
{
    if (train.rows() < 2)
        throw Error("standardization needs at least 2 rows");
    Standardizer s;
    const double n = static_cast<double>(train.rows());
    for (std::size_t c = 0; c < train.cols(); ++c) {
        double sum = 0.0;
        for (std::size_t r = 0; r < train.rows(); ++r)
            sum += train(r, c);
        const double mean = sum / n;
        double squares = 0.0;
        for (std::size_t r = 0; r < train.rows(); ++r) {
            const double d = train(r, c) - mean;
            squares += d * d;
        }
        const double stddev = std::sqrt(squares / n);
        if (stddev <= 1e-12 * std::max(1.0, std::abs(mean))) {
            report(diagnostics, "column " + std::to_string(c) + " has zero variance, dropped");
            continue;
        }
        s.kept.push_back(c);
        s.means.push_back(mean);
        s.stddevs.push_back(stddev);
    }
    Matrix out = s.apply(train);
    return {std::move(s), std::move(out)};
}

std::pair<Matrix, Labels> oversample_minority(const Matrix& x, const Labels& y, double factor, std::uint64_t seed)
{
    if (factor < 1.0)
        throw Error("oversampling factor must be at least 1");
    std::vector<std::size_t> by_class[2];
    for (std::size_t i = 0; i < y.size(); ++i)
        by_class[y[i] == 1 ? 1 : 0].push_back(i);
    if (by_class[0].empty() || by_class[1].empty())
        throw Error("oversampling needs both classes");
    const int minority = by_class[1].size() <= by_class[0].size() ? 1 : 0;
    const auto& pool = by_class[minority];
    const auto target = static_cast<std::size_t>(std::llround(factor * static_cast<double>(pool.size())));

    std::vector<std::size_t> order(y.size());
    for (std::size_t i = 0; i < order.size(); ++i)
        order[i] = i;
    Rng rng(seed);
    for (std::size_t k = pool.size(); k < target; ++k)
        order.push_back(pool[rng.below(pool.size())]);

    Labels labels;
    labels.reserve(order.size());
    for (auto i : order)
        labels.push_back(y[i]);
    return {x.select_rows(order), std::move(labels)};
}

}  // namespace callfuse::ml
