#pragma once

#include "callfuse/error.hpp"
#include "callfuse/ml/matrix.hpp"

#include <cstdint>
#include <utility>
#include <vector>

namespace callfuse::ml {

/// Per-column z-scoring with statistics taken from the training rows.
/// Columns whose population stddev is (numerically) zero are dropped.
struct Standardizer {
    std::vector<std::size_t> kept;  ///< input column indices that survive
    std::vector<double> means;      ///< one per kept column
    std::vector<double> stddevs;    ///< one per kept column, all > 0

    Matrix apply(const Matrix& x) const;
    std::vector<double> apply_row(std::span<const double> row) const;
};

/// Fits on `train` and returns the transformed copy. Needs at least 2 rows.
std::pair<Standardizer, Matrix> standardize_fit_transform(const Matrix& train, Diagnostics* diagnostics = nullptr);

/// Duplicates minority rows, drawn with replacement, until the minority count
/// is round(factor * original minority count). Original rows keep their
/// order; the drawn copies are appended. Throws Error for single-class input
/// or factor < 1. A tie in class counts treats label 1 as the minority.
std::pair<Matrix, Labels> oversample_minority(const Matrix& x, const Labels& y, double factor, std::uint64_t seed);

}  // namespace callfuse::ml
