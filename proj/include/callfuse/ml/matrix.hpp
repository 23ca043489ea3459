#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace callfuse::ml {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0) : m_rows(rows), m_cols(cols), m_data(rows * cols, fill) {}

    std::size_t rows() const noexcept { return m_rows; }
    std::size_t cols() const noexcept { return m_cols; }
    bool empty() const noexcept { return m_rows == 0; }

    double& operator()(std::size_t r, std::size_t c)
    {
        assert(r < m_rows && c < m_cols);
        return m_data[r * m_cols + c];
    }
    double operator()(std::size_t r, std::size_t c) const
    {
        assert(r < m_rows && c < m_cols);
        return m_data[r * m_cols + c];
    }

    std::span<double> row(std::size_t r) { return {m_data.data() + r * m_cols, m_cols}; }
    std::span<const double> row(std::size_t r) const { return {m_data.data() + r * m_cols, m_cols}; }

    /// Appends a row; the first row fixes the width when the matrix is empty.
    void push_row(std::span<const double> values)
    {
        if (m_rows == 0 && m_cols == 0)
            m_cols = values.size();
        assert(values.size() == m_cols);
        m_data.insert(m_data.end(), values.begin(), values.end());
        ++m_rows;
    }

    /// Rows at `indices`, in that order (repeats allowed).
    Matrix select_rows(std::span<const std::size_t> indices) const
    {
        Matrix out(indices.size(), m_cols);
        for (std::size_t i = 0; i < indices.size(); ++i) {
            auto src = row(indices[i]);
            std::copy(src.begin(), src.end(), out.row(i).begin());
        }
        return out;
    }

    const std::vector<double>& data() const noexcept { return m_data; }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t m_rows = 0;
    std::size_t m_cols = 0;
    std::vector<double> m_data;
};

using Labels = std::vector<int>;

}  // namespace callfuse::ml
