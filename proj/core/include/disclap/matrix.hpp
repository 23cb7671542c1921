#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace disclap {

// Dense row-major matrix, just enough for haplotype tables and
// responsibility matrices.
template <typename T>
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<T>>& rows) {
        if (rows.empty()) return Matrix{};
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw std::invalid_argument("ragged rows in matrix");
            for (std::size_t k = 0; k < m.cols_; ++k) m(i, k) = rows[i][k];
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    T& operator()(std::size_t i, std::size_t k) { return data_[i * cols_ + k]; }
    const T& operator()(std::size_t i, std::size_t k) const { return data_[i * cols_ + k]; }

    std::span<const T> row(std::size_t i) const {
        return std::span<const T>(data_.data() + i * cols_, cols_);
    }
    std::span<T> row(std::size_t i) {
        return std::span<T>(data_.data() + i * cols_, cols_);
    }

    std::vector<T> row_vec(std::size_t i) const {
        auto r = row(i);
        return std::vector<T>(r.begin(), r.end());
    }

    bool operator==(const Matrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<T> data_;
};

using IntMatrix = Matrix<int>;
using RealMatrix = Matrix<double>;

}  // namespace disclap
