#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace imgcf {

// Row-major dense matrix of doubles. All numerical state in the project
// (embeddings, propagated representations, gradients, Adam moments) lives in
// this type.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::int64_t rows, std::int64_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows * cols), fill) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }

    double& operator()(std::int64_t r, std::int64_t c) {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }
    double operator()(std::int64_t r, std::int64_t c) const {
        return data_[static_cast<std::size_t>(r * cols_ + c)];
    }

    std::span<double> row(std::int64_t r) {
        return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
    }
    std::span<const double> row(std::int64_t r) const {
        return {data_.data() + r * cols_, static_cast<std::size_t>(cols_)};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    void set_zero() { data_.assign(data_.size(), 0.0); }

    bool all_finite() const {
        for (const double v : data_) {
            if (!std::isfinite(v)) return false;
        }
        return true;
    }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    // this += scale * other (shapes must match).
    void add_scaled(const Matrix& other, double scale) {
        for (std::size_t i = 0; i < data_.size(); ++i) {
            data_[i] += scale * other.data_[i];
        }
    }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<double> data_;
};

// 64-bit dot product, left to right. Widths must match.
inline double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        acc += a[i] * b[i];
    }
    return acc;
}

}  // namespace imgcf
