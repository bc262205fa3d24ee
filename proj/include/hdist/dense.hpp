#pragma once
//
// Minimal row-major dense matrix and the three level-2 kernels used by the
// sequential and distributed matvecs.  Both paths call the same kernels so
// that single-rank runs reproduce the sequential result bit for bit.
//

#include <cstdint>
#include <span>
#include <vector>

namespace hdist {

class Matrix {
  public:
    Matrix() = default;
    Matrix(std::int64_t rows, std::int64_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

    std::int64_t rows() const { return rows_; }
    std::int64_t cols() const { return cols_; }
    std::int64_t size() const { return rows_ * cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::int64_t i, std::int64_t j) { return data_[i * cols_ + j]; }
    double operator()(std::int64_t i, std::int64_t j) const { return data_[i * cols_ + j]; }

    std::span<const double> row(std::int64_t i) const { return {data_.data() + i * cols_, static_cast<std::size_t>(cols_)}; }
    std::span<const double> values() const { return data_; }
    std::span<double> values() { return data_; }

    friend bool operator==(const Matrix&, const Matrix&) = default;

  private:
    std::int64_t rows_ = 0;
    std::int64_t cols_ = 0;
    std::vector<double> data_;
};

/// out = A * x
void gemv(const Matrix& a, std::span<const double> x, std::span<double> out);
/// out = A^T * x
void gemv_transposed(const Matrix& a, std::span<const double> x, std::span<double> out);
/// y += alpha * (A * z), each row reduced to a scalar before it is added to y.
void gemv_accumulate(const Matrix& a, std::span<const double> z, double alpha, std::span<double> y);
/// y += alpha * z
void axpy(double alpha, std::span<const double> z, std::span<double> y);

} // namespace hdist
