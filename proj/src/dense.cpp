#include "hdist/dense.hpp"

#include <stdexcept>

namespace hdist {

namespace {

void check(bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
}

} // namespace

void gemv(const Matrix& a, std::span<const double> x, std::span<double> out) {
    check(static_cast<std::int64_t>(x.size()) == a.cols() && static_cast<std::int64_t>(out.size()) == a.rows(),
          "gemv: dimension mismatch");
    for (std::int64_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::int64_t j = 0; j < a.cols(); ++j) acc += row[j] * x[j];
        out[i] = acc;
    }
}

void gemv_transposed(const Matrix& a, std::span<const double> x, std::span<double> out) {
    check(static_cast<std::int64_t>(x.size()) == a.rows() && static_cast<std::int64_t>(out.size()) == a.cols(),
          "gemv_transposed: dimension mismatch");
    for (auto& v : out) v = 0.0;
    for (std::int64_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        const double xi = x[i];
        for (std::int64_t k = 0; k < a.cols(); ++k) out[k] += row[k] * xi;
    }
}

void gemv_accumulate(const Matrix& a, std::span<const double> z, double alpha, std::span<double> y) {
    check(static_cast<std::int64_t>(z.size()) == a.cols() && static_cast<std::int64_t>(y.size()) == a.rows(),
          "gemv_accumulate: dimension mismatch");
    for (std::int64_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        double acc = 0.0;
        for (std::int64_t k = 0; k < a.cols(); ++k) acc += row[k] * z[k];
        y[i] += alpha * acc;
    }
}

void axpy(double alpha, std::span<const double> z, std::span<double> y) {
    check(z.size() == y.size(), "axpy: dimension mismatch");
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += alpha * z[i];
}

} // namespace hdist
