#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "reach/errors.hpp"

namespace reach {

/// Dense row-major matrix of doubles. Sized for the small blocks this
/// library works with; no attempt at cache blocking or sparsity.
class Matrix {
  public:
    Matrix() = default;

    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    /// Build from nested braces: Matrix({{1,2},{3,4}}).
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool square() const { return rows_ == cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool all_finite() const;

    Matrix transposed() const;

  private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);
std::vector<double> operator*(const Matrix& a, const std::vector<double>& x);
bool operator==(const Matrix& a, const Matrix& b);

/// Max absolute entry.
double max_abs_entry(const Matrix& a);

/// Gauss-Jordan inverse with partial pivoting. Throws LinalgError when the
/// matrix is singular to working precision.
Matrix inverse(const Matrix& a);

}  // namespace reach
