#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "regdp/extreal.hpp"

namespace regdp {

/// Raised when a pivot falls below the singularity threshold.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Small dense row-major matrix. Sizes in this library are desk-scale
/// (tens of states), so nothing here is blocked or vectorized.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    friend Matrix operator*(const Matrix& a, const Matrix& b);
    std::vector<double> operator*(const std::vector<double>& x) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// Solves A x = b by Gaussian elimination with partial pivoting. Throws
/// SingularSystemError when the largest available pivot is below pivot_tol.
std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol = 1e-12);

/**
 * The map J -> offset + linear * J with a nonnegative linear part.
 *
 * This is the form of T_mu on a finite model, so k-fold compositions can be
 * formed by repeated squaring instead of k sequential applications.
 */
struct AffineMap {
    std::vector<double> offset;
    Matrix linear;

    std::size_t size() const noexcept { return offset.size(); }

    /// Evaluates with extended-real conventions (0 * inf = 0).
    CostFunction apply(const CostFunction& J) const;

    /// (*this) o inner, i.e. J -> this(inner(J)).
    AffineMap compose(const AffineMap& inner) const;

    static AffineMap identity(std::size_t n);
};

/// The k-fold composition m o m o ... o m (identity for k = 0).
AffineMap affine_power(const AffineMap& m, std::uint64_t k);

}  // namespace regdp
