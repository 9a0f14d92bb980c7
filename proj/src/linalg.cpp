#include "regdp/linalg.hpp"

#include <cmath>
#include <utility>

namespace regdp {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
    if (a.cols_ != b.rows_) throw std::invalid_argument("matrix product shape mismatch");
    Matrix out(a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i) {
        for (std::size_t k = 0; k < a.cols_; ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols_; ++j) out(i, j) += aik * b(k, j);
        }
    }
    return out;
}

std::vector<double> Matrix::operator*(const std::vector<double>& x) const {
    if (x.size() != cols_) throw std::invalid_argument("matrix-vector shape mismatch");
    std::vector<double> y(rows_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j) y[i] += (*this)(i, j) * x[j];
    return y;
}

std::vector<double> solve_linear(Matrix a, std::vector<double> b, double pivot_tol) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n) throw std::invalid_argument("solve_linear: shape mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a(r, col)) > std::fabs(a(pivot, col))) pivot = r;
        if (std::fabs(a(pivot, col)) < pivot_tol) {
            throw SingularSystemError("singular linear system (pivot below threshold at column " +
                                      std::to_string(col) + ")");
        }
        if (pivot != col) {
            for (std::size_t c = 0; c < n; ++c) std::swap(a(pivot, c), a(col, c));
            std::swap(b[pivot], b[col]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

CostFunction AffineMap::apply(const CostFunction& J) const {
    const std::size_t n = size();
    if (J.size() != n) throw std::invalid_argument("AffineMap::apply: length mismatch");
    CostFunction out(n);
    for (std::size_t i = 0; i < n; ++i) {
        ExtReal acc = offset[i];
        for (std::size_t j = 0; j < n; ++j) {
            const double w = linear(i, j);
            if (w != 0.0) acc = ext_add(acc, ext_scale(w, J[j]));
        }
        out[i] = acc;
    }
    return out;
}

AffineMap AffineMap::compose(const AffineMap& inner) const {
    AffineMap out;
    out.linear = linear * inner.linear;
    out.offset = linear * inner.offset;
    for (std::size_t i = 0; i < out.offset.size(); ++i) out.offset[i] += offset[i];
    return out;
}

AffineMap AffineMap::identity(std::size_t n) {
    return AffineMap{std::vector<double>(n, 0.0), Matrix::identity(n)};
}

AffineMap affine_power(const AffineMap& m, std::uint64_t k) {
    AffineMap result = AffineMap::identity(m.size());
    AffineMap base = m;
    while (k > 0) {
        // Powers of one map commute, so the composition order is immaterial.
        if (k & 1u) result = base.compose(result);
        k >>= 1u;
        if (k) base = base.compose(base);
    }
    return result;
}

}  // namespace regdp
