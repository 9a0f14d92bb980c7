#include "regdp/lp.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace regdp {

namespace {

// Tableau with m constraint rows, the objective row m and the phase-one row
// m + 1. Column n is the artificial variable, column n + 1 the right-hand side.
class Tableau {
public:
    Tableau(const std::vector<std::vector<double>>& A, const std::vector<double>& b, const std::vector<double>& c,
            double eps)
        : m_(b.size()), n_(c.size()), eps_(eps), basic_(m_), nonbasic_(n_ + 1), d_(m_ + 2, std::vector<double>(n_ + 2)) {
        for (std::size_t i = 0; i < m_; ++i) {
            if (A[i].size() != n_) throw std::invalid_argument("simplex: constraint row has the wrong length");
            for (std::size_t j = 0; j < n_; ++j) d_[i][j] = A[i][j];
            basic_[i] = static_cast<long>(n_ + i);
            d_[i][n_] = -1.0;
            d_[i][n_ + 1] = b[i];
        }
        for (std::size_t j = 0; j < n_; ++j) {
            nonbasic_[j] = static_cast<long>(j);
            d_[m_][j] = -c[j];
        }
        nonbasic_[n_] = -1;
        d_[m_ + 1][n_] = 1.0;
    }

    LpSolution solve(std::size_t max_pivots) {
        LpSolution out;
        std::size_t r = 0;
        for (std::size_t i = 1; i < m_; ++i)
            if (d_[i][n_ + 1] < d_[r][n_ + 1]) r = i;
        if (m_ > 0 && d_[r][n_ + 1] < -eps_) {
            pivot(r, n_);
            const LpStatus phase1 = run(2, max_pivots);
            out.pivots = pivots_;
            if (phase1 == LpStatus::IterationLimit) {
                out.status = phase1;
                return out;
            }
            if (phase1 != LpStatus::Optimal || d_[m_ + 1][n_ + 1] < -eps_) {
                out.status = LpStatus::Infeasible;
                return out;
            }
            // Drive the artificial variable out of the basis.
            for (std::size_t i = 0; i < m_; ++i) {
                if (basic_[i] != -1) continue;
                std::size_t s = 0;
                for (std::size_t j = 1; j <= n_; ++j)
                    if (better(d_[i], j, s)) s = j;
                pivot(i, s);
            }
        }
        out.status = run(1, max_pivots);
        out.pivots = pivots_;
        out.x.assign(n_, 0.0);
        for (std::size_t i = 0; i < m_; ++i)
            if (basic_[i] >= 0 && static_cast<std::size_t>(basic_[i]) < n_)
                out.x[static_cast<std::size_t>(basic_[i])] = d_[i][n_ + 1];
        out.objective = d_[m_][n_ + 1];
        return out;
    }

private:
    bool better(const std::vector<double>& row, std::size_t j, std::size_t s) const {
        return std::make_pair(row[j], nonbasic_[j]) < std::make_pair(row[s], nonbasic_[s]);
    }

    void pivot(std::size_t r, std::size_t s) {
        ++pivots_;
        const double inv = 1.0 / d_[r][s];
        for (std::size_t i = 0; i < m_ + 2; ++i) {
            if (i == r || std::fabs(d_[i][s]) <= eps_) continue;
            const double factor = d_[i][s] * inv;
            for (std::size_t j = 0; j < n_ + 2; ++j) d_[i][j] -= d_[r][j] * factor;
            d_[i][s] = d_[r][s] * factor;
        }
        for (std::size_t j = 0; j < n_ + 2; ++j)
            if (j != s) d_[r][j] *= inv;
        for (std::size_t i = 0; i < m_ + 2; ++i)
            if (i != r) d_[i][s] *= -inv;
        d_[r][s] = inv;
        std::swap(basic_[r], nonbasic_[s]);
    }

    LpStatus run(int phase, std::size_t max_pivots) {
        const std::size_t x = m_ + static_cast<std::size_t>(phase) - 1;
        while (true) {
            if (pivots_ >= max_pivots) return LpStatus::IterationLimit;
            long s = -1;
            for (std::size_t j = 0; j <= n_; ++j) {
                if (nonbasic_[j] == -phase) continue;
                if (s == -1 || better(d_[x], j, static_cast<std::size_t>(s))) s = static_cast<long>(j);
            }
            const auto sc = static_cast<std::size_t>(s);
            if (d_[x][sc] >= -eps_) return LpStatus::Optimal;
            long r = -1;
            for (std::size_t i = 0; i < m_; ++i) {
                if (d_[i][sc] <= eps_) continue;
                if (r == -1) {
                    r = static_cast<long>(i);
                    continue;
                }
                const auto rc = static_cast<std::size_t>(r);
                const auto lhs = std::make_pair(d_[i][n_ + 1] / d_[i][sc], basic_[i]);
                const auto rhs = std::make_pair(d_[rc][n_ + 1] / d_[rc][sc], basic_[rc]);
                if (lhs < rhs) r = static_cast<long>(i);
            }
            if (r == -1) return LpStatus::Unbounded;
            pivot(static_cast<std::size_t>(r), sc);
        }
    }

    std::size_t m_, n_;
    double eps_;
    std::vector<long> basic_, nonbasic_;
    std::vector<std::vector<double>> d_;
    std::size_t pivots_ = 0;
};

}  // namespace

LpSolution simplex_maximize(const std::vector<std::vector<double>>& A, const std::vector<double>& b,
                            const std::vector<double>& c, std::size_t max_pivots, double eps) {
    if (A.size() != b.size()) throw std::invalid_argument("simplex: A and b disagree on the row count");
    return Tableau(A, b, c, eps).solve(max_pivots);
}

}  // namespace regdp
