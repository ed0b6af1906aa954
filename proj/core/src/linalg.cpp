#include "lo/linalg.hpp"

#include <algorithm>
#include <stdexcept>

#include "lo/error.hpp"

namespace lo {

namespace {

// Reduced row echelon form in place; returns pivot columns.
std::vector<std::size_t> rref(QMatrix& m, std::size_t cols) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < cols && row < m.size(); ++col) {
        std::size_t sel = row;
        while (sel < m.size() && m[sel][col] == 0) ++sel;
        if (sel == m.size()) continue;
        std::swap(m[sel], m[row]);
        Rational inv = 1 / m[row][col];
        for (auto& x : m[row]) x *= inv;
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == row || m[r][col] == 0) continue;
            Rational f = m[r][col];
            for (std::size_t c = 0; c < cols; ++c) m[r][c] -= f * m[row][c];
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

void check_cols(const QMatrix& rows, std::size_t cols) {
    for (const auto& r : rows)
        if (r.size() != cols) throw SizeMismatch("ragged matrix");
}

}  // namespace

std::size_t rank(const QMatrix& rows, std::size_t cols) {
    check_cols(rows, cols);
    QMatrix m = rows;
    return rref(m, cols).size();
}

ZVec primitive(const QVec& v) {
    Integer l = 1;
    for (const auto& x : v) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), x.get_den_mpz_t());
    ZVec out(v.size());
    Integer g = 0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = v[i].get_num() * (l / v[i].get_den());
        mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), out[i].get_mpz_t());
    }
    if (g > 1)
        for (auto& x : out) x /= g;
    return out;
}

ZMatrix integer_nullspace(const QMatrix& rows, std::size_t cols) {
    check_cols(rows, cols);
    QMatrix m = rows;
    auto pivots = rref(m, cols);
    std::vector<bool> is_pivot(cols, false);
    for (auto p : pivots) is_pivot[p] = true;

    ZMatrix basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (is_pivot[free]) continue;
        QVec v(cols, Rational(0));
        v[free] = 1;
        for (std::size_t r = 0; r < pivots.size(); ++r) v[pivots[r]] = -m[r][free];
        ZVec z = primitive(v);
        auto first = std::find_if(z.begin(), z.end(), [](const Integer& x) { return x != 0; });
        if (first != z.end() && *first < 0)
            for (auto& x : z) x = -x;
        basis.push_back(std::move(z));
    }
    return basis;
}

Integer max_abs(const ZVec& v) {
    Integer best = 0;
    for (const auto& x : v)
        if (abs(x) > best) best = abs(x);
    return best;
}

Integer determinant(ZMatrix m) {
    const std::size_t n = m.size();
    for (const auto& r : m)
        if (r.size() != n) throw SizeMismatch("determinant of a non-square matrix");
    if (n == 0) return 1;
    // Bareiss fraction-free elimination.
    Integer sign = 1, prev = 1;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (m[k][k] == 0) {
            std::size_t sel = k + 1;
            while (sel < n && m[sel][k] == 0) ++sel;
            if (sel == n) return 0;
            std::swap(m[k], m[sel]);
            sign = -sign;
        }
        for (std::size_t i = k + 1; i < n; ++i) {
            for (std::size_t j = k + 1; j < n; ++j) {
                Integer t = m[i][j] * m[k][k] - m[i][k] * m[k][j];
                mpz_divexact(m[i][j].get_mpz_t(), t.get_mpz_t(), prev.get_mpz_t());
            }
        }
        prev = m[k][k];
    }
    return sign * m[n - 1][n - 1];
}

UnimodularPair unimodular_to_unit(const ZVec& a) {
    const std::size_t n = a.size();
    if (n == 0) throw InvalidParameter("empty relation vector");
    UnimodularPair out;
    out.w.assign(n, ZVec(n, Integer(0)));
    out.w_inv.assign(n, ZVec(n, Integer(0)));
    for (std::size_t i = 0; i < n; ++i) out.w[i][i] = out.w_inv[i][i] = 1;

    ZVec v = a;
    // Column operation col_q -= m * col_p on W is row_p += m * row_q on W^{-1}.
    auto col_op = [&](std::size_t q, std::size_t p, const Integer& mult) {
        for (std::size_t r = 0; r < n; ++r) out.w[r][q] -= mult * out.w[r][p];
        for (std::size_t c = 0; c < n; ++c) out.w_inv[p][c] += mult * out.w_inv[q][c];
        v[q] -= mult * v[p];
    };
    auto col_swap = [&](std::size_t p, std::size_t q) {
        for (std::size_t r = 0; r < n; ++r) std::swap(out.w[r][p], out.w[r][q]);
        std::swap(out.w_inv[p], out.w_inv[q]);
        std::swap(v[p], v[q]);
    };
    auto col_negate = [&](std::size_t p) {
        for (std::size_t r = 0; r < n; ++r) out.w[r][p] = -out.w[r][p];
        for (auto& x : out.w_inv[p]) x = -x;
        v[p] = -v[p];
    };

    while (true) {
        std::size_t best = n;
        for (std::size_t i = 0; i < n; ++i)
            if (v[i] != 0 && (best == n || abs(v[i]) < abs(v[best]))) best = i;
        if (best == n) throw InvalidParameter("zero relation vector");
        bool done = true;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == best || v[i] == 0) continue;
            Integer q;
            mpz_fdiv_q(q.get_mpz_t(), v[i].get_mpz_t(), v[best].get_mpz_t());
            col_op(i, best, q);
            if (v[i] != 0) done = false;
        }
        if (done) {
            if (best != 0) col_swap(0, best);
            if (v[0] < 0) col_negate(0);
            break;
        }
    }
    if (v[0] != 1) throw InvalidParameter("relation vector is not primitive");
    return out;
}

QVec to_qvec(const ZVec& v) {
    QVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rational(v[i]);
    return out;
}

ZVec to_zvec(const std::vector<std::int64_t>& v) {
    ZVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Integer(static_cast<long>(v[i]));
    return out;
}

}  // namespace lo
