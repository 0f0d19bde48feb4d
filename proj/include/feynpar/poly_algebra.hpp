#pragma once

#include <vector>

#include "feynpar/poly.hpp"

namespace feynpar {

using PolyMatrix = std::vector<std::vector<MultiPoly>>;

MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b);

namespace detail {

inline MultiPoly content_in(const MultiPoly& p, std::size_t v) {
    MultiPoly g(p.arity());
    for (const auto& [k, c] : p.coefficients_in(v)) {
        g = g.is_zero() ? c.monic() : poly_gcd(g, c);
        if (g.is_constant()) break;
    }
    return g;
}

inline MultiPoly primitive_part_in(const MultiPoly& p, std::size_t v) {
    if (p.is_zero()) return p;
    MultiPoly c = content_in(p, v);
    return *exact_divide(p, c);
}

inline MultiPoly leading_in(const MultiPoly& p, std::size_t v, int& deg) {
    auto cs = p.coefficients_in(v);
    deg = cs.rbegin()->first;
    return cs.rbegin()->second;
}

inline MultiPoly pseudo_remainder(const MultiPoly& a, const MultiPoly& b, std::size_t v) {
    int db = 0;
    MultiPoly lb = leading_in(b, v, db);
    MultiPoly r = a;
    while (!r.is_zero()) {
        int dr = 0;
        MultiPoly lr = leading_in(r, v, dr);
        if (dr < db) break;
        Exponent shift(a.arity(), 0);
        shift[v] = dr - db;
        r = lb * r - lr * b.mul_term(shift, 1);
    }
    return r;
}

}  // namespace detail

// Monic gcd over Q via content / primitive-part recursion.
inline MultiPoly poly_gcd(const MultiPoly& a, const MultiPoly& b) {
    require(a.arity() == b.arity(), ErrorKind::ArityMismatch, "gcd arity");
    std::size_t n = a.arity();
    if (a.is_zero()) return b.monic();
    if (b.is_zero()) return a.monic();
    if (a.is_constant() || b.is_constant()) return MultiPoly::constant(n, 1);

    std::size_t best = n;
    int bestdeg = 0;
    for (std::size_t v = 0; v < n; ++v) {
        int d = std::max(a.degree_in(v), b.degree_in(v));
        if (d > 0 && (best == n || d < bestdeg)) {
            best = v;
            bestdeg = d;
        }
    }
    std::size_t v = best;
    if (a.degree_in(v) == 0) return poly_gcd(a, detail::content_in(b, v));
    if (b.degree_in(v) == 0) return poly_gcd(detail::content_in(a, v), b);

    MultiPoly ca = detail::content_in(a, v), cb = detail::content_in(b, v);
    MultiPoly g = poly_gcd(ca, cb);
    MultiPoly A = *exact_divide(a, ca), B = *exact_divide(b, cb);
    if (A.degree_in(v) < B.degree_in(v)) std::swap(A, B);
    while (true) {
        MultiPoly R = detail::pseudo_remainder(A, B, v);
        if (R.is_zero()) break;
        if (R.degree_in(v) == 0) {
            B = MultiPoly::constant(n, 1);
            break;
        }
        A = B;
        B = detail::primitive_part_in(R, v);
    }
    return (g * detail::primitive_part_in(B, v)).monic();
}

struct GcdDivides {
    MultiPoly gcd;
    bool a_divides_b = false;
};

inline GcdDivides gcd_divides(const MultiPoly& a, const MultiPoly& b) {
    require(!a.is_zero(), ErrorKind::ZeroPolynomial, "gcd_divides needs a != 0");
    return {poly_gcd(a, b), divides(a, b)};
}

// Fraction-free Bareiss elimination.
inline MultiPoly det_polynomial(PolyMatrix m, std::size_t arity) {
    std::size_t k = m.size();
    for (const auto& row : m) require(row.size() == k, ErrorKind::ArityMismatch, "determinant of non-square matrix");
    if (k == 0) return MultiPoly::constant(arity, 1);
    int sign = 1;
    MultiPoly prev = MultiPoly::constant(arity, 1);
    for (std::size_t p = 0; p + 1 < k; ++p) {
        if (m[p][p].is_zero()) {
            std::size_t s = p + 1;
            while (s < k && m[s][p].is_zero()) ++s;
            if (s == k) return MultiPoly(arity);
            std::swap(m[p], m[s]);
            sign = -sign;
        }
        for (std::size_t i = p + 1; i < k; ++i) {
            for (std::size_t j = p + 1; j < k; ++j) {
                MultiPoly num = m[i][j] * m[p][p] - m[i][p] * m[p][j];
                m[i][j] = *exact_divide(num, prev);
            }
            m[i][p] = MultiPoly(arity);
        }
        prev = m[p][p];
    }
    return sign > 0 ? m[k - 1][k - 1] : -m[k - 1][k - 1];
}

inline MultiPoly det_cofactor(const PolyMatrix& m, std::size_t arity) {
    std::size_t k = m.size();
    if (k == 0) return MultiPoly::constant(arity, 1);
    if (k == 1) return m[0][0];
    MultiPoly s(arity);
    for (std::size_t j = 0; j < k; ++j) {
        if (m[0][j].is_zero()) continue;
        PolyMatrix minor;
        for (std::size_t i = 1; i < k; ++i) {
            std::vector<MultiPoly> row;
            for (std::size_t c = 0; c < k; ++c)
                if (c != j) row.push_back(m[i][c]);
            minor.push_back(row);
        }
        MultiPoly t = m[0][j] * det_cofactor(minor, arity);
        if (j % 2) s -= t;
        else s += t;
    }
    return s;
}

// Exact rational linear algebra helpers.
using QMatrix = std::vector<std::vector<Q>>;

// Row-reduce in place; returns pivot columns.
inline std::vector<std::size_t> row_reduce(QMatrix& a) {
    std::vector<std::size_t> pivots;
    if (a.empty()) return pivots;
    std::size_t rows = a.size(), cols = a[0].size(), r = 0;
    for (std::size_t c = 0; c < cols && r < rows; ++c) {
        std::size_t p = r;
        while (p < rows && a[p][c] == 0) ++p;
        if (p == rows) continue;
        std::swap(a[p], a[r]);
        Q inv = Q(1) / a[r][c];
        for (std::size_t j = c; j < cols; ++j) a[r][j] *= inv;
        for (std::size_t i = 0; i < rows; ++i) {
            if (i == r || a[i][c] == 0) continue;
            Q f = a[i][c];
            for (std::size_t j = c; j < cols; ++j) a[i][j] -= f * a[r][j];
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

inline std::size_t matrix_rank(QMatrix a) {
    return row_reduce(a).size();
}

// Basis of the right kernel {x : a x = 0}.
inline QMatrix kernel_basis(QMatrix a, std::size_t cols) {
    auto piv = row_reduce(a);
    std::vector<bool> is_piv(cols, false);
    for (auto c : piv) is_piv[c] = true;
    QMatrix basis;
    for (std::size_t f = 0; f < cols; ++f) {
        if (is_piv[f]) continue;
        std::vector<Q> x(cols, 0);
        x[f] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = -a[r][f];
        basis.push_back(x);
    }
    return basis;
}

// Solve a x = b; nullopt if inconsistent. Free variables are set to zero.
inline std::optional<std::vector<Q>> solve_linear(const QMatrix& a, const std::vector<Q>& b, std::size_t cols) {
    QMatrix aug = a;
    for (std::size_t i = 0; i < aug.size(); ++i) aug[i].push_back(b[i]);
    auto piv = row_reduce(aug);
    for (std::size_t r = 0; r < piv.size(); ++r)
        if (piv[r] == cols) return std::nullopt;
    std::vector<Q> x(cols, 0);
    for (std::size_t r = 0; r < piv.size(); ++r) x[piv[r]] = aug[r][cols];
    return x;
}

inline std::optional<QMatrix> invert(const QMatrix& a) {
    std::size_t n = a.size();
    if (n == 0) return QMatrix{};
    QMatrix aug(n, std::vector<Q>(2 * n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j];
        aug[i][n + i] = 1;
    }
    auto piv = row_reduce(aug);
    if (piv.size() < n || piv[n - 1] != n - 1) return std::nullopt;
    QMatrix inv(n, std::vector<Q>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) inv[i][j] = aug[i][n + j];
    return inv;
}

}  // namespace feynpar
