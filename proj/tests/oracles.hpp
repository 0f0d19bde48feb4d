#pragma once

// Independent oracles shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <vector>

#include "feynpar/graph_polynomials.hpp"
#include "feynpar/slicing.hpp"

namespace fpt {

using namespace feynpar;

// Independent evaluator over F_q: plain modular arithmetic on the term list.
inline std::uint64_t naive_count(const MultiPoly& p, std::uint64_t q) {
    std::size_t n = p.arity();
    std::vector<std::uint64_t> x(n, 0);
    std::uint64_t count = 0;
    while (true) {
        long long s = 0;
        for (const auto& [e, c] : p.terms()) {
            mpz_class num = c.get_num(), den = c.get_den();
            long long cn = mpz_class(num % static_cast<unsigned long>(q)).get_si();
            long long cd = mpz_class(den % static_cast<unsigned long>(q)).get_si();
            long long inv = 1;
            for (std::uint64_t k = 0; k + 2 < q; ++k) inv = inv * cd % static_cast<long long>(q);
            long long v = ((cn % (long long)q) + (long long)q) % (long long)q * inv % (long long)q;
            for (std::size_t i = 0; i < n; ++i)
                for (int k = 0; k < e[i]; ++k) v = v * static_cast<long long>(x[i]) % static_cast<long long>(q);
            s = (s + v) % static_cast<long long>(q);
        }
        if (s == 0) ++count;
        std::size_t i = 0;
        while (i < n && ++x[i] == q) x[i++] = 0;
        if (i == n) break;
    }
    return count;
}

// Plain Gaussian elimination, kept separate from the library's row reduction.
inline std::size_t rank_of(std::vector<std::vector<Q>> m) {
    std::size_t r = 0;
    std::size_t cols = m.empty() ? 0 : m[0].size();
    for (std::size_t c = 0; c < cols && r < m.size(); ++c) {
        std::size_t p = r;
        while (p < m.size() && m[p][c] == 0) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[r]);
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (i == r || m[i][c] == 0) continue;
            Q f = m[i][c] / m[r][c];
            for (std::size_t j = c; j < cols; ++j) m[i][j] -= f * m[r][j];
        }
        ++r;
    }
    return r;
}

inline std::vector<Exponent> monomials_up_to(std::size_t n, int d) {
    std::vector<Exponent> out;
    Exponent e(n, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i == n) {
            out.push_back(e);
            return;
        }
        for (int k = 0; k <= left; ++k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
        e[i] = 0;
    };
    rec(0, d);
    return out;
}

// Rank of the classes of hs in C[u]/(grad f) for a homogeneous f with an isolated
// singularity at 0. The Jacobian ideal is graded and contains every monomial
// from some degree N on, so the quotient is finite dimensional linear algebra
// on polynomials of degree < N.
inline std::size_t brute_force_rank(const MultiPoly& f, const std::vector<MultiPoly>& hs) {
    std::size_t n = f.arity();
    int g = f.total_degree() - 1;
    auto jac_in_degree = [&](int d) {
        std::vector<MultiPoly> out;
        if (d < g) return out;
        for (const auto& a : monomials_up_to(n, d - g))
            if (exponent_degree(a) == d - g)
                for (std::size_t j = 0; j < n; ++j) out.push_back(MultiPoly::monomial(a, 1) * f.derivative(j));
        return out;
    };
    auto coords = [&](const MultiPoly& p, const std::vector<Exponent>& basis) {
        std::vector<Q> v;
        for (const auto& e : basis) v.push_back(p.coefficient(e));
        return v;
    };
    int N = g;
    while (true) {
        std::vector<Exponent> deg_n;
        for (const auto& e : monomials_up_to(n, N))
            if (exponent_degree(e) == N) deg_n.push_back(e);
        std::vector<std::vector<Q>> rows;
        for (const auto& p : jac_in_degree(N)) rows.push_back(coords(p, deg_n));
        if (rank_of(rows) == deg_n.size()) break;
        ++N;
    }
    std::vector<Exponent> basis = monomials_up_to(n, N - 1);
    std::vector<std::vector<Q>> w;
    for (int d = 0; d < N; ++d)
        for (const auto& p : jac_in_degree(d)) w.push_back(coords(p, basis));
    std::size_t base = rank_of(w);
    for (const auto& h : hs) w.push_back(coords(h, basis));
    return rank_of(w) - base;
}

// The tree-product family that feynman_subspace_dim ranks, rebuilt by hand.
inline std::vector<MultiPoly> tree_products(const FeynmanGraph& g, const LinearSlice& s, const std::vector<int>& exps) {
    auto r = resolve_momenta(g, MomentumData::two_leg_symbolic());
    std::vector<MultiPoly> factors;
    for (const auto& t : spanning_trees(g)) {
        MultiPoly m = MultiPoly::constant(g.n_edges(), 1);
        for (std::size_t e = 0; e < g.n_edges(); ++e)
            if (std::find(t.begin(), t.end(), e) == t.end()) m *= MultiPoly::variable(g.n_edges(), e);
        factors.push_back(restrict(tree_path_linear_form(g, t, r.leg_vertex1, r.leg_vertex2) * m, s));
    }
    std::vector<MultiPoly> out;
    std::function<void(std::size_t, int, MultiPoly)> rec = [&](std::size_t start, int left, MultiPoly acc) {
        if (left == 0) {
            out.push_back(acc);
            return;
        }
        for (std::size_t i = start; i < factors.size(); ++i) rec(i, left - 1, acc * factors[i]);
    };
    for (int e : exps) rec(0, e, MultiPoly::constant(s.dim, 1));
    return out;
}

}  // namespace fpt
