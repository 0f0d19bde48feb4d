#pragma once

#include <algorithm>
#include <functional>
#include <optional>
#include <set>
#include <vector>

#include "feynpar/poly.hpp"
#include "feynpar/poly_algebra.hpp"

namespace feynpar {

enum class MonomialOrder { Grlex, Local };

struct PolyIdeal {
    std::size_t arity = 0;
    std::vector<MultiPoly> generators;
    MonomialOrder order = MonomialOrder::Grlex;
    // For local standard bases: the truncation degree N with m^N included.
    int truncation = 0;
};

struct GroebnerOptions {
    std::size_t max_arity = 4;
    std::size_t step_budget = 2000000;
    int local_max_truncation = 24;
};

class GroebnerTimeout : public Error {
public:
    GroebnerTimeout(std::vector<MultiPoly> partial)
        : Error(ErrorKind::Timeout, "Groebner step budget exhausted"), partial_(std::move(partial)) {}
    const std::vector<MultiPoly>& partial() const { return partial_; }

private:
    std::vector<MultiPoly> partial_;
};

// Full reduction of f modulo the list g (grlex).
inline MultiPoly normal_form(const MultiPoly& f, const std::vector<MultiPoly>& g, std::size_t* steps = nullptr) {
    MultiPoly p = f;
    MultiPoly r(f.arity());
    while (!p.is_zero()) {
        Exponent lp = p.leading_exponent();
        Q cp = p.leading_coefficient();
        bool reduced = false;
        for (const auto& gi : g) {
            const Exponent& lg = gi.leading_exponent();
            if (exponent_divides(lg, lp)) {
                p -= gi.mul_term(exponent_sub(lp, lg), cp / gi.leading_coefficient());
                reduced = true;
                if (steps) ++*steps;
                break;
            }
        }
        if (!reduced) {
            r.add_term(lp, cp);
            p.add_term(lp, -cp);
        }
    }
    return r;
}

namespace detail {

inline MultiPoly s_polynomial(const MultiPoly& a, const MultiPoly& b) {
    const Exponent& la = a.leading_exponent();
    const Exponent& lb = b.leading_exponent();
    Exponent l = exponent_lcm(la, lb);
    return a.mul_term(exponent_sub(l, la), Q(1) / a.leading_coefficient()) -
           b.mul_term(exponent_sub(l, lb), Q(1) / b.leading_coefficient());
}

inline bool coprime(const Exponent& a, const Exponent& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] && b[i]) return false;
    return true;
}

inline bool by_leading_desc(const MultiPoly& a, const MultiPoly& b) {
    return GrlexLess{}(b.leading_exponent(), a.leading_exponent());
}

inline std::vector<MultiPoly> reduce_basis(std::vector<MultiPoly> g) {
    for (auto& p : g) p = p.monic();
    std::sort(g.begin(), g.end(), [](const MultiPoly& a, const MultiPoly& b) {
        return GrlexLess{}(a.leading_exponent(), b.leading_exponent());
    });
    std::vector<MultiPoly> minimal;
    for (const auto& p : g) {
        bool redundant = false;
        for (const auto& q : minimal)
            if (exponent_divides(q.leading_exponent(), p.leading_exponent())) {
                redundant = true;
                break;
            }
        if (!redundant) minimal.push_back(p);
    }
    std::vector<MultiPoly> out;
    for (std::size_t i = 0; i < minimal.size(); ++i) {
        std::vector<MultiPoly> others;
        for (std::size_t j = 0; j < minimal.size(); ++j)
            if (j != i) others.push_back(minimal[j]);
        MultiPoly lead = MultiPoly::monomial(minimal[i].leading_exponent(), 1);
        MultiPoly tail = minimal[i] - lead;
        out.push_back(lead + normal_form(tail, others));
    }
    std::sort(out.begin(), out.end(), by_leading_desc);
    return out;
}

}  // namespace detail

// Reduced Groebner basis in graded-lex order (Buchberger with the coprime criterion).
inline std::vector<MultiPoly> groebner_grlex(const std::vector<MultiPoly>& gens, std::size_t arity,
                                             const GroebnerOptions& opt = {}) {
    require(arity <= opt.max_arity, ErrorKind::TooLarge, "Groebner arity cap exceeded");
    std::vector<MultiPoly> g;
    for (const auto& p : gens) {
        require(p.arity() == arity, ErrorKind::ArityMismatch, "ideal generators differ in arity");
        if (!p.is_zero()) g.push_back(p.monic());
    }
    if (g.empty()) return {};
    for (const auto& p : g)
        if (p.is_constant()) return {MultiPoly::constant(arity, 1)};
    std::size_t steps = 0;
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    for (std::size_t j = 1; j < g.size(); ++j)
        for (std::size_t i = 0; i < j; ++i) pairs.emplace_back(i, j);
    auto pair_degree = [&](const std::pair<std::size_t, std::size_t>& pr) {
        return exponent_degree(exponent_lcm(g[pr.first].leading_exponent(), g[pr.second].leading_exponent()));
    };
    while (!pairs.empty()) {
        auto best = std::min_element(pairs.begin(), pairs.end(), [&](const auto& a, const auto& b) {
            int da = pair_degree(a), db = pair_degree(b);
            return da != db ? da < db : a < b;
        });
        auto pr = *best;
        pairs.erase(best);
        const Exponent& li = g[pr.first].leading_exponent();
        const Exponent& lj = g[pr.second].leading_exponent();
        if (detail::coprime(li, lj)) continue;
        Exponent l = exponent_lcm(li, lj);
        bool chain = false;
        for (std::size_t k = 0; k < g.size() && !chain; ++k) {
            if (k == pr.first || k == pr.second) continue;
            if (!exponent_divides(g[k].leading_exponent(), l)) continue;
            auto pending = [&](std::size_t a, std::size_t b) {
                auto key = std::make_pair(std::min(a, b), std::max(a, b));
                return std::find(pairs.begin(), pairs.end(), key) != pairs.end();
            };
            if (!pending(pr.first, k) && !pending(pr.second, k)) chain = true;
        }
        if (chain) continue;
        MultiPoly h = normal_form(detail::s_polynomial(g[pr.first], g[pr.second]), g, &steps);
        if (steps > opt.step_budget) throw GroebnerTimeout(g);
        if (h.is_zero()) continue;
        h = h.monic();
        if (h.is_constant()) return {MultiPoly::constant(arity, 1)};
        g.push_back(h);
        for (std::size_t i = 0; i + 1 < g.size(); ++i) pairs.emplace_back(i, g.size() - 1);
    }
    return detail::reduce_basis(g);
}

inline bool is_unit_ideal(const std::vector<MultiPoly>& gb) {
    return gb.size() == 1 && gb[0].is_constant() && !gb[0].is_zero();
}

// Monomials outside the leading-term ideal; nullopt when infinitely many.
inline std::optional<std::vector<Exponent>> standard_monomials(const std::vector<MultiPoly>& gb, std::size_t arity) {
    if (is_unit_ideal(gb)) return std::vector<Exponent>{};
    std::vector<int> bound(arity, -1);
    for (const auto& g : gb) {
        const Exponent& e = g.leading_exponent();
        int nz = 0;
        std::size_t idx = 0;
        for (std::size_t i = 0; i < arity; ++i)
            if (e[i]) {
                ++nz;
                idx = i;
            }
        if (nz == 1 && (bound[idx] < 0 || e[idx] < bound[idx])) bound[idx] = e[idx];
    }
    for (int b : bound)
        if (b < 0) return std::nullopt;
    std::vector<Exponent> out;
    Exponent e(arity, 0);
    while (true) {
        bool standard = true;
        for (const auto& g : gb)
            if (exponent_divides(g.leading_exponent(), e)) {
                standard = false;
                break;
            }
        if (standard) out.push_back(e);
        std::size_t i = 0;
        while (i < arity) {
            if (++e[i] < bound[i]) break;
            e[i] = 0;
            ++i;
        }
        if (i == arity) break;
        if (arity == 0) break;
    }
    if (arity == 0) out = {Exponent{}};
    std::sort(out.begin(), out.end(), GrlexLess{});
    return out;
}

// Krull dimension of R/I from the leading monomials; -1 for the unit ideal.
inline int ideal_dimension(const std::vector<MultiPoly>& gb, std::size_t arity) {
    if (is_unit_ideal(gb)) return -1;
    int best = 0;
    for (unsigned mask = 0; mask < (1u << arity); ++mask) {
        bool ok = true;
        for (const auto& g : gb) {
            const Exponent& e = g.leading_exponent();
            bool inside = true;
            for (std::size_t i = 0; i < arity; ++i)
                if (e[i] && !(mask & (1u << i))) inside = false;
            if (inside) {
                ok = false;
                break;
            }
        }
        if (ok) best = std::max(best, __builtin_popcount(mask));
    }
    return best;
}

inline std::vector<MultiPoly> monomials_of_degree(std::size_t arity, int d) {
    std::vector<MultiPoly> out;
    Exponent e(arity, 0);
    std::function<void(std::size_t, int)> rec = [&](std::size_t i, int left) {
        if (i + 1 == arity) {
            e[i] = left;
            out.push_back(MultiPoly::monomial(e, 1));
            return;
        }
        for (int k = left; k >= 0; --k) {
            e[i] = k;
            rec(i + 1, left - k);
        }
        e[i] = 0;
    };
    if (arity == 0) return out;
    rec(0, d);
    return out;
}

inline MultiPoly truncate_degree(const MultiPoly& p, int n) {
    MultiPoly r(p.arity());
    for (const auto& [e, c] : p.terms())
        if (exponent_degree(e) < n) r.add_term(e, c);
    return r;
}

struct LocalQuotient {
    std::optional<std::size_t> dimension;  // nullopt: not stabilized (treated as infinite)
    std::vector<MultiPoly> basis;          // Groebner basis of I + m^N
    int truncation = 0;
    std::vector<std::size_t> history;
};

// Local quotient at the origin: dim R/(I + m^N) is non-decreasing in N and,
// by Nakayama, constant from the first N where two consecutive values agree.
// With a known bound on the finite value, exceeding it proves the quotient infinite.
inline LocalQuotient local_quotient(const std::vector<MultiPoly>& gens, std::size_t arity,
                                    const GroebnerOptions& opt = {},
                                    std::optional<std::size_t> bound = std::nullopt) {
    LocalQuotient out;
    std::optional<std::size_t> prev;
    std::vector<MultiPoly> prev_basis;
    for (int N = 1; N <= opt.local_max_truncation + 1; ++N) {
        std::vector<MultiPoly> g;
        for (const auto& p : gens) {
            MultiPoly t = truncate_degree(p, N);
            if (!t.is_zero()) g.push_back(t);
        }
        for (auto& m : monomials_of_degree(arity, N)) g.push_back(m);
        auto gb = groebner_grlex(g, arity, opt);
        auto sm = standard_monomials(gb, arity);
        std::size_t d = sm ? sm->size() : 0;
        out.history.push_back(d);
        if (bound && d > *bound) {
            out.basis = gb;
            out.truncation = N;
            return out;
        }
        if (prev && *prev == d) {
            out.dimension = d;
            out.basis = prev_basis;
            out.truncation = N - 1;
            return out;
        }
        prev = d;
        prev_basis = gb;
    }
    out.basis = prev_basis;
    out.truncation = opt.local_max_truncation;
    return out;
}

inline PolyIdeal groebner_basis(const PolyIdeal& ideal, const GroebnerOptions& opt = {}) {
    PolyIdeal out;
    out.arity = ideal.arity;
    out.order = ideal.order;
    if (ideal.order == MonomialOrder::Grlex) {
        out.generators = groebner_grlex(ideal.generators, ideal.arity, opt);
    } else {
        require(ideal.arity <= opt.max_arity, ErrorKind::TooLarge, "Groebner arity cap exceeded");
        auto lq = local_quotient(ideal.generators, ideal.arity, opt);
        out.generators = lq.basis;
        out.truncation = lq.dimension ? lq.truncation : -1;
    }
    return out;
}

// Dimension of R/I (grlex) or of the local quotient at 0; nullopt means infinite.
inline std::optional<std::size_t> quotient_dimension(const PolyIdeal& basis) {
    if (basis.order == MonomialOrder::Local && basis.truncation < 0) return std::nullopt;
    auto sm = standard_monomials(basis.generators, basis.arity);
    if (!sm) return std::nullopt;
    return sm->size();
}

// Coordinates of the normal form of p on the standard monomial basis.
inline std::vector<Q> quotient_coordinates(const MultiPoly& p, const std::vector<MultiPoly>& gb,
                                           const std::vector<Exponent>& basis) {
    MultiPoly r = normal_form(p, gb);
    std::vector<Q> v(basis.size(), 0);
    for (std::size_t i = 0; i < basis.size(); ++i) v[i] = r.coefficient(basis[i]);
    return v;
}

// Monic univariate element of a zero-dimensional ideal in variable v, as a
// coefficient list (lowest degree first).
inline std::vector<Q> eliminant(const std::vector<MultiPoly>& gb, std::size_t arity, std::size_t v) {
    auto sm = standard_monomials(gb, arity);
    require(sm.has_value(), ErrorKind::PositiveDimensional, "ideal is not zero-dimensional");
    const auto& basis = *sm;
    std::vector<std::vector<Q>> cols;
    MultiPoly x = MultiPoly::variable(arity, v);
    MultiPoly pw = MultiPoly::constant(arity, 1);
    for (std::size_t k = 0; k <= basis.size(); ++k) {
        cols.push_back(quotient_coordinates(pw, gb, basis));
        QMatrix a(basis.size(), std::vector<Q>(cols.size()));
        for (std::size_t i = 0; i < basis.size(); ++i)
            for (std::size_t j = 0; j < cols.size(); ++j) a[i][j] = cols[j][i];
        auto ker = kernel_basis(a, cols.size());
        if (!ker.empty()) {
            std::vector<Q> c = ker[0];
            Q lead = c.back();
            for (auto& ci : c) ci /= lead;
            return c;
        }
        pw = pw * x;
    }
    throw Error(ErrorKind::PositiveDimensional, "no eliminant found");
}

}  // namespace feynpar
