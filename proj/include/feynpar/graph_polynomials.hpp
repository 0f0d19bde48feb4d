#pragma once

#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "feynpar/graph.hpp"
#include "feynpar/poly.hpp"
#include "feynpar/poly_algebra.hpp"

namespace feynpar {

inline PolyMatrix kirchhoff_matrix(const FeynmanGraph& g) {
    auto eta = circuit_matrix(g);
    std::size_t n = g.n_edges();
    std::size_t l = eta.empty() ? 0 : eta[0].size();
    PolyMatrix m(l, std::vector<MultiPoly>(l, MultiPoly(n)));
    for (std::size_t e = 0; e < n; ++e) {
        MultiPoly t = MultiPoly::variable(n, e);
        for (std::size_t a = 0; a < l; ++a)
            for (std::size_t b = 0; b < l; ++b)
                if (eta[e][a] && eta[e][b]) m[a][b] += t * Q(eta[e][a] * eta[e][b]);
    }
    return m;
}

enum class PsiMethod { Det, Trees };

inline MultiPoly complement_monomial(std::size_t n, const EdgeSet& in) {
    Exponent e(n, 1);
    for (auto i : in) e[i] = 0;
    return MultiPoly::monomial(e, 1);
}

inline MultiPoly psi_polynomial(const FeynmanGraph& g, PsiMethod method = PsiMethod::Det) {
    std::size_t n = g.n_edges();
    if (method == PsiMethod::Det) return det_polynomial(kirchhoff_matrix(g), n);
    MultiPoly psi(n);
    for (const auto& t : spanning_trees(g)) psi += complement_monomial(n, t);
    return psi;
}

// External momentum configuration.
struct MomentumData {
    enum class Mode { TwoLeg, Gram };
    Mode mode = Mode::TwoLeg;
    std::optional<Q> p2;  // two-leg: numeric p^2; absent means symbolic (extra last variable)
    std::vector<std::string> labels;
    QMatrix gram;
    Q mass2 = 0;
    int physical_dimension = 4;

    static MomentumData two_leg_symbolic() { return {}; }
    static MomentumData two_leg(const Q& p2v) {
        MomentumData m;
        m.p2 = p2v;
        return m;
    }
    static MomentumData from_gram(std::vector<std::string> labels, QMatrix gram) {
        MomentumData m;
        m.mode = Mode::Gram;
        m.labels = std::move(labels);
        m.gram = std::move(gram);
        return m;
    }
    bool symbolic() const { return mode == Mode::TwoLeg && !p2; }
};

// Per-vertex incoming momenta as coefficient vectors over labels, with the Gram form.
struct ResolvedMomenta {
    std::vector<std::string> labels;
    std::vector<std::vector<Q>> vertex;  // |V| x |labels|
    QMatrix gram;                        // unused entries when symbolic
    bool symbolic = false;
    std::size_t leg_vertex1 = 0, leg_vertex2 = 0;  // two-leg mode only
};

inline ResolvedMomenta resolve_momenta(const FeynmanGraph& g, const MomentumData& mom) {
    ResolvedMomenta r;
    std::size_t nv = g.n_vertices();
    if (mom.mode == MomentumData::Mode::TwoLeg) {
        r.labels = {"p"};
        r.symbolic = !mom.p2.has_value();
        r.gram = {{mom.p2.value_or(Q(1))}};
        r.vertex.assign(nv, std::vector<Q>(1, 0));
        std::vector<std::pair<std::size_t, int>> carrying;
        std::string label;
        for (const auto& leg : g.legs) {
            auto sl = parse_momentum_label(leg.momentum);
            if (sl.sign == 0) continue;
            if (label.empty()) label = sl.label;
            require(sl.label == label, ErrorKind::BadLegConfiguration,
                    "two-leg mode needs a single momentum label, found '" + label + "' and '" + sl.label + "'");
            carrying.emplace_back(g.vertex_index(leg.vertex), sl.sign);
        }
        if (carrying.empty()) return r;
        require(carrying.size() == 2, ErrorKind::BadLegConfiguration,
                "two-leg mode needs exactly two legs carrying momentum");
        require(carrying[0].second == -carrying[1].second, ErrorKind::MomentumNotConserved,
                "the two legs must carry opposite momenta");
        for (auto [v, s] : carrying) r.vertex[v][0] += s;
        r.leg_vertex1 = carrying[0].first;
        r.leg_vertex2 = carrying[1].first;
        return r;
    }
    std::size_t k = mom.labels.size();
    require(mom.gram.size() == k, ErrorKind::Parse, "Gram matrix size differs from label count");
    for (std::size_t i = 0; i < k; ++i) {
        require(mom.gram[i].size() == k, ErrorKind::Parse, "Gram matrix is not square");
        for (std::size_t j = 0; j < k; ++j)
            require(mom.gram[i][j] == mom.gram[j][i], ErrorKind::Parse, "Gram matrix is not symmetric");
    }
    r.labels = mom.labels;
    r.gram = mom.gram;
    r.vertex.assign(nv, std::vector<Q>(k, 0));
    std::vector<Q> total(k, 0);
    for (const auto& leg : g.legs) {
        auto sl = parse_momentum_label(leg.momentum);
        if (sl.sign == 0) continue;
        std::size_t idx = k;
        for (std::size_t i = 0; i < k; ++i)
            if (mom.labels[i] == sl.label) idx = i;
        require(idx < k, ErrorKind::Parse, "momentum label '" + sl.label + "' missing from the Gram data");
        r.vertex[g.vertex_index(leg.vertex)][idx] += sl.sign;
        total[idx] += sl.sign;
    }
    for (std::size_t i = 0; i < k; ++i) {
        Q s = 0;
        for (std::size_t j = 0; j < k; ++j) s += mom.gram[i][j] * total[j];
        require(s == 0, ErrorKind::MomentumNotConserved, "external momenta do not sum to zero");
    }
    return r;
}

inline Q gram_form(const QMatrix& g, const std::vector<Q>& a, const std::vector<Q>& b) {
    Q s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (std::size_t j = 0; j < b.size(); ++j)
            if (b[j] != 0) s += a[i] * g[i][j] * b[j];
    }
    return s;
}

inline std::size_t symanzik_arity(const FeynmanGraph& g, const ResolvedMomenta& r) {
    return g.n_edges() + (r.symbolic ? 1 : 0);
}

// s_C as a polynomial in the coefficient ring (constant, or a multiple of the p^2 variable).
inline MultiPoly cut_coefficient(const FeynmanGraph& g, const ResolvedMomenta& r,
                                 const std::vector<std::size_t>& side1) {
    std::size_t arity = symanzik_arity(g, r);
    std::vector<Q> c(r.labels.size(), 0);
    for (auto v : side1)
        for (std::size_t i = 0; i < c.size(); ++i) c[i] += r.vertex[v][i];
    if (r.symbolic) return MultiPoly::variable(arity, arity - 1) * (c[0] * c[0]);
    return MultiPoly::constant(arity, gram_form(r.gram, c, c));
}

enum class SymanzikMethod { CutSets, Trees };

// Second Symanzik polynomial. With symbolic p^2 the result has arity n+1 with p^2 last.
inline MultiPoly second_symanzik(const FeynmanGraph& g, const MomentumData& mom,
                                 SymanzikMethod method = SymanzikMethod::CutSets) {
    ResolvedMomenta r = resolve_momenta(g, mom);
    std::size_t n = g.n_edges(), arity = symanzik_arity(g, r);
    auto edge_monomial = [&](const EdgeSet& c) {
        Exponent e(arity, 0);
        for (auto i : c) e[i] = 1;
        return MultiPoly::monomial(e, 1);
    };
    MultiPoly p(arity);
    if (method == SymanzikMethod::CutSets) {
        for (const auto& c : cut_sets(g)) {
            MultiPoly s = cut_coefficient(g, r, c.side1);
            if (!s.is_zero()) p += s * edge_monomial(c.edges);
        }
        return p;
    }
    // Pairs (T, e' in T) give C = T^c + e'; distinct pairs can give the same C, so deduplicate.
    auto ep = edge_endpoints(g);
    std::set<EdgeSet> seen;
    for (const auto& t : spanning_trees(g)) {
        for (auto e1 : t) {
            EdgeSet c;
            std::vector<bool> in(n, false);
            for (auto e : t) in[e] = true;
            for (std::size_t e = 0; e < n; ++e)
                if (!in[e] || e == e1) c.push_back(e);
            if (!seen.insert(c).second) continue;
            UnionFind uf(g.n_vertices());
            for (auto e : t)
                if (e != e1) uf.unite(ep[e].first, ep[e].second);
            std::vector<std::size_t> side1;
            for (std::size_t v = 0; v < g.n_vertices(); ++v)
                if (uf.find(v) == uf.find(0)) side1.push_back(v);
            MultiPoly s = cut_coefficient(g, r, side1);
            if (!s.is_zero()) p += s * edge_monomial(c);
        }
    }
    return p;
}

// L_T(t) = p^2 * sum of t_e over the tree path joining the two leg vertices (p^2 = 1 when symbolic).
inline MultiPoly tree_path_linear_form(const FeynmanGraph& g, const EdgeSet& tree, std::size_t v1, std::size_t v2,
                                       const Q& p2 = 1) {
    MultiPoly l(g.n_edges());
    if (v1 == v2) return l;
    for (auto [e, s] : tree_path(g, tree, v1, v2)) l += MultiPoly::variable(g.n_edges(), e) * p2;
    return l;
}

// Literal tree formula p^2 sum_T L_T(t) prod_{e not in T} t_e for two legs.
inline MultiPoly tree_path_sum(const FeynmanGraph& g, std::size_t v1, std::size_t v2) {
    MultiPoly s(g.n_edges());
    for (const auto& t : spanning_trees(g)) s += tree_path_linear_form(g, t, v1, v2) * complement_monomial(g.n_edges(), t);
    return s;
}

inline MultiPoly psi_lifted(const FeynmanGraph& g, std::size_t arity) {
    MultiPoly psi = psi_polynomial(g);
    if (arity == psi.arity()) return psi;
    std::vector<std::size_t> map(psi.arity());
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = i;
    return psi.embed(arity, map);
}

struct VFunction {
    MultiPoly numerator;               // P + m^2 Psi, valid on the simplex
    MultiPoly denominator;             // Psi
    MultiPoly homogeneous_numerator;   // P + m^2 Psi * (sum t), homogeneous of degree l+1
};

inline VFunction v_function(const FeynmanGraph& g, const MomentumData& mom) {
    MultiPoly p = second_symanzik(g, mom);
    MultiPoly psi = psi_lifted(g, p.arity());
    VFunction v{p, psi, p};
    if (mom.mass2 != 0) {
        MultiPoly sum(p.arity());
        for (std::size_t e = 0; e < g.n_edges(); ++e) sum += MultiPoly::variable(p.arity(), e);
        v.numerator += psi * mom.mass2;
        v.homogeneous_numerator += psi * sum * mom.mass2;
    }
    return v;
}

// p^T R(t) p at rational t via the reduced vertex matrix with conductances 1/t_e.
inline Q r_form_value(const FeynmanGraph& g, const MomentumData& mom, const std::vector<Q>& t) {
    ResolvedMomenta r = resolve_momenta(g, mom);
    require(!r.symbolic, ErrorKind::Precondition, "quadratic form needs numeric momenta");
    require(t.size() == g.n_edges(), ErrorKind::ArityMismatch, "one parameter per edge expected");
    std::size_t nv = g.n_vertices();
    if (nv <= 1) return 0;
    auto ep = edge_endpoints(g);
    std::size_t k = nv - 1;
    QMatrix d(k, std::vector<Q>(k, 0));
    for (std::size_t e = 0; e < ep.size(); ++e) {
        auto [a, b] = ep[e];
        if (a == b) continue;
        require(t[e] != 0, ErrorKind::SingularAtPoint, "edge parameter is zero");
        Q c = Q(1) / t[e];
        if (a < k) d[a][a] += c;
        if (b < k) d[b][b] += c;
        if (a < k && b < k) {
            d[a][b] -= c;
            d[b][a] -= c;
        }
    }
    auto inv = invert(d);
    require(inv.has_value(), ErrorKind::SingularAtPoint, "reduced vertex matrix is singular");
    Q s = 0;
    for (std::size_t v = 0; v < k; ++v)
        for (std::size_t w = 0; w < k; ++w) {
            if ((*inv)[v][w] == 0) continue;
            s += (*inv)[v][w] * gram_form(r.gram, r.vertex[v], r.vertex[w]);
        }
    return s;
}

struct GenericCertificate {
    bool holds = false;
    std::string reason;
    std::vector<std::string> checks;
};

inline GenericCertificate generic_condition(const FeynmanGraph& g, const MomentumData& mom, std::uint64_t seed = 1) {
    GenericCertificate cert;
    MultiPoly p = second_symanzik(g, mom);
    if (p.is_zero()) {
        cert.reason = "P vanishes";
        cert.checks.push_back("P == 0");
        return cert;
    }
    MultiPoly psi = psi_lifted(g, p.arity());
    auto gd = gcd_divides(psi, p);
    cert.holds = gd.gcd.is_constant();
    cert.checks.push_back(std::string(mom.symbolic() ? "symbolic p^2" : "given momenta") + ": gcd = " +
                          gd.gcd.to_string());
    if (!cert.holds) {
        cert.reason = "common factor " + gd.gcd.to_string();
        return cert;
    }
    if (mom.mode == MomentumData::Mode::Gram) {
        ResolvedMomenta r = resolve_momenta(g, mom);
        std::size_t k = r.labels.size();
        // Perturbations preserve conservation: B = Q S Q with Q projecting off the total vector.
        std::vector<Q> ctot(k, 0);
        for (const auto& row : r.vertex)
            for (std::size_t i = 0; i < k; ++i) ctot[i] += row[i];
        Q cc = 0;
        for (auto& x : ctot) cc += x * x;
        QMatrix proj(k, std::vector<Q>(k, 0));
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = 0; j < k; ++j)
                proj[i][j] = (i == j ? Q(1) : Q(0)) - (cc == 0 ? Q(0) : ctot[i] * ctot[j] / cc);
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> num(-9, 9);
        for (int trial = 0; trial < 8; ++trial) {
            QMatrix s(k, std::vector<Q>(k, 0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = i; j < k; ++j) s[i][j] = s[j][i] = Q(num(rng)) / 7;
            QMatrix b(k, std::vector<Q>(k, 0)), pb(k, std::vector<Q>(k, 0));
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t l = 0; l < k; ++l) pb[i][j] += proj[i][l] * s[l][j];
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    for (std::size_t l = 0; l < k; ++l) b[i][j] += pb[i][l] * proj[l][j];
            MomentumData pm = mom;
            for (std::size_t i = 0; i < k; ++i)
                for (std::size_t j = 0; j < k; ++j) pm.gram[i][j] += b[i][j];
            MultiPoly pp = second_symanzik(g, pm);
            bool ok = !pp.is_zero() && poly_gcd(psi, pp).is_constant();
            cert.checks.push_back("perturbation " + std::to_string(trial + 1) + ": " + (ok ? "coprime" : "common factor"));
            if (!ok) {
                cert.holds = false;
                cert.reason = "perturbed momenta share a factor with Psi";
                return cert;
            }
        }
    }
    cert.reason = "Psi and P coprime";
    return cert;
}

}  // namespace feynpar
