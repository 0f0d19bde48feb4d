#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "feynpar/graph.hpp"
#include "feynpar/graph_polynomials.hpp"
#include "feynpar/slicing.hpp"

namespace feynpar {

struct InvariantCheck {
    std::string name;
    bool ok = false;
    std::string detail;
    bool skipped = false;
};

// Two-leg label of g, if its legs fit the two-leg shorthand.
inline std::optional<std::string> two_leg_label(const FeynmanGraph& g) {
    try {
        resolve_momenta(g, MomentumData::two_leg_symbolic());
    } catch (const Error&) {
        return std::nullopt;
    }
    for (const auto& l : g.legs) {
        auto s = parse_momentum_label(l.momentum);
        if (s.sign != 0) return s.label;
    }
    return std::nullopt;
}

// Gram data for a two-leg graph with p^2 = p2.
inline std::optional<MomentumData> two_leg_gram(const FeynmanGraph& g, const Q& p2) {
    auto label = two_leg_label(g);
    if (!label) return std::nullopt;
    return MomentumData::from_gram({*label}, {{p2}});
}

inline std::vector<Q> random_positive_point(std::size_t n, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(1, 97), den(1, 13);
    std::vector<Q> t;
    for (std::size_t i = 0; i < n; ++i) {
        Q q(num(rng), den(rng));
        q.canonicalize();
        t.push_back(q);
    }
    return t;
}

// The exact identities every graph polynomial satisfies. `gram` supplies the
// momenta for the quadratic-form check; two-leg graphs fall back to p^2 = 1.
inline std::vector<InvariantCheck> exact_invariants(const FeynmanGraph& g, std::optional<MomentumData> gram = std::nullopt,
                                                    std::uint64_t seed = 1, int points = 20) {
    std::vector<InvariantCheck> out;
    std::size_t n = g.n_edges();
    int loops = loop_number(g);
    MultiPoly psi = psi_polynomial(g, PsiMethod::Det);
    MultiPoly psi_t = psi_polynomial(g, PsiMethod::Trees);
    out.push_back({"psi_det_equals_trees", psi == psi_t, "", false});
    out.push_back({"degree_is_loop_number", psi.total_degree() == loops && psi.is_homogeneous(),
                   "deg " + std::to_string(psi.total_degree()) + ", loops " + std::to_string(loops), false});
    bool ml = true;
    for (std::size_t e = 0; e < n; ++e) ml = ml && psi.degree_in(e) <= 1;
    out.push_back({"multilinear", ml, "", false});
    auto sl = singular_locus_system(g);
    bool del = true;
    std::string bad;
    for (std::size_t e = 0; e < n; ++e)
        if (!sl.matches_deletion[e]) {
            del = false;
            bad += g.edges[e].id + " ";
        }
    out.push_back({"derivative_is_deletion", del, bad, false});
    MultiPoly euler(n);
    for (std::size_t e = 0; e < n; ++e) euler += MultiPoly::variable(n, e) * psi.derivative(e);
    out.push_back({"euler_identity", euler == psi * Q(loops), "", false});

    if (two_leg_label(g)) {
        auto sym = MomentumData::two_leg_symbolic();
        bool eq = second_symanzik(g, sym, SymanzikMethod::CutSets) == second_symanzik(g, sym, SymanzikMethod::Trees);
        out.push_back({"cutset_P_equals_tree_P", eq, "two-leg symbolic p^2", false});
    } else {
        out.push_back({"cutset_P_equals_tree_P", true, "not a two-leg graph", true});
    }

    if (!gram) gram = two_leg_gram(g, Q(1));
    if (gram) {
        MultiPoly P = second_symanzik(g, *gram);
        std::mt19937_64 rng(seed);
        bool ok = true;
        int fails = 0;
        for (int i = 0; i < points; ++i) {
            auto t = random_positive_point(n, rng);
            if (psi.eval(t) * r_form_value(g, *gram, t) != P.eval(t)) {
                ok = false;
                ++fails;
            }
        }
        out.push_back({"psi_times_quadratic_form_equals_P", ok,
                       std::to_string(points - fails) + "/" + std::to_string(points) + " points", false});
    } else {
        out.push_back({"psi_times_quadratic_form_equals_P", true, "no momentum data", true});
    }
    return out;
}

}  // namespace feynpar
