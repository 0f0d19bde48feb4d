#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "feynpar/graph.hpp"
#include "feynpar/graph_polynomials.hpp"
#include "feynpar/groebner.hpp"
#include "feynpar/univariate.hpp"

namespace feynpar {

inline constexpr std::size_t kMaxSliceVariables = 3;

struct LinearSlice {
    std::size_t ambient = 0;
    std::size_t dim = 0;
    QMatrix basis;    // dim x ambient, rows span the slice
    QMatrix normals;  // (ambient - dim) x ambient
    std::uint64_t seed = 0;
};

namespace detail {

// Scale a rational vector to a primitive integer vector with positive first nonzero entry.
inline std::vector<Q> primitive_integer(std::vector<Q> v) {
    mpz_class l = 1, g = 0;
    for (const auto& x : v)
        if (x != 0) l = lcm(l, mpz_class(x.get_den()));
    for (auto& x : v) {
        x *= l;
        if (x != 0) g = gcd(g, mpz_class(x.get_num()));
    }
    if (g == 0) return v;
    Q sign = 1;
    for (const auto& x : v)
        if (x != 0) {
            sign = x < 0 ? -1 : 1;
            break;
        }
    for (auto& x : v) x = x * sign / Q(g);
    return v;
}

}  // namespace detail

inline LinearSlice make_slice(std::size_t n, std::size_t k, std::uint64_t seed) {
    require(k >= 1 && k <= n, ErrorKind::Precondition,
            [&] { return "slice dimension " + std::to_string(k) + " must lie in [1, " + std::to_string(n) + "]"; });
    LinearSlice s;
    s.ambient = n;
    s.dim = k;
    s.seed = seed;
    if (k == n) {
        s.basis.assign(n, std::vector<Q>(n, 0));
        for (std::size_t i = 0; i < n; ++i) s.basis[i][i] = 1;
        return s;
    }
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> dist(-9, 9);
    for (int attempt = 0; attempt < 64; ++attempt) {
        QMatrix xi(n - k, std::vector<Q>(n));
        for (auto& row : xi)
            for (auto& x : row) x = dist(rng);
        if (matrix_rank(xi) != n - k) continue;
        QMatrix ker = kernel_basis(xi, n);
        if (ker.size() != k) continue;
        s.normals = xi;
        for (auto& v : ker) s.basis.push_back(detail::primitive_integer(v));
        return s;
    }
    throw Error(ErrorKind::CannotGenerate, "no full-rank normal matrix after 64 attempts");
}

// Slice from explicit normals (basis completed by kernel computation).
inline LinearSlice slice_from_normals(std::size_t n, const QMatrix& normals, std::uint64_t seed = 0) {
    for (const auto& r : normals) require(r.size() == n, ErrorKind::ArityMismatch, "normal vector length differs from ambient arity");
    require(matrix_rank(normals) == normals.size(), ErrorKind::Precondition, "normal vectors are dependent");
    LinearSlice s;
    s.ambient = n;
    s.normals = normals;
    s.seed = seed;
    for (auto& v : kernel_basis(normals, n)) s.basis.push_back(detail::primitive_integer(v));
    s.dim = s.basis.size();
    require(s.dim >= 1, ErrorKind::Precondition, "slice is the zero subspace");
    return s;
}

inline bool slice_is_consistent(const LinearSlice& s) {
    if (s.basis.size() != s.dim || matrix_rank(s.basis) != s.dim) return false;
    for (const auto& xi : s.normals)
        for (const auto& b : s.basis) {
            Q d = 0;
            for (std::size_t i = 0; i < s.ambient; ++i) d += xi[i] * b[i];
            if (d != 0) return false;
        }
    return true;
}

// t = sum_j u_j basis_j.
inline MultiPoly restrict(const MultiPoly& p, const LinearSlice& s) {
    require(p.arity() == s.ambient, ErrorKind::ArityMismatch,
            [&] { return "polynomial arity " + std::to_string(p.arity()) + " vs slice ambient " + std::to_string(s.ambient); });
    std::vector<MultiPoly> images(s.ambient, MultiPoly(s.dim));
    for (std::size_t i = 0; i < s.ambient; ++i)
        for (std::size_t j = 0; j < s.dim; ++j)
            if (s.basis[j][i] != 0) images[i] += MultiPoly::variable(s.dim, j) * s.basis[j][i];
    return p.substitute(images);
}

struct SingularLocusSystem {
    PolyIdeal ideal;
    std::vector<bool> matches_deletion;  // generator e equals Psi of the graph with e deleted
};

inline SingularLocusSystem singular_locus_system(const FeynmanGraph& g) {
    MultiPoly psi = psi_polynomial(g, PsiMethod::Trees);
    SingularLocusSystem out;
    out.ideal.arity = g.n_edges();
    for (std::size_t e = 0; e < g.n_edges(); ++e) {
        MultiPoly d = psi.derivative(e);
        out.ideal.generators.push_back(d);
        // Deletion keeps all vertices; a disconnected remainder has no spanning trees, so Psi = 0.
        FeynmanGraph del = g;
        del.edges.erase(del.edges.begin() + static_cast<std::ptrdiff_t>(e));
        MultiPoly pd(g.n_edges());
        if (!del.edges.empty() && is_connected(del)) {
            std::vector<std::size_t> map;
            for (std::size_t i = 0; i < g.n_edges(); ++i)
                if (i != e) map.push_back(i);
            pd = psi_polynomial(del, PsiMethod::Trees).embed(g.n_edges(), map);
        } else if (del.edges.empty() && g.vertices.size() == 1) {
            pd = MultiPoly::constant(g.n_edges(), 1);
        }
        out.matches_deletion.push_back(pd == d);
    }
    return out;
}

// ---------------------------------------------------------------- singular points

enum class PointTag { Exact, Numeric };

struct SingularPoint {
    PointTag tag = PointTag::Exact;
    std::vector<Q> exact;       // when tag == Exact
    std::vector<double> approx;  // always filled
    double box_radius = 0;
    bool projective = false;  // representative of a point of the projective slice
    bool cone_origin = false;
};

enum class SingularSearch {
    Auto,        // projective charts for homogeneous input, affine otherwise
    Affine,      // grad f = 0 in affine k-space
    Projective,  // f = grad f = 0 chart by chart, plus the cone origin
};

struct SingularSearchOptions {
    SingularSearch mode = SingularSearch::Auto;
    GroebnerOptions groebner{};
    int newton_starts = 64;
    std::uint64_t seed = 1;
};

namespace detail {

inline std::vector<double> to_doubles(const std::vector<Q>& v) {
    std::vector<double> d;
    for (const auto& x : v) d.push_back(x.get_d());
    return d;
}

inline bool solve_small(std::vector<std::vector<double>> a, std::vector<double>& b) {
    std::size_t n = b.size();
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (std::fabs(a[p][c]) < 1e-300) return false;
        std::swap(a[p], a[c]);
        std::swap(b[p], b[c]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
            b[r] -= f * b[c];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return true;
}

// Solutions of the zero-dimensional system gens = 0 in `arity` variables.
inline std::vector<SingularPoint> solve_zero_dimensional(const std::vector<MultiPoly>& gens, std::size_t arity,
                                                         const GroebnerOptions& opt) {
    std::vector<SingularPoint> out;
    if (arity == 0) {
        bool all_zero = true;
        for (const auto& g : gens)
            if (!g.is_zero()) all_zero = false;
        if (all_zero) out.push_back(SingularPoint{});
        return out;
    }
    auto gb = groebner_grlex(gens, arity, opt);
    if (is_unit_ideal(gb)) return out;
    require(ideal_dimension(gb, arity) == 0, ErrorKind::PositiveDimensional,
            "Jacobian ideal has positive dimension (non-isolated singularities)");
    std::vector<RealRootSet> roots;
    for (std::size_t v = 0; v < arity; ++v) roots.push_back(univariate_real_roots(eliminant(gb, arity, v)));
    // Cartesian product of candidate coordinates.
    std::vector<std::vector<std::pair<bool, std::size_t>>> choices(arity);
    for (std::size_t v = 0; v < arity; ++v) {
        for (std::size_t i = 0; i < roots[v].exact.size(); ++i) choices[v].push_back({true, i});
        for (std::size_t i = 0; i < roots[v].numeric.size(); ++i) choices[v].push_back({false, i});
    }
    std::vector<CompiledPoly> compiled;
    for (const auto& g : gb) compiled.emplace_back(g);
    std::vector<std::size_t> idx(arity, 0);
    while (true) {
        bool empty = false;
        for (std::size_t v = 0; v < arity; ++v)
            if (choices[v].empty()) empty = true;
        if (empty) break;
        bool all_exact = true;
        std::vector<Q> qx(arity);
        std::vector<double> dx(arity);
        for (std::size_t v = 0; v < arity; ++v) {
            auto [ex, i] = choices[v][idx[v]];
            if (ex) {
                qx[v] = roots[v].exact[i];
                dx[v] = qx[v].get_d();
            } else {
                all_exact = false;
                dx[v] = roots[v].numeric[i];
            }
        }
        if (all_exact) {
            bool ok = true;
            for (const auto& g : gb)
                if (g.eval(qx) != 0) {
                    ok = false;
                    break;
                }
            if (ok) {
                SingularPoint p;
                p.exact = qx;
                p.approx = dx;
                out.push_back(p);
            }
        } else {
            double scale = 1, res = 0;
            for (double x : dx) scale = std::max(scale, std::fabs(x));
            for (const auto& c : compiled) res = std::max(res, std::fabs(c(dx)));
            if (res < 1e-7 * std::pow(scale, 4.0)) {
                SingularPoint p;
                p.tag = PointTag::Numeric;
                p.approx = dx;
                p.box_radius = 1e-8 * scale;
                out.push_back(p);
            }
        }
        std::size_t v = 0;
        while (v < arity) {
            if (++idx[v] < choices[v].size()) break;
            idx[v] = 0;
            ++v;
        }
        if (v == arity) break;
    }
    return out;
}

// Multi-start Newton on the square system grad f = 0; rational candidates are verified exactly.
inline std::vector<SingularPoint> newton_fallback(const MultiPoly& f, std::uint64_t seed, int starts) {
    std::size_t k = f.arity();
    std::vector<CompiledPoly> grad;
    std::vector<std::vector<CompiledPoly>> hess(k);
    for (std::size_t i = 0; i < k; ++i) {
        MultiPoly d = f.derivative(i);
        grad.emplace_back(d);
        for (std::size_t j = 0; j < k; ++j) hess[i].emplace_back(d.derivative(j));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-3, 3);
    std::vector<SingularPoint> out;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> x(k);
        for (auto& v : x) v = dist(rng);
        bool conv = false;
        for (int it = 0; it < 100; ++it) {
            std::vector<double> b(k);
            std::vector<std::vector<double>> a(k, std::vector<double>(k));
            double norm = 0;
            for (std::size_t i = 0; i < k; ++i) {
                b[i] = -grad[i](x);
                norm = std::max(norm, std::fabs(b[i]));
                for (std::size_t j = 0; j < k; ++j) a[i][j] = hess[i][j](x);
            }
            if (norm < 1e-13) {
                conv = true;
                break;
            }
            if (!solve_small(a, b)) break;
            for (std::size_t i = 0; i < k; ++i) x[i] += b[i];
        }
        if (!conv) continue;
        SingularPoint p;
        p.approx = x;
        std::vector<Q> q;
        for (double v : x) q.push_back(rational_approximation(v, 10000));
        bool exact = true;
        for (std::size_t i = 0; i < k; ++i)
            if (f.derivative(i).eval(q) != 0) exact = false;
        if (exact) {
            p.exact = q;
            p.approx = to_doubles(q);
        } else {
            p.tag = PointTag::Numeric;
            p.box_radius = 1e-8;
        }
        out.push_back(p);
    }
    return out;
}

inline bool same_point(const SingularPoint& a, const SingularPoint& b) {
    if (a.tag == PointTag::Exact && b.tag == PointTag::Exact) return a.exact == b.exact;
    for (std::size_t i = 0; i < a.approx.size(); ++i)
        if (std::fabs(a.approx[i] - b.approx[i]) > 1e-6 * std::max(1.0, std::fabs(a.approx[i]))) return false;
    return true;
}

inline void canonical_sort(std::vector<SingularPoint>& pts) {
    std::sort(pts.begin(), pts.end(), [](const SingularPoint& a, const SingularPoint& b) {
        if (a.tag != b.tag) return a.tag == PointTag::Exact;
        if (a.tag == PointTag::Exact) return a.exact < b.exact;
        return a.approx < b.approx;
    });
    std::vector<SingularPoint> u;
    for (auto& p : pts)
        if (u.empty() || !same_point(u.back(), p)) u.push_back(p);
    pts = u;
}

}  // namespace detail

inline std::vector<SingularPoint> find_singular_points(const MultiPoly& f, const SingularSearchOptions& opt = {}) {
    std::size_t k = f.arity();
    require(k >= 1 && k <= kMaxSliceVariables, ErrorKind::TooLarge, "singular point search supports 1..3 variables");
    SingularSearch mode = opt.mode;
    if (mode == SingularSearch::Auto)
        mode = f.is_homogeneous() && f.total_degree() >= 1 ? SingularSearch::Projective : SingularSearch::Affine;
    std::vector<SingularPoint> pts;
    if (mode == SingularSearch::Affine) {
        std::vector<MultiPoly> gens;
        for (std::size_t i = 0; i < k; ++i) gens.push_back(f.derivative(i));
        try {
            pts = detail::solve_zero_dimensional(gens, k, opt.groebner);
        } catch (const GroebnerTimeout&) {
            pts = detail::newton_fallback(f, opt.seed, opt.newton_starts);
        }
        detail::canonical_sort(pts);
        return pts;
    }
    require(f.is_homogeneous(), ErrorKind::Precondition, "projective search needs a homogeneous polynomial");
    // Chart u_j = 1; representatives normalized so the last nonzero coordinate is 1.
    for (std::size_t jj = 0; jj < k; ++jj) {
        std::size_t j = k - 1 - jj;
        std::vector<MultiPoly> images;
        std::size_t a = 0;
        for (std::size_t i = 0; i < k; ++i) {
            if (i == j) images.push_back(MultiPoly::constant(k - 1, 1));
            else if (i > j) images.push_back(MultiPoly(k - 1));  // covered by a later chart
            else {
                images.push_back(MultiPoly::variable(k - 1, a++));
            }
        }
        std::vector<MultiPoly> gens{f.substitute(images)};
        for (std::size_t i = 0; i < k; ++i) gens.push_back(f.derivative(i).substitute(images));
        // Coordinates after the chart index vanish; keep only the first j free variables.
        std::vector<MultiPoly> reduced;
        for (auto& g : gens) {
            MultiPoly r(j);
            for (const auto& [e, c] : g.terms()) {
                Exponent ee(j);
                for (std::size_t i = 0; i < j; ++i) ee[i] = e[i];
                r.add_term(ee, c);
            }
            if (!r.is_zero()) reduced.push_back(r);
        }
        std::vector<SingularPoint> chart;
        if (j == 0) {
            if (reduced.empty()) chart.push_back(SingularPoint{});
        } else {
            chart = detail::solve_zero_dimensional(reduced, j, opt.groebner);
        }
        for (auto& p : chart) {
            SingularPoint q;
            q.tag = p.tag;
            q.projective = true;
            q.box_radius = p.box_radius;
            q.approx.assign(k, 0.0);
            if (p.tag == PointTag::Exact) q.exact.assign(k, Q(0));
            for (std::size_t i = 0; i < j; ++i) {
                q.approx[i] = p.approx[i];
                if (p.tag == PointTag::Exact) q.exact[i] = p.exact[i];
            }
            q.approx[j] = 1;
            if (p.tag == PointTag::Exact) q.exact[j] = 1;
            pts.push_back(q);
        }
    }
    detail::canonical_sort(pts);
    if (f.total_degree() >= 2) {
        SingularPoint o;
        o.exact.assign(k, Q(0));
        o.approx.assign(k, 0.0);
        o.cone_origin = true;
        pts.insert(pts.begin(), o);
    }
    return pts;
}

// ---------------------------------------------------------------- Milnor numbers

inline MultiPoly translate_to_origin(const MultiPoly& f, const std::vector<Q>& point) {
    std::size_t k = f.arity();
    std::vector<MultiPoly> images;
    for (std::size_t i = 0; i < k; ++i) images.push_back(MultiPoly::variable(k, i) + MultiPoly::constant(k, point[i]));
    return f.substitute(images);
}

struct LocalJacobian {
    MultiPoly translated;
    LocalQuotient quotient;
    std::optional<std::vector<Exponent>> staircase;
};

inline LocalJacobian local_jacobian(const MultiPoly& f, const std::vector<Q>& point, const GroebnerOptions& opt = {}) {
    require(point.size() == f.arity(), ErrorKind::ArityMismatch, "point dimension differs from polynomial arity");
    LocalJacobian lj;
    lj.translated = translate_to_origin(f, point);
    std::vector<MultiPoly> gens;
    // Bezout: an isolated zero of k equations has multiplicity <= product of their degrees.
    std::size_t bound = 1;
    bool vanishing = false;
    for (std::size_t i = 0; i < f.arity(); ++i) {
        gens.push_back(lj.translated.derivative(i));
        if (gens.back().is_zero()) vanishing = true;
        else bound *= static_cast<std::size_t>(std::max(gens.back().total_degree(), 1));
    }
    if (vanishing) {
        lj.quotient.truncation = -1;  // fewer than k equations: never isolated
        return lj;
    }
    lj.quotient = local_quotient(gens, f.arity(), opt, bound);
    if (lj.quotient.dimension) lj.staircase = standard_monomials(lj.quotient.basis, f.arity());
    return lj;
}

// Local Milnor number; nullopt means infinite.
inline std::optional<std::size_t> milnor_number(const MultiPoly& f, const std::vector<Q>& point,
                                                const GroebnerOptions& opt = {}) {
    require(f.arity() >= 1 && f.arity() <= kMaxSliceVariables, ErrorKind::TooLarge, "Milnor numbers support 1..3 variables");
    require(point.size() == f.arity(), ErrorKind::ArityMismatch, "point dimension differs from polynomial arity");
    for (std::size_t i = 0; i < f.arity(); ++i)
        require(f.derivative(i).eval(point) == 0, ErrorKind::NotSingular, "gradient does not vanish at the point");
    return local_jacobian(f, point, opt).quotient.dimension;
}

// Dehomogenize at a projective point (coordinate `chart` equal to 1) and compute
// the Milnor number of the affine hypersurface germ there.
inline std::optional<std::size_t> projective_milnor_number(const MultiPoly& f, const std::vector<Q>& point,
                                                           const GroebnerOptions& opt = {}) {
    std::size_t k = f.arity();
    require(point.size() == k, ErrorKind::ArityMismatch, "point dimension differs from polynomial arity");
    std::size_t chart = k;
    for (std::size_t i = k; i-- > 0;)
        if (point[i] != 0) {
            chart = i;
            break;
        }
    require(chart < k, ErrorKind::Precondition, "projective point cannot be zero");
    require(f.eval(point) == 0, ErrorKind::NotSingular, "point is not on the hypersurface");
    std::vector<MultiPoly> images;
    std::vector<Q> local;
    std::size_t a = 0;
    for (std::size_t i = 0; i < k; ++i) {
        if (i == chart) images.push_back(MultiPoly::constant(k - 1, 1));
        else {
            images.push_back(MultiPoly::variable(k - 1, a++));
            local.push_back(point[i] / point[chart]);
        }
    }
    MultiPoly fa = f.substitute(images);
    if (k == 1) return fa.is_zero() ? std::nullopt : std::optional<std::size_t>(0);
    return milnor_number(fa, local, opt);
}

struct MilnorPointReport {
    SingularPoint point;
    std::optional<std::size_t> milnor_mu;  // cone origin: affine; projective points: chart germ
};

struct MilnorReport {
    LinearSlice slice;
    MultiPoly restricted;
    std::vector<MilnorPointReport> points;
    std::optional<std::size_t> global_quotient_dim;  // dim C[u]/(grad f), nullopt = infinite
    bool transversal = false;
    std::optional<std::size_t> rerandomized_quotient_dim;
};

inline std::optional<std::size_t> global_jacobian_dimension(const MultiPoly& f, const GroebnerOptions& opt = {}) {
    std::vector<MultiPoly> gens;
    for (std::size_t i = 0; i < f.arity(); ++i) gens.push_back(f.derivative(i));
    auto gb = groebner_grlex(gens, f.arity(), opt);
    auto sm = standard_monomials(gb, f.arity());
    if (!sm) return std::nullopt;
    return sm->size();
}

inline MilnorReport milnor_report(const MultiPoly& p, const LinearSlice& s, const SingularSearchOptions& opt = {}) {
    MilnorReport r;
    r.slice = s;
    r.restricted = restrict(p, s);
    for (const auto& pt : find_singular_points(r.restricted, opt)) {
        MilnorPointReport m;
        m.point = pt;
        if (pt.tag == PointTag::Exact) {
            if (pt.projective) m.milnor_mu = projective_milnor_number(r.restricted, pt.exact, opt.groebner);
            else m.milnor_mu = milnor_number(r.restricted, pt.exact, opt.groebner);
        }
        r.points.push_back(m);
    }
    r.global_quotient_dim = global_jacobian_dimension(r.restricted, opt.groebner);
    LinearSlice s2 = make_slice(s.ambient, s.dim, s.seed ^ 0x9e3779b97f4a7c15ULL);
    r.rerandomized_quotient_dim = global_jacobian_dimension(restrict(p, s2), opt.groebner);
    r.transversal = r.global_quotient_dim.has_value() && r.global_quotient_dim == r.rerandomized_quotient_dim;
    return r;
}

// ---------------------------------------------------------------- Feynman subspace

struct SubspaceResult {
    std::size_t dim = 0;
    std::optional<std::size_t> milnor_mu;
    std::vector<std::string> certificates;  // pivot staircase monomials
    std::vector<int> exponents;            // -k + D l / 2 per requested D
    std::size_t generators = 0;
};

// Rank of the classes of hs in the local Jacobian quotient of f at `point`.
inline SubspaceResult milnor_subspace_rank(const MultiPoly& f, const std::vector<MultiPoly>& hs,
                                           const std::vector<Q>& point, const GroebnerOptions& opt = {}) {
    auto mu = milnor_number(f, point, opt);
    require(mu.has_value(), ErrorKind::PositiveDimensional, "local Jacobian quotient is infinite at the point");
    LocalJacobian lj = local_jacobian(f, point, opt);
    const auto& stair = *lj.staircase;
    SubspaceResult r;
    r.milnor_mu = mu;
    r.generators = hs.size();
    QMatrix rows;
    for (const auto& h : hs) {
        require(h.arity() == f.arity(), ErrorKind::ArityMismatch, "h arity differs from f");
        rows.push_back(quotient_coordinates(translate_to_origin(h, point), lj.quotient.basis, stair));
    }
    if (rows.empty()) return r;
    auto piv = row_reduce(rows);
    r.dim = piv.size();
    auto names = default_names(f.arity(), "u");
    for (auto c : piv) r.certificates.push_back(MultiPoly::monomial(stair[c], 1).to_string(names));
    return r;
}

// Enumerate multisets of size e from {0..m-1}.
inline void for_each_multiset(std::size_t m, int e, const std::function<void(const std::vector<std::size_t>&)>& fn) {
    std::vector<std::size_t> cur;
    std::function<void(std::size_t, int)> rec = [&](std::size_t start, int left) {
        if (left == 0) {
            fn(cur);
            return;
        }
        for (std::size_t i = start; i < m; ++i) {
            cur.push_back(i);
            rec(i, left - 1);
            cur.pop_back();
        }
    };
    rec(0, e);
}

inline SubspaceResult feynman_subspace_dim(const FeynmanGraph& g, const LinearSlice& s, const std::vector<int>& dims,
                                           std::size_t v1, std::size_t v2, const std::vector<Q>& point,
                                           const GroebnerOptions& opt = {}, std::size_t max_products = 20000) {
    require(s.ambient == g.n_edges(), ErrorKind::ArityMismatch, "slice ambient differs from the number of edges");
    int loops = loop_number(g);
    int k = static_cast<int>(s.dim);
    std::vector<int> exps;
    for (int d : dims) {
        require(d > 0 && d % 2 == 0, ErrorKind::OddDimension, "dimension must be even and positive");
        int e = -k + d * loops / 2;
        require(e >= 0, ErrorKind::RegimeViolation,
                [&] { return "k - D l / 2 = " + std::to_string(-e) + " > 0 for D = " + std::to_string(d); });
        exps.push_back(e);
    }
    auto trees = spanning_trees(g);
    std::vector<MultiPoly> factors;
    for (const auto& t : trees)
        factors.push_back(restrict(tree_path_linear_form(g, t, v1, v2) * complement_monomial(g.n_edges(), t), s));
    MultiPoly f = restrict(psi_polynomial(g), s);
    std::vector<MultiPoly> hs;
    std::vector<int> seen;
    for (int e : exps) {
        if (std::find(seen.begin(), seen.end(), e) != seen.end()) continue;
        seen.push_back(e);
        for_each_multiset(factors.size(), e, [&](const std::vector<std::size_t>& ms) {
            require(hs.size() < max_products, ErrorKind::TooLarge, "too many tree products");
            MultiPoly h = MultiPoly::constant(s.dim, 1);
            for (auto i : ms) h *= factors[i];
            hs.push_back(h);
        });
    }
    SubspaceResult r = milnor_subspace_rank(f, hs, point, opt);
    r.exponents = exps;
    return r;
}

}  // namespace feynpar
