#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "feynpar/groebner.hpp"
#include "feynpar/poly.hpp"
#include "feynpar/poly_algebra.hpp"
#include "feynpar/quadrature.hpp"

namespace feynpar {

using Vec = std::vector<double>;
using Frame = std::vector<Vec>;

// Determinant of the square matrix whose columns are `cols`.
inline double det_columns(const Frame& cols) {
    std::size_t n = cols.size();
    if (n == 0) return 1;
    std::vector<Vec> a(n, Vec(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) a[i][j] = cols[j][i];
    double det = 1;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (a[p][c] == 0) return 0;
        if (p != c) {
            std::swap(a[p], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < n; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < n; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return det;
}

// A k-form on R^n, evaluated at a point on k tangent vectors.
struct NumForm {
    std::size_t ambient = 0;
    std::size_t degree = 0;
    std::function<double(const Vec& x, const Frame& v)> eval;
};

// g(t) dt_1 ^ ... ^ dt_n
inline NumForm top_form(std::size_t n, std::function<double(const Vec&)> g) {
    return {n, n, [g](const Vec& x, const Frame& v) { return g(x) * det_columns(v); }};
}

// Contraction of dt_1 ^ ... ^ dt_n with the vector field F.
inline NumForm vector_field_form(std::size_t n, std::function<Vec(const Vec&)> F) {
    return {n, n - 1, [F](const Vec& x, const Frame& v) {
                Frame cols{F(x)};
                cols.insert(cols.end(), v.begin(), v.end());
                return det_columns(cols);
            }};
}

// Delta: contraction with the Euler field E = sum t_i d/dt_i.
inline NumForm euler_contract(const NumForm& a) {
    require(a.degree >= 1, ErrorKind::Precondition, "cannot contract a 0-form");
    auto ev = a.eval;
    return {a.ambient, a.degree - 1, [ev](const Vec& x, const Frame& v) {
                Frame w{x};
                w.insert(w.end(), v.begin(), v.end());
                return ev(x, w);
            }};
}

// df ^ a, with df given by its gradient.
inline NumForm wedge_differential(std::function<Vec(const Vec&)> grad, const NumForm& a) {
    auto ev = a.eval;
    return {a.ambient, a.degree + 1, [grad, ev](const Vec& x, const Frame& v) {
                Vec g = grad(x);
                double s = 0;
                for (std::size_t j = 0; j < v.size(); ++j) {
                    double dfv = 0;
                    for (std::size_t i = 0; i < g.size(); ++i) dfv += g[i] * v[j][i];
                    if (dfv == 0) continue;
                    Frame rest;
                    for (std::size_t k = 0; k < v.size(); ++k)
                        if (k != j) rest.push_back(v[k]);
                    s += (j % 2 ? -1.0 : 1.0) * dfv * ev(x, rest);
                }
                return s;
            }};
}

inline NumForm scaled(const NumForm& a, std::function<double(const Vec&)> s) {
    auto ev = a.eval;
    return {a.ambient, a.degree, [ev, s](const Vec& x, const Frame& v) { return s(x) * ev(x, v); }};
}

// Oriented affine simplex [w_0, ..., w_k] in R^n, with multiplicity.
struct OrientedSimplex {
    std::vector<Vec> vertices;
    double sign = 1;
    std::size_t dim() const { return vertices.size() - 1; }
};
using Chain = std::vector<OrientedSimplex>;

inline Chain boundary(const Chain& c) {
    Chain out;
    for (const auto& s : c) {
        if (s.vertices.size() < 2) continue;
        for (std::size_t i = 0; i < s.vertices.size(); ++i) {
            OrientedSimplex f;
            for (std::size_t j = 0; j < s.vertices.size(); ++j)
                if (j != i) f.vertices.push_back(s.vertices[j]);
            f.sign = s.sign * (i % 2 ? -1.0 : 1.0);
            out.push_back(f);
        }
    }
    return out;
}

// The standard simplex [e_1, ..., e_n]; its orientation makes Delta(omega_n) positive.
inline Chain standard_simplex_chain(std::size_t n) {
    OrientedSimplex s;
    for (std::size_t i = 0; i < n; ++i) {
        Vec e(n, 0.0);
        e[i] = 1;
        s.vertices.push_back(e);
    }
    return {s};
}

// [a, b]^2 split into two positively oriented triangles.
inline Chain square_chain(double a, double b) {
    return {OrientedSimplex{{{a, a}, {b, a}, {b, b}}, 1}, OrientedSimplex{{{a, a}, {b, b}, {a, b}}, 1}};
}

inline QuadratureResult integrate_form(const NumForm& form, const Chain& chain, const QuadOptions& opt = {}) {
    QuadratureResult total;
    total.seed = opt.seed;
    for (const auto& s : chain) {
        require(s.dim() == form.degree, ErrorKind::Precondition, "form degree differs from chain dimension");
        std::size_t k = s.dim(), n = form.ambient;
        Frame tangents;
        for (std::size_t a = 1; a <= k; ++a) {
            Vec t(n);
            for (std::size_t i = 0; i < n; ++i) t[i] = s.vertices[a][i] - s.vertices[0][i];
            tangents.push_back(t);
        }
        Vec x(n);
        auto fn = [&](const double* u, double* out) {
            for (std::size_t i = 0; i < n; ++i) {
                x[i] = s.vertices[0][i];
                for (std::size_t a = 0; a < k; ++a) x[i] += u[a] * tangents[a][i];
            }
            out[0] = form.eval(x, tangents);
        };
        auto r = integrate_parameter_simplex(fn, k, 1, opt);
        total.value += s.sign * r.values[0];
        total.error += r.errors[0];
        total.evals += r.evals;
        total.converged = total.converged && r.converged;
    }
    return total;
}

// ---------------------------------------------------------------- exact helpers

inline MultiPoly divergence(const std::vector<MultiPoly>& F) {
    MultiPoly d(F.empty() ? 0 : F[0].arity());
    for (std::size_t i = 0; i < F.size(); ++i) d += F[i].derivative(i);
    return d;
}

inline std::function<Vec(const Vec&)> compiled_field(const std::vector<MultiPoly>& F) {
    auto comp = std::make_shared<std::vector<CompiledPoly>>();
    for (const auto& p : F) comp->emplace_back(p);
    return [comp](const Vec& x) {
        Vec out;
        for (const auto& c : *comp) out.push_back(c(x));
        return out;
    };
}

inline std::function<Vec(const Vec&)> compiled_gradient(const MultiPoly& f) {
    std::vector<MultiPoly> g;
    for (std::size_t i = 0; i < f.arity(); ++i) g.push_back(f.derivative(i));
    return compiled_field(g);
}

// Divergence-free polynomial field F, homogeneous of degree deg g + 1, with
// sum_i F_i = g * (t_1 + ... + t_n). With `facet_divisible`, F_i restricted to
// {t_i = 0} is also required to be divisible by the product of the other t_j,
// which keeps boundary integrands bounded near the simplex corners.
inline std::optional<std::vector<MultiPoly>> divergence_free_lift(const MultiPoly& g, bool facet_divisible = true) {
    std::size_t n = g.arity();
    require(g.is_homogeneous() && !g.is_zero(), ErrorKind::Precondition, "lift needs a nonzero homogeneous polynomial");
    int d = g.total_degree() + 1;
    auto monos = monomials_of_degree(n, d);
    auto lower = monomials_of_degree(n, d - 1);
    std::size_t M = monos.size(), unknowns = n * M;
    auto col = [&](std::size_t comp, std::size_t mono) { return comp * M + mono; };
    auto index_of = [&](const std::vector<MultiPoly>& list, const Exponent& e) {
        for (std::size_t i = 0; i < list.size(); ++i)
            if (list[i].leading_exponent() == e) return i;
        return list.size();
    };
    QMatrix a;
    std::vector<Q> b;
    MultiPoly s(n);
    for (std::size_t i = 0; i < n; ++i) s += MultiPoly::variable(n, i);
    MultiPoly target = g * s;
    for (std::size_t j = 0; j < M; ++j) {
        std::vector<Q> row(unknowns, 0);
        for (std::size_t i = 0; i < n; ++i) row[col(i, j)] = 1;
        a.push_back(row);
        b.push_back(target.coefficient(monos[j].leading_exponent()));
    }
    for (std::size_t r = 0; r < lower.size(); ++r) {
        std::vector<Q> row(unknowns, 0);
        const Exponent& e = lower[r].leading_exponent();
        for (std::size_t i = 0; i < n; ++i) {
            Exponent up = e;
            up[i] += 1;
            std::size_t j = index_of(monos, up);
            if (j < M) row[col(i, j)] = up[i];
        }
        a.push_back(row);
        b.push_back(0);
    }
    if (facet_divisible) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < M; ++j) {
                const Exponent& e = monos[j].leading_exponent();
                if (e[i] != 0) continue;
                bool missing = false;
                for (std::size_t k = 0; k < n; ++k)
                    if (k != i && e[k] == 0) missing = true;
                if (!missing) continue;
                std::vector<Q> row(unknowns, 0);
                row[col(i, j)] = 1;
                a.push_back(row);
                b.push_back(0);
            }
    }
    auto sol = solve_linear(a, b, unknowns);
    if (!sol) {
        if (facet_divisible) return divergence_free_lift(g, false);
        return std::nullopt;
    }
    std::vector<MultiPoly> F(n, MultiPoly(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < M; ++j)
            if ((*sol)[col(i, j)] != 0) F[i].add_term(monos[j].leading_exponent(), (*sol)[col(i, j)]);
    return F;
}

}  // namespace feynpar
