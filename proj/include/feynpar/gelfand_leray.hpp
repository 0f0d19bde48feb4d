#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "feynpar/forms.hpp"
#include "feynpar/poly.hpp"
#include "feynpar/univariate.hpp"

namespace feynpar {

// Integration domains in the slice coordinates u_1..u_d.
enum class DomainKind { Simplex, Box, Ball };

struct Domain {
    DomainKind kind = DomainKind::Simplex;
    std::size_t dim = 2;
    double lo = 0, hi = 1;  // box
    double radius = 1;      // ball, centered at the origin

    static Domain simplex(std::size_t d) { return {DomainKind::Simplex, d}; }
    static Domain box(std::size_t d, double lo, double hi) { return {DomainKind::Box, d, lo, hi}; }
    static Domain ball(std::size_t d, double r) { return {DomainKind::Ball, d, 0, 1, r}; }
};

inline const char* domain_name(DomainKind k) {
    switch (k) {
    case DomainKind::Simplex: return "simplex";
    case DomainKind::Box: return "box";
    case DomainKind::Ball: return "ball";
    }
    return "?";
}

// Positively oriented triangulation: the corner simplex, or the Kuhn triangulation of the box.
inline Chain domain_chain(const Domain& dom) {
    std::size_t d = dom.dim;
    require(dom.kind != DomainKind::Ball, ErrorKind::Precondition, "the ball has no simplicial chain");
    if (dom.kind == DomainKind::Simplex) {
        OrientedSimplex s;
        s.vertices.push_back(Vec(d, 0.0));
        for (std::size_t i = 0; i < d; ++i) {
            Vec e(d, 0.0);
            e[i] = 1;
            s.vertices.push_back(e);
        }
        return {s};
    }
    require(dom.hi > dom.lo, ErrorKind::Precondition, "empty box");
    std::vector<std::size_t> perm(d);
    for (std::size_t i = 0; i < d; ++i) perm[i] = i;
    Chain out;
    do {
        OrientedSimplex s;
        Vec v(d, dom.lo);
        s.vertices.push_back(v);
        for (std::size_t i = 0; i < d; ++i) {
            v[perm[i]] = dom.hi;
            s.vertices.push_back(v);
        }
        int inv = 0;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t j = i + 1; j < d; ++j)
                if (perm[i] > perm[j]) ++inv;
        s.sign = inv % 2 ? -1.0 : 1.0;
        out.push_back(s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return out;
}

// t_n = 1 - t_1 - ... - t_{n-1}: the projection chart of the simplex used for
// parametric integrals.
inline MultiPoly dehomogenize_simplex(const MultiPoly& f) {
    std::size_t n = f.arity();
    require(n >= 2, ErrorKind::ArityMismatch, "need at least two variables");
    std::vector<MultiPoly> img;
    MultiPoly last = MultiPoly::constant(n - 1, 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        img.push_back(MultiPoly::variable(n - 1, i));
        last -= MultiPoly::variable(n - 1, i);
    }
    img.push_back(last);
    return f.substitute(img);
}

struct GLOptions {
    double tol = 1e-11;
    unsigned max_depth = 12;
    int richardson_levels = 4;
    double h_rel = 0.1;  // first difference step relative to s
    bool backward_last = false;  // one-sided stencil at the last grid point (grid ends at max f)
};

namespace detail {

// One oriented parameter cell: x(u) = base + sum u_a T_a over a corner simplex,
// or the ball itself (identity map).
struct SublevelCell {
    std::size_t k = 0;
    bool ball = false;
    double radius = 1;
    double sign = 1;
    Vec base;
    Frame tangents;
    std::vector<CompiledPoly> coeff;  // f(x(u)) as a polynomial in u_k, coefficients in u_1..u_{k-1}
    CompiledPoly f_u;
};

inline SublevelCell make_cell(const MultiPoly& f, const OrientedSimplex& s) {
    SublevelCell c;
    c.k = s.dim();
    c.sign = s.sign;
    c.base = s.vertices[0];
    std::size_t n = f.arity();
    for (std::size_t a = 1; a <= c.k; ++a) {
        Vec t(n);
        for (std::size_t i = 0; i < n; ++i) t[i] = s.vertices[a][i] - s.vertices[0][i];
        c.tangents.push_back(t);
    }
    std::size_t k = std::max<std::size_t>(c.k, 1);
    std::vector<MultiPoly> img;
    for (std::size_t i = 0; i < n; ++i) {
        MultiPoly p = MultiPoly::constant(k, Q(c.base[i]));
        for (std::size_t a = 0; a < c.k; ++a)
            if (c.tangents[a][i] != 0) p += MultiPoly::variable(k, a) * MultiPoly::constant(k, Q(c.tangents[a][i]));
        img.push_back(p);
    }
    MultiPoly fu = f.substitute(img);
    c.f_u = CompiledPoly(fu);
    int deg = std::max(fu.total_degree(), 0);
    std::vector<MultiPoly> parts(static_cast<std::size_t>(deg) + 1, MultiPoly(k));
    for (const auto& [e, v] : fu.terms()) {
        Exponent rest = e;
        std::size_t j = static_cast<std::size_t>(rest[k - 1]);
        rest[k - 1] = 0;
        parts[j].add_term(rest, v);
    }
    for (const auto& p : parts) c.coeff.emplace_back(p);
    return c;
}

inline SublevelCell make_ball_cell(const MultiPoly& f, double radius) {
    SublevelCell c;
    c.k = f.arity();
    c.ball = true;
    c.radius = radius;
    c.base = Vec(c.k, 0.0);
    for (std::size_t i = 0; i < c.k; ++i) {
        Vec e(c.k, 0.0);
        e[i] = 1;
        c.tangents.push_back(e);
    }
    c.f_u = CompiledPoly(f);
    int deg = std::max(f.total_degree(), 0);
    std::vector<MultiPoly> parts(static_cast<std::size_t>(deg) + 1, MultiPoly(c.k));
    for (const auto& [e, v] : f.terms()) {
        Exponent rest = e;
        std::size_t j = static_cast<std::size_t>(rest[c.k - 1]);
        rest[c.k - 1] = 0;
        parts[j].add_term(rest, v);
    }
    for (const auto& p : parts) c.coeff.emplace_back(p);
    return c;
}

// Adaptive Gauss-Kronrod 15 whose stopping test stays meaningful on tiny intervals.
template <class F>
double gk_adaptive(F& f, double a, double b, double tol, int depth, double& err) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 15>;
    double e = 0, L1 = 0;
    double v = GK::integrate(f, a, b, 0, 0.0, &e, &L1);
    double scale = 0.5 * (b - a);
    e *= scale;
    if (depth <= 0 || e <= tol * std::max(std::fabs(v), L1) + 1e-15 * L1) {
        err += e;
        return v;
    }
    double m = 0.5 * (a + b);
    return gk_adaptive(f, a, m, tol, depth - 1, err) + gk_adaptive(f, m, b, tol, depth - 1, err);
}

struct SublevelIntegrator {
    const SublevelCell& cell;
    const NumForm& form;
    double s;
    const GLOptions& opt;
    double err = 0;
    Vec u, x;

    double density() {
        for (std::size_t i = 0; i < x.size(); ++i) {
            x[i] = cell.base[i];
            for (std::size_t a = 0; a < cell.k; ++a) x[i] += u[a] * cell.tangents[a][i];
        }
        return form.eval(x, cell.tangents);
    }

    std::pair<double, double> range(std::size_t j) const {
        if (cell.ball) {
            double r2 = cell.radius * cell.radius;
            for (std::size_t i = 0; i < j; ++i) r2 -= u[i] * u[i];
            double r = r2 > 0 ? std::sqrt(r2) : 0;
            return {-r, r};
        }
        double rest = 1;
        for (std::size_t i = 0; i < j; ++i) rest -= u[i];
        return {0, std::max(rest, 0.0)};
    }

    // Piece count along the next level; changes mark kinks of the level-j integrand.
    int signature(std::size_t j, double t) {
        u[j] = t;
        auto [a, b] = range(j + 1);
        if (b <= a) return -1;
        if (j + 2 < cell.k) return static_cast<int>(breakpoints(j + 1).size());
        std::vector<double> c;
        for (const auto& p : cell.coeff) c.push_back(p(u.data()));
        c[0] -= s;
        auto r = real_roots(c, a, b);
        int count = static_cast<int>(r.size());
        u[j + 1] = a;
        return 2 * count + (cell.f_u(u.data()) <= s ? 1 : 0);
    }

    // Kinks of the level-j integrand in the open range, by sampling and bisection.
    std::vector<double> breakpoints(std::size_t j) {
        auto [a, b] = range(j);
        std::vector<double> cuts;
        if (b <= a) return cuts;
        Vec saved = u;
        const int samples = j + 2 < cell.k ? 24 : 48;
        double prev_t = a + (b - a) * 1e-9;
        int prev = signature(j, prev_t);
        for (int i = 1; i <= samples; ++i) {
            double t = i == samples ? b - (b - a) * 1e-9 : a + (b - a) * i / samples;
            int cur = signature(j, t);
            if (cur != prev) {
                double lo = prev_t, hi = t;
                for (int it = 0; it < 60 && hi - lo > 1e-15 * (1 + std::fabs(hi)); ++it) {
                    double m = 0.5 * (lo + hi);
                    if (signature(j, m) == prev) lo = m;
                    else hi = m;
                }
                double m = 0.5 * (lo + hi);
                if (cuts.empty() || m > cuts.back()) cuts.push_back(m);
            }
            prev = cur;
            prev_t = t;
        }
        u = saved;
        return cuts;
    }

    double level(std::size_t j) {
        auto [a, b] = range(j);
        if (b <= a) return 0;
        if (j + 1 < cell.k) {
            std::vector<double> cuts{a};
            for (double c : breakpoints(j))
                if (c > cuts.back()) cuts.push_back(c);
            if (b > cuts.back()) cuts.push_back(b);
            // outer levels of 3-D cells get a looser target; the inner levels carry the accuracy
            bool deep = j + 2 < cell.k;
            boost::math::quadrature::tanh_sinh<double> ts(deep ? 8 : 10);
            double tol = deep ? std::max(opt.tol, 1e-9) : opt.tol;
            double total = 0;
            for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
                if (cuts[i + 1] - cuts[i] <= 1e-13 * (b - a)) continue;
                double e = 0, inner = 0;
                // mapped to [-1, 1] by hand: tiny pieces far from 0 trip the finite-interval path
                double mid = 0.5 * (cuts[i] + cuts[i + 1]), half = 0.5 * (cuts[i + 1] - cuts[i]);
                total += half * ts.integrate(
                                    [&](double x) {
                                        u[j] = std::clamp(mid + half * x, cuts[i], cuts[i + 1]);
                                        double before = err;
                                        double v = level(j + 1);
                                        inner = std::max(inner, err - before);
                                        err = before;
                                        return v;
                                    },
                                    tol, &e);
                e *= half;
                err += e + inner * (cuts[i + 1] - cuts[i]);
            }
            return total;
        }
        // innermost: split at the roots of f - s along u_k
        std::vector<double> c;
        for (const auto& p : cell.coeff) c.push_back(p(u.data()));
        c[0] -= s;
        std::vector<double> cuts{a};
        for (double r : real_roots(c, a, b))
            if (r > cuts.back()) cuts.push_back(r);
        if (b > cuts.back()) cuts.push_back(b);
        double total = 0;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            double lo = cuts[i], hi = cuts[i + 1];
            u[j] = 0.5 * (lo + hi);
            if (cell.f_u(u.data()) > s) continue;
            auto fn = [&](double t) {
                u[j] = t;
                return density();
            };
            total += gk_adaptive(fn, lo, hi, opt.tol, 8, err);
        }
        return total;
    }

    double run() {
        u.assign(std::max<std::size_t>(cell.k, 1), 0.0);
        x.assign(cell.base.size(), 0.0);
        if (cell.k == 0) return cell.f_u(u.data()) <= s ? form.eval(cell.base, {}) : 0.0;
        return level(0);
    }
};

inline QuadratureResult integrate_cells(const std::vector<SublevelCell>& cells, const NumForm& form, double s,
                                        const GLOptions& opt) {
    QuadratureResult r;
    for (const auto& c : cells) {
        SublevelIntegrator it{c, form, s, opt, 0.0, {}, {}};
        r.value += c.sign * it.run();
        r.error += it.err;
    }
    return r;
}

// Circle boundary of the disk, counterclockwise; f(theta) <= s located by sampling and bisection.
inline QuadratureResult circle_sublevel(const MultiPoly& f, double radius, const NumForm& form, double s,
                                        const GLOptions& opt) {
    CompiledPoly fc(f);
    auto point = [&](double th) { return Vec{radius * std::cos(th), radius * std::sin(th)}; };
    auto g = [&](double th) { return fc(point(th)) - s; };
    const int samples = 512;
    const double two_pi = 2 * std::numbers::pi;
    std::vector<double> cuts{0};
    double prev = g(0);
    for (int i = 1; i <= samples; ++i) {
        double th = two_pi * i / samples, cur = g(th);
        if ((prev <= 0) != (cur <= 0)) {
            double a = two_pi * (i - 1) / samples, b = th, ga = prev;
            for (int it = 0; it < 100; ++it) {
                double m = 0.5 * (a + b), gm = g(m);
                if ((gm <= 0) == (ga <= 0)) {
                    a = m;
                    ga = gm;
                } else {
                    b = m;
                }
            }
            cuts.push_back(0.5 * (a + b));
        }
        prev = cur;
    }
    cuts.push_back(two_pi);
    QuadratureResult r;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        double lo = cuts[i], hi = cuts[i + 1];
        if (hi <= lo || g(0.5 * (lo + hi)) > 0) continue;
        double e = 0;
        auto fn = [&](double th) {
            Frame v{{-radius * std::sin(th), radius * std::cos(th)}};
            return form.eval(point(th), v);
        };
        r.value += gk_adaptive(fn, lo, hi, opt.tol, static_cast<int>(opt.max_depth), e);
        r.error += e;
    }
    return r;
}

}  // namespace detail

// Sublevel integrals over the domain or over its oriented boundary, prepared once
// for repeated evaluation at many levels s.
class SublevelIntegral {
public:
    SublevelIntegral(const MultiPoly& f, NumForm form, const Domain& dom, bool on_boundary, GLOptions opt = {})
        : f_(f), form_(std::move(form)), dom_(dom), boundary_(on_boundary), opt_(opt) {
        require(f.arity() == dom.dim, ErrorKind::ArityMismatch, "f arity differs from the domain dimension");
        require(form_.ambient == dom.dim, ErrorKind::ArityMismatch, "form lives in another dimension");
        std::size_t want = on_boundary ? dom.dim - 1 : dom.dim;
        require(form_.degree == want, ErrorKind::Precondition, "form degree must match the integration chain");
        if (dom.dim >= 3) opt_.tol = std::max(opt_.tol, 1e-8);  // nested 3-D quadrature is costly below this
        if (dom.kind == DomainKind::Ball) {
            require(!on_boundary || dom.dim == 2, ErrorKind::Precondition, "ball boundary is supported for the disk only");
            if (!on_boundary) cells_.push_back(detail::make_ball_cell(f, dom.radius));
            return;
        }
        Chain c = domain_chain(dom);
        if (on_boundary) c = boundary(c);
        for (const auto& s : c) cells_.push_back(detail::make_cell(f, s));
    }

    QuadratureResult operator()(double s) const {
        if (boundary_ && dom_.kind == DomainKind::Ball) return detail::circle_sublevel(f_, dom_.radius, form_, s, opt_);
        return detail::integrate_cells(cells_, form_, s, opt_);
    }

private:
    MultiPoly f_;
    NumForm form_;
    Domain dom_;
    bool boundary_;
    GLOptions opt_;
    std::vector<detail::SublevelCell> cells_;
};

struct GLSample {
    double s = 0;
    double value = 0;
    double error = 0;
};

// dA/ds by central (or backward) differences with Richardson extrapolation.
inline GLSample differentiate_sublevel(const SublevelIntegral& A, double s, const GLOptions& opt, bool backward = false) {
    require(s > 0, ErrorKind::Precondition, "level s must be positive");
    int L = std::max(opt.richardson_levels, 2);
    double h = opt.h_rel * s;
    std::vector<std::vector<double>> T(static_cast<std::size_t>(L));
    double qerr = 0;
    QuadratureResult here;
    if (backward) here = A(s);
    for (int i = 0; i < L; ++i) {
        QuadratureResult up = backward ? here : A(s + h), dn = A(s - h);
        double width = backward ? h : 2 * h;
        qerr = std::max(qerr, (up.error + dn.error) / width);
        T[i].push_back((up.value - dn.value) / width);
        double base = backward ? 2 : 4, p = base;
        for (int j = 1; j <= i; ++j, p *= base) T[i].push_back(T[i][j - 1] + (T[i][j - 1] - T[i - 1][j - 1]) / (p - 1));
        h *= 0.5;
    }
    GLSample out;
    out.s = s;
    out.value = T[L - 1][L - 1];
    out.error = std::fabs(T[L - 1][L - 1] - T[L - 2][L - 2]) + qerr;
    return out;
}

// J(s) = d/ds of the integral of alpha (a top form) over {f <= s} in the domain.
inline std::vector<GLSample> gelfand_leray_J(const MultiPoly& f, const NumForm& alpha, const Domain& dom,
                                             const std::vector<double>& grid, const GLOptions& opt = {}) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], ErrorKind::Precondition, "level grid must be increasing");
    SublevelIntegral A(f, alpha, dom, false, opt);
    std::vector<GLSample> out;
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.push_back(differentiate_sublevel(A, grid[i], opt, opt.backward_last && i + 1 == grid.size()));
    return out;
}

// Same for a (d-1)-form over the oriented boundary of the domain.
inline std::vector<GLSample> gelfand_leray_boundary_J(const MultiPoly& f, const NumForm& eta, const Domain& dom,
                                                      const std::vector<double>& grid, const GLOptions& opt = {}) {
    for (std::size_t i = 1; i < grid.size(); ++i)
        require(grid[i] > grid[i - 1], ErrorKind::Precondition, "level grid must be increasing");
    SublevelIntegral A(f, eta, dom, true, opt);
    std::vector<GLSample> out;
    for (std::size_t i = 0; i < grid.size(); ++i)
        out.push_back(differentiate_sublevel(A, grid[i], opt, opt.backward_last && i + 1 == grid.size()));
    return out;
}

inline std::vector<double> geometric_grid(double lo, double hi, std::size_t count) {
    require(lo > 0 && hi > lo && count >= 2, ErrorKind::Precondition, "geometric grid needs 0 < lo < hi and two points");
    std::vector<double> g;
    double r = std::pow(hi / lo, 1.0 / static_cast<double>(count - 1));
    for (std::size_t i = 0; i < count; ++i) g.push_back(lo * std::pow(r, static_cast<double>(i)));
    g.back() = hi;
    return g;
}

inline std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    require(hi > lo && count >= 2, ErrorKind::Precondition, "linear grid needs lo < hi and two points");
    std::vector<double> g;
    for (std::size_t i = 0; i < count; ++i) g.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

}  // namespace feynpar
