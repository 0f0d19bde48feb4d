#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "feynpar/poly.hpp"
#include "feynpar/poly_algebra.hpp"

namespace feynpar {

// Coefficients lowest degree first.
inline double horner(const std::vector<double>& c, double x) {
    long double s = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) s = s * x + *it;
    return static_cast<double>(s);
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
    std::vector<double> d;
    for (std::size_t i = 1; i < c.size(); ++i) d.push_back(c[i] * static_cast<double>(i));
    return d;
}

inline void trim_leading_zeros(std::vector<double>& c) {
    double scale = 0;
    for (double x : c) scale = std::max(scale, std::fabs(x));
    while (!c.empty() && std::fabs(c.back()) <= 1e-300 + 1e-15 * scale * 0) c.pop_back();
}

namespace detail {

inline double bisect_root(const std::vector<double>& c, double a, double b, double fa) {
    for (int it = 0; it < 200; ++it) {
        double m = 0.5 * (a + b);
        if (m <= a || m >= b) break;
        double fm = horner(c, m);
        if (fm == 0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

}  // namespace detail

// Real roots in [lo, hi], sorted; found by recursion on the critical points.
inline std::vector<double> real_roots(std::vector<double> c, double lo, double hi) {
    trim_leading_zeros(c);
    std::vector<double> out;
    if (c.size() <= 1) return out;
    if (c.size() == 2) {
        double r = -c[0] / c[1];
        if (r >= lo && r <= hi) out.push_back(r);
        return out;
    }
    std::vector<double> crit = real_roots(poly_derivative(c), lo, hi);
    std::vector<double> pts{lo};
    for (double x : crit)
        if (x > pts.back()) pts.push_back(x);
    if (hi > pts.back()) pts.push_back(hi);
    double scale = 0;
    for (double x : c) scale = std::max(scale, std::fabs(x));
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        double a = pts[i], b = pts[i + 1];
        double fa = horner(c, a), fb = horner(c, b);
        if (fa == 0) {
            out.push_back(a);
            continue;
        }
        if ((fa < 0) != (fb < 0) && fb != 0) out.push_back(detail::bisect_root(c, a, b, fa));
    }
    double fh = horner(c, hi);
    if (fh == 0) out.push_back(hi);
    // Touching roots at critical points (even multiplicity).
    for (double x : crit) {
        double fx = horner(c, x);
        double tol = 1e-12 * scale * std::max(1.0, std::pow(std::fabs(x), static_cast<double>(c.size() - 1)));
        if (std::fabs(fx) <= tol) out.push_back(x);
    }
    std::sort(out.begin(), out.end());
    std::vector<double> uniq;
    for (double x : out)
        if (uniq.empty() || std::fabs(x - uniq.back()) > 1e-12 * std::max(1.0, std::fabs(x))) uniq.push_back(x);
    return uniq;
}

inline double cauchy_bound(const std::vector<double>& c) {
    double lead = std::fabs(c.back()), m = 0;
    for (std::size_t i = 0; i + 1 < c.size(); ++i) m = std::max(m, std::fabs(c[i]) / lead);
    return 1.0 + m;
}

// Exact univariate helpers on rational coefficient lists.
inline MultiPoly univariate_poly(const std::vector<Q>& c) {
    MultiPoly p(1);
    for (std::size_t i = 0; i < c.size(); ++i) p.add_term(Exponent{static_cast<int>(i)}, c[i]);
    return p;
}

inline std::vector<Q> univariate_coeffs(const MultiPoly& p) {
    std::vector<Q> c(static_cast<std::size_t>(std::max(p.total_degree(), 0)) + 1, 0);
    for (const auto& [e, v] : p.terms()) c[static_cast<std::size_t>(e[0])] = v;
    return c;
}

inline std::vector<Q> square_free(const std::vector<Q>& c) {
    MultiPoly p = univariate_poly(c);
    if (p.total_degree() <= 0) return c;
    MultiPoly g = poly_gcd(p, p.derivative(0));
    return univariate_coeffs(*exact_divide(p, g));
}

// Best rational approximation with bounded denominator (continued fractions).
inline Q rational_approximation(double x, long max_den = 1000000) {
    long double v = x;
    long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
    for (int it = 0; it < 64; ++it) {
        long double a = std::floor(v);
        long long ai = static_cast<long long>(a);
        long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
        if (k2 > max_den) break;
        h0 = h1;
        h1 = h2;
        k0 = k1;
        k1 = k2;
        long double frac = v - a;
        if (frac < 1e-15L) break;
        v = 1.0L / frac;
    }
    Q q(static_cast<long>(h1), static_cast<long>(k1));
    q.canonicalize();
    return q;
}

struct RealRootSet {
    std::vector<Q> exact;
    std::vector<double> numeric;
};

// Real roots of a rational univariate polynomial; rational ones certified exactly.
inline RealRootSet univariate_real_roots(const std::vector<Q>& coeffs) {
    RealRootSet out;
    std::vector<Q> c = square_free(coeffs);
    if (c.size() <= 1) return out;
    MultiPoly p = univariate_poly(c);
    std::vector<double> d;
    for (const auto& x : c) d.push_back(x.get_d());
    double b = cauchy_bound(d);
    for (double r : real_roots(d, -b, b)) {
        Q q = rational_approximation(r);
        if (p.eval({q}) == 0) {
            if (std::find(out.exact.begin(), out.exact.end(), q) == out.exact.end()) out.exact.push_back(q);
        } else {
            out.numeric.push_back(r);
        }
    }
    std::sort(out.exact.begin(), out.exact.end());
    return out;
}

}  // namespace feynpar
