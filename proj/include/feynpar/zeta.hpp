#pragma once

#include <cmath>
#include <vector>

#include "feynpar/feynman.hpp"
#include "feynpar/forms.hpp"

namespace feynpar {

struct ZetaResult {
    std::vector<double> coeffs;  // zeta_k = integral of G log(Psi)^k / k!
    std::vector<double> errors;
    QuadratureResult quad;
};

inline ZetaResult log_zeta_coeffs(const FeynmanGraph& g, const MomentumData& mom, int dim, std::size_t n_max,
                                  const FeynmanOptions& opt = {}) {
    ParametricIntegrand p = parametric_integrand(g, mom, dim);
    require(p.a >= 0, ErrorKind::Precondition, "Gamma(n - D l / 2) needs n - D l / 2 >= 0");
    auto base = [&](const double* t) { return p.base(t); };
    auto probe = probe_divergence(base, p.n);
    require(!probe.divergent || opt.allow_divergent, ErrorKind::DivergentConfiguration, [&] { return probe.reason; });
    auto fn = [&](const double* t, double* out) {
        double term = p.base(t), L = p.log_psi(t);
        for (std::size_t k = 0; k <= n_max; ++k) {
            out[k] = term;
            term *= L / static_cast<double>(k + 1);
        }
    };
    auto vq = integrate_simplex_vector(fn, p.n, n_max + 1, opt.quad);
    return {vq.values, vq.errors, vq.component(0)};
}

// The ordered region a <= s_1 <= ... <= s_n <= b as an oriented simplex.
inline Chain ordered_region(double a, double b, std::size_t n) {
    require(n >= 1, ErrorKind::Precondition, "need n >= 1");
    require(0 < a && a < b, ErrorKind::Precondition, "need 0 < a < b");
    OrientedSimplex s;
    for (std::size_t k = 0; k <= n; ++k) {
        Vec v(n, a);
        for (std::size_t i = n - k; i < n; ++i) v[i] = b;
        s.vertices.push_back(v);
    }
    Frame t;
    for (std::size_t k = 1; k <= n; ++k) {
        Vec d(n);
        for (std::size_t i = 0; i < n; ++i) d[i] = s.vertices[k][i] - s.vertices[0][i];
        t.push_back(d);
    }
    s.sign = det_columns(t) < 0 ? -1.0 : 1.0;
    return {s};
}

// Integral of ds_1/s_1 ^ ... ^ ds_n/s_n over the ordered region; equals log(b/a)^n / n!.
inline QuadratureResult iterated_log_integral(double a, double b, std::size_t n, const QuadOptions& opt = {}) {
    NumForm w = top_form(n, [](const Vec& x) {
        double p = 1;
        for (double v : x) p /= v;
        return p;
    });
    return integrate_form(w, ordered_region(a, b, n), opt);
}

}  // namespace feynpar
