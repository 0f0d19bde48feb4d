#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "feynpar/case_tables.hpp"
#include "feynpar/forms.hpp"
#include "feynpar/graph.hpp"
#include "feynpar/graph_polynomials.hpp"
#include "feynpar/laurent.hpp"
#include "feynpar/quadrature.hpp"

namespace feynpar {

// Everything needed to evaluate the parametric integrand on the simplex.
struct ParametricIntegrand {
    std::size_t n = 0;
    int loops = 0;
    int dim = 0;
    double a = 0;  // n - D l / 2
    MultiPoly psi, vnum;  // V = vnum / psi, vnum homogeneous of degree l + 1
    CompiledPoly psi_c, vnum_c;

    // Psi^{-D/2} V^{-(n - D l / 2)}
    double base(const double* t) const {
        double ps = psi_c(t), v = vnum_c(t) / ps;
        return std::pow(ps, -0.5 * dim) * std::pow(v, -a);
    }
    double log_psi(const double* t) const { return std::log(psi_c(t)); }
    double log_v(const double* t) const { return std::log(vnum_c(t) / psi_c(t)); }
};

inline ParametricIntegrand parametric_integrand(const FeynmanGraph& g, const MomentumData& mom, int dim) {
    require(!mom.symbolic(), ErrorKind::Precondition, "numeric integration needs numeric momenta (e.g. --p2)");
    require(dim > 0, ErrorKind::Precondition, "dimension must be positive");
    ParametricIntegrand p;
    p.n = g.n_edges();
    p.loops = loop_number(g);
    p.dim = dim;
    p.a = static_cast<double>(p.n) - 0.5 * dim * p.loops;
    VFunction v = v_function(g, mom);
    p.psi = v.denominator;
    p.vnum = v.homogeneous_numerator;
    p.psi_c = CompiledPoly(p.psi);
    p.vnum_c = CompiledPoly(p.vnum);
    return p;
}

// Exact prefactor kept symbolic: Gamma(n - D l / 2) / (4 pi)^{D l / 2}.
inline std::string feynman_prefactor(std::size_t n, int dim, int loops) {
    auto half = [](int x) { return x % 2 ? std::to_string(x) + "/2" : std::to_string(x / 2); };
    return "Gamma(" + half(2 * static_cast<int>(n) - dim * loops) + ")/(4*pi)^(" + half(dim * loops) + ")";
}

struct DivergenceProbe {
    bool divergent = false;
    std::string reason;
    double worst_exponent = 0;  // growth exponent minus integrability threshold
};

// Geometric probe ladder towards every face of the simplex: with |S| coordinates
// equal to eps the local measure scales like eps^{|S|-1} d eps, so growth
// eps^{-a} is integrable only for a < |S|.
inline DivergenceProbe probe_divergence(const std::function<double(const double*)>& fn, std::size_t n,
                                        double margin = 0.02) {
    DivergenceProbe out;
    out.worst_exponent = -1e300;
    std::vector<double> t(n, 1.0 / static_cast<double>(n));
    double c = fn(t.data());
    if (!std::isfinite(c)) {
        out.divergent = true;
        out.reason = "integrand not finite at the barycenter";
        return out;
    }
    require(n <= 16, ErrorKind::TooLarge, "probe ladder supports at most 16 edges");
    const double ladder[] = {1e-3, 1e-4, 1e-5, 1e-6, 1e-7};
    for (unsigned mask = 1; mask + 1 < (1u << n); ++mask) {
        std::size_t k = static_cast<std::size_t>(__builtin_popcount(mask));
        double prev_log = 0, prev_eps = 0;
        double slope = 0;
        for (std::size_t li = 0; li < 5; ++li) {
            double eps = ladder[li];
            for (std::size_t i = 0; i < n; ++i)
                t[i] = (mask >> i) & 1u ? eps : (1.0 - k * eps) / static_cast<double>(n - k);
            double v = std::fabs(fn(t.data()));
            if (!std::isfinite(v)) {
                out.divergent = true;
                out.reason = "integrand not finite near face mask " + std::to_string(mask);
                return out;
            }
            double lv = v > 0 ? std::log(v) : -700;
            if (li > 0) slope = -(lv - prev_log) / (std::log(eps) - std::log(prev_eps));
            prev_log = lv;
            prev_eps = eps;
        }
        double excess = slope - static_cast<double>(k);
        if (excess > out.worst_exponent) out.worst_exponent = excess;
        if (excess >= -margin) {
            out.divergent = true;
            out.reason = "growth eps^-" + std::to_string(slope) + " towards a face of codimension " + std::to_string(k);
        }
    }
    return out;
}

struct FeynmanOptions {
    QuadOptions quad{};
    bool allow_divergent = false;
};

struct FeynmanUResult {
    QuadratureResult quad;
    std::string prefactor;
    DivergenceProbe probe;
};

inline FeynmanUResult feynman_U(const FeynmanGraph& g, const MomentumData& mom, int dim, const FeynmanOptions& opt = {}) {
    ParametricIntegrand p = parametric_integrand(g, mom, dim);
    FeynmanUResult r;
    r.prefactor = feynman_prefactor(p.n, dim, p.loops);
    require(p.a >= 0, ErrorKind::Precondition, "Gamma(n - D l / 2) needs n - D l / 2 >= 0");
    auto fn = [&](const double* t) { return p.base(t); };
    r.probe = probe_divergence(fn, p.n);
    require(!r.probe.divergent || opt.allow_divergent, ErrorKind::DivergentConfiguration, [&] { return r.probe.reason; });
    r.quad = integrate_simplex(fn, p.n, opt.quad);
    return r;
}

// ---------------------------------------------------------------- dimensional regularization

enum class LogMode { Full, PsiOnly, VOnly };

struct SeriesResult {
    std::vector<double> coeffs;
    std::vector<double> errors;
    double log_mu = 0;
    int loops = 0;
    std::string mass_rule = "exp(-z*l*log(mu))";
    QuadratureResult quad;
};

// Multiply a truncated series by exp(-z l log mu) (Cauchy product on the window).
inline SeriesResult apply_mass_scale(SeriesResult s, double log_mu) {
    std::size_t K = s.coeffs.size();
    std::vector<double> e(K);
    double c = -static_cast<double>(s.loops) * log_mu, term = 1;
    for (std::size_t k = 0; k < K; ++k) {
        e[k] = term;
        term *= c / static_cast<double>(k + 1);
    }
    std::vector<double> out(K, 0), err(K, 0);
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j <= k; ++j) {
            out[k] += s.coeffs[j] * e[k - j];
            err[k] += s.errors[j] * std::fabs(e[k - j]);
        }
    s.coeffs = out;
    s.errors = err;
    s.log_mu += log_mu;
    return s;
}

// Exact version on rational series: multiply by exp(-z l L) with L = log mu rational.
inline QSeries apply_mass_scale_exact(const QSeries& s, int loops, const Q& log_mu, int order = kDefaultHigh) {
    return s * exp_linear(-Q(loops) * log_mu, order);
}

inline SeriesResult dimreg_series(const FeynmanGraph& g, const MomentumData& mom, int dim, double log_mu,
                                  std::size_t K, const FeynmanOptions& opt = {}, LogMode mode = LogMode::Full) {
    ParametricIntegrand p = parametric_integrand(g, mom, dim);
    require(p.a >= 0, ErrorKind::Precondition, "Gamma(n - D l / 2) needs n - D l / 2 >= 0");
    auto base = [&](const double* t) { return p.base(t); };
    auto probe = probe_divergence(base, p.n);
    require(!probe.divergent || opt.allow_divergent, ErrorKind::DivergentConfiguration, [&] { return probe.reason; });
    std::size_t m = K + 1;
    auto fn = [&](const double* t, double* out) {
        double G = p.base(t), L = 0;
        if (mode != LogMode::VOnly) L += -0.5 * p.log_psi(t);
        if (mode != LogMode::PsiOnly) L += 0.5 * p.loops * p.log_v(t);
        double term = G;
        for (std::size_t k = 0; k < m; ++k) {
            out[k] = term;
            term *= L / static_cast<double>(k + 1);
        }
    };
    auto vq = integrate_simplex_vector(fn, p.n, m, opt.quad);
    SeriesResult s;
    s.coeffs = vq.values;
    s.errors = vq.errors;
    s.loops = p.loops;
    s.quad = vq.component(0);
    return log_mu != 0 ? apply_mass_scale(s, log_mu) : s;
}

// ---------------------------------------------------------------- projective identity

struct IdentityReport {
    double base = 0;      // integral of omega / f^m over the chain
    double lhs = 0;       // m deg f * base
    double boundary = 0;  // integral of Delta(omega) / f^m over the boundary
    double interior = 0;  // integral of df ^ Delta(omega) / f^{m+1}
    double rhs = 0;       // boundary + m * interior
    double rhs_unit = 0;  // boundary + interior (coefficient 1 on the interior term)
    double residual = 0;
    double residual_unit = 0;
    double error_estimate = 0;
    bool closed = false;
    bool converged = true;
    int m = 0;
    int deg_f = 0;
};

// omega is either the contraction of omega_n with a polynomial field (an
// (n-1)-form) or a top form g omega_n.
struct IdentityForm {
    std::vector<MultiPoly> field;
    std::optional<MultiPoly> density;
};

inline IdentityReport projective_identity(const MultiPoly& f, const IdentityForm& w, int m, const Chain& chain,
                                          const QuadOptions& opt = {}) {
    std::size_t n = f.arity();
    require(f.is_homogeneous() && !f.is_zero(), ErrorKind::Precondition, "f must be a nonzero homogeneous polynomial");
    require(m >= 1, ErrorKind::Precondition, "pole order m must be positive");
    IdentityReport r;
    r.m = m;
    r.deg_f = f.total_degree();
    NumForm omega;
    int weight = 0;
    if (w.density) {
        require(w.density->arity() == n, ErrorKind::ArityMismatch, "form density arity differs from f");
        weight = w.density->total_degree() + static_cast<int>(n);
        auto gc = std::make_shared<CompiledPoly>(*w.density);
        omega = top_form(n, [gc](const Vec& x) { return (*gc)(x); });
        r.closed = true;
    } else {
        require(w.field.size() == n, ErrorKind::ArityMismatch, "vector field needs one component per variable");
        int deg = -1;
        for (const auto& c : w.field)
            if (!c.is_zero()) {
                require(c.is_homogeneous() && (deg < 0 || deg == c.total_degree()), ErrorKind::Precondition,
                        "field components must be homogeneous of one degree");
                deg = c.total_degree();
            }
        require(deg >= 0, ErrorKind::ZeroPolynomial, "zero vector field");
        weight = deg + static_cast<int>(n) - 1;
        omega = vector_field_form(n, compiled_field(w.field));
        r.closed = divergence(w.field).is_zero();
    }
    require(weight == m * r.deg_f, ErrorKind::Precondition, [&] {
        return "omega has weight " + std::to_string(weight) + " but m deg f = " + std::to_string(m * r.deg_f);
    });
    auto fc = std::make_shared<CompiledPoly>(f);
    auto grad = compiled_gradient(f);
    NumForm delta = euler_contract(omega);
    NumForm base_form = scaled(omega, [fc, m](const Vec& x) { return std::pow((*fc)(x), -m); });
    NumForm bd_form = scaled(delta, [fc, m](const Vec& x) { return std::pow((*fc)(x), -m); });
    NumForm in_form = scaled(wedge_differential(grad, delta), [fc, m](const Vec& x) { return std::pow((*fc)(x), -m - 1); });
    auto i0 = integrate_form(base_form, chain, opt);
    auto b = integrate_form(bd_form, boundary(chain), opt);
    auto s = integrate_form(in_form, chain, opt);
    r.base = i0.value;
    r.lhs = m * r.deg_f * i0.value;
    r.boundary = b.value;
    r.interior = s.value;
    r.rhs = b.value + m * s.value;
    r.rhs_unit = b.value + s.value;
    r.residual = std::fabs(r.lhs - r.rhs);
    r.residual_unit = std::fabs(r.lhs - r.rhs_unit);
    r.error_estimate = m * r.deg_f * i0.error + b.error + m * s.error;
    r.converged = i0.converged && b.converged && s.converged;
    return r;
}

struct FeynmanIdentityReport {
    IdentityReport identity;
    CaseTableResult table;
    double feynman_value = 0;  // integral of the parametric integrand, for comparison with identity.base
    std::vector<MultiPoly> field;
};

// Feynman integral written as omega / f^m with f, m, omega from the affine case
// table. `closed` picks a divergence-free field; otherwise the naive Delta(g omega_n).
inline FeynmanIdentityReport feynman_identity(const FeynmanGraph& g, const MomentumData& mom, int dim, bool closed = true,
                                              const FeynmanOptions& opt = {}) {
    ParametricIntegrand p = parametric_integrand(g, mom, dim);
    FeynmanIdentityReport out;
    out.table = case_table_affine(static_cast<int>(p.n), dim, p.loops);
    MultiPoly f = case_f(out.table, p.vnum, p.psi);
    MultiPoly h = case_omega_factor(out.table, p.vnum, p.psi);
    auto base = [&](const double* t) { return p.base(t); };
    auto probe = probe_divergence(base, p.n);
    require(!probe.divergent || opt.allow_divergent, ErrorKind::DivergentConfiguration, [&] { return probe.reason; });
    if (closed) {
        auto F = divergence_free_lift(h);
        require(F.has_value(), ErrorKind::Precondition, "no divergence-free lift of the form numerator");
        out.field = *F;
    } else {
        for (std::size_t i = 0; i < p.n; ++i) out.field.push_back(h * MultiPoly::variable(p.n, i));
    }
    out.identity = projective_identity(f, IdentityForm{out.field, std::nullopt}, out.table.m,
                                       standard_simplex_chain(p.n), opt.quad);
    out.feynman_value = integrate_simplex(base, p.n, opt.quad).value;
    return out;
}

}  // namespace feynpar
