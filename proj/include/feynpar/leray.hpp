#pragma once

#include <cmath>
#include <vector>

#include "feynpar/case_tables.hpp"
#include "feynpar/feynman.hpp"
#include "feynpar/gelfand_leray.hpp"
#include "feynpar/mellin.hpp"

namespace feynpar {

struct LerayOptions {
    GLOptions gl{};
    FitOptions fit{};
    std::size_t fit_count = 8;  // smallest eps samples used for the blowup fit
    double order_slack = 0.15;  // allowed excess of the fitted order over m
};

struct LeraySample {
    double eps = 0;
    double interior = 0;  // eps^{-m} * level integral of alpha
    double boundary = 0;  // eps^{-(m-1)} * boundary level integral of Delta(alpha)
    double value = 0;
    double error = 0;
};

struct LerayResult {
    std::vector<LeraySample> samples;
    int m = 0;
    bool degenerate_boundary = false;  // m - 1 = 0: the boundary form carries no pole
    bool fitted = false;
    double nu = 0;  // I_eps ~ c eps^{-nu}
    double c = 0;
    double fit_residual = 0;
    bool within_bound = true;
    bool all_finite = true;
};

// I_eps = level integral over the boundary of Delta(alpha)/f^{m-1} plus level
// integral of alpha/f^m, both via sublevel differentiation. On X_eps the powers
// of f are constants, so they are pulled out of the integrals.
inline LerayResult leray_I_epsilon(const MultiPoly& f, const NumForm& alpha, const Domain& dom, int m,
                                   const std::vector<double>& eps_grid, const LerayOptions& opt = {}) {
    require(m >= 1, ErrorKind::Precondition, "pole order m must be positive");
    require(!eps_grid.empty(), ErrorKind::Precondition, "empty eps grid");
    LerayResult out;
    out.m = m;
    out.degenerate_boundary = m == 1;
    bool with_boundary = !(dom.kind == DomainKind::Ball && dom.dim != 2);
    auto inner = gelfand_leray_J(f, alpha, dom, eps_grid, opt.gl);
    std::vector<GLSample> outer;
    if (with_boundary) outer = gelfand_leray_boundary_J(f, euler_contract(alpha), dom, eps_grid, opt.gl);
    for (std::size_t i = 0; i < eps_grid.size(); ++i) {
        LeraySample s;
        s.eps = eps_grid[i];
        double wi = std::pow(s.eps, -m), wb = std::pow(s.eps, -(m - 1));
        s.interior = wi * inner[i].value;
        s.error = wi * inner[i].error;
        if (with_boundary) {
            s.boundary = wb * outer[i].value;
            s.error += wb * outer[i].error;
        }
        s.value = s.interior + s.boundary;
        if (!std::isfinite(s.value)) out.all_finite = false;
        out.samples.push_back(s);
    }
    std::vector<GLSample> head;
    for (const auto& s : out.samples) {
        if (head.size() >= opt.fit_count) break;
        if (std::fabs(s.value) > 1e-300) head.push_back({s.eps, s.value, s.error});
    }
    FitOptions fo = opt.fit;
    fo.max_log_power = 0;
    fo.min_samples = std::min(fo.min_samples, opt.fit_count);
    if (head.size() >= fo.min_samples) {
        auto fit = asymptotic_fit(head, fo);
        out.fitted = true;
        out.nu = -fit.lambda;
        out.c = fit.a;
        out.fit_residual = fit.residual;
        out.within_bound = out.nu <= m + opt.order_slack;
    }
    return out;
}

// Feynman case: f, m and the form numerator from the affine case table, in the
// chart t_n = 1 - t_1 - ... - t_{n-1} of the simplex.
inline LerayResult leray_feynman(const FeynmanGraph& g, const MomentumData& mom, int dim,
                                 const std::vector<double>& eps_grid, const LerayOptions& opt = {}) {
    ParametricIntegrand p = parametric_integrand(g, mom, dim);
    require(p.n >= 2 && p.n <= 4, ErrorKind::TooLarge, "Leray sampling supports 2 to 4 edges");
    auto table = case_table_affine(static_cast<int>(p.n), dim, p.loops);
    MultiPoly f = dehomogenize_simplex(case_f(table, p.vnum, p.psi));
    MultiPoly h = dehomogenize_simplex(case_omega_factor(table, p.vnum, p.psi));
    auto hc = std::make_shared<CompiledPoly>(h);
    NumForm alpha = top_form(p.n - 1, [hc](const Vec& x) { return (*hc)(x); });
    return leray_I_epsilon(f, alpha, Domain::simplex(p.n - 1), table.m, eps_grid, opt);
}

}  // namespace feynpar
