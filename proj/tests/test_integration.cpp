#include <boost/math/constants/constants.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>
#include <numbers>

#include "common.hpp"
#include "feynpar/feynman.hpp"
#include "feynpar/leray.hpp"
#include "feynpar/mellin.hpp"
#include "feynpar/zeta.hpp"

using namespace fpt;

namespace {

constexpr double kPi = std::numbers::pi;

NumForm unit_density(std::size_t n) {
    return top_form(n, [](const Vec&) { return 1.0; });
}

MultiPoly disk_f() {
    auto u1 = var(2, 0), u2 = var(2, 1);
    return u1 * u1 + u2 * u2;
}

}  // namespace

// ---------------------------------------------------------------- quadrature

TEST(Quadrature, SimplexMonomials) {
    // Dirichlet: integral of t^a over the simplex = prod a_i! / (|a| + n - 1)!
    auto r = integrate_simplex([](const double* t) { return t[0] * t[1] * t[2]; }, 3);
    EXPECT_NEAR(r.value, 1.0 / 120, 1e-12);
    EXPECT_TRUE(r.converged);
    auto q = integrate_simplex([](const double* t) { return t[0] * t[0] * t[3]; }, 4);
    EXPECT_NEAR(q.value, 2.0 / detail::factorial(6), 1e-12);
    auto one = integrate_simplex([](const double*) { return 1.0; }, 1);
    EXPECT_NEAR(one.value, 1.0, 1e-14);
}

TEST(Quadrature, MonteCarloIsSeededAndConsistent) {
    QuadOptions opt;
    opt.method = QuadMethod::MonteCarlo;
    opt.max_evals = 200000;
    opt.seed = 7;
    auto fn = [](const double* t) { return t[0] * t[1]; };
    auto a = integrate_simplex(fn, 3, opt), b = integrate_simplex(fn, 3, opt);
    EXPECT_EQ(a.value, b.value);
    EXPECT_EQ(a.seed, 7u);
    EXPECT_NEAR(a.value, 1.0 / 24, 5 * a.error + 1e-4);
}

TEST(Quadrature, Interval) {
    auto r = integrate_interval([](double x) { return std::exp(x); }, 0, 1);
    EXPECT_NEAR(r.value, std::exp(1.0) - 1, 1e-12);
    EXPECT_EQ(integrate_interval([](double) { return 1.0; }, 2, 2).value, 0.0);
}

TEST(Forms, AreaAndStokes) {
    auto area = integrate_form(unit_density(2), square_chain(1, 2));
    EXPECT_NEAR(area.value, 1.0, 1e-12);
    // d(x dy - y dx) = 2 dx dy
    auto bd = integrate_form(euler_contract(unit_density(2)), boundary(square_chain(1, 2)));
    EXPECT_NEAR(bd.value, 2.0, 1e-10);
    // Euler contraction of dt1 dt2 dt3 over the projective simplex: 3 times the volume of the cone
    auto simplex = integrate_form(euler_contract(unit_density(3)), standard_simplex_chain(3));
    EXPECT_NEAR(std::fabs(simplex.value), 0.5, 1e-12);
}

TEST(Forms, DivergenceFreeLift) {
    auto t1 = var(3, 0), t2 = var(3, 1), t3 = var(3, 2);
    auto F = divergence_free_lift(t1 * t2 + t3 * t3);
    ASSERT_TRUE(F.has_value());
    EXPECT_TRUE(divergence(*F).is_zero());
}

// ---------------------------------------------------------------- Feynman integral oracles

TEST(FeynmanU, MassiveBubbleAgainstClosedForm) {
    auto gf = corpus_file("massive_bubble");
    auto m = file_momenta(gf);
    auto r = feynman_U(gf.graph, m, 2);
    // 1 / (t(1-t) + 1) on [0,1]: (4/sqrt 5) log(golden ratio)
    double exact = 4 / std::sqrt(5.0) * std::log(boost::math::constants::phi<double>());
    EXPECT_NEAR(r.quad.value, exact, 1e-8);
    boost::math::quadrature::tanh_sinh<double> ts;
    double oracle = ts.integrate([](double t) { return 1 / (t * (1 - t) + 1); }, 0.0, 1.0);
    EXPECT_NEAR(r.quad.value, oracle, 1e-8);
    EXPECT_EQ(r.prefactor, "Gamma(1)/(4*pi)^(1)");
}

TEST(FeynmanU, TriangleAgainstNestedOracle) {
    auto g = corpus_graph("triangle");
    auto r = feynman_U(g, triangle_gram(), 4);
    boost::math::quadrature::tanh_sinh<double> ts;
    double oracle = ts.integrate(
        [&](double x) {
            return ts.integrate([x](double y) { return 1 / (x * y + (x + y) * (1 - x - y)); }, 0.0, 1 - x);
        },
        0.0, 1.0);
    EXPECT_NEAR(r.quad.value, oracle, 1e-5 * oracle);
}

TEST(FeynmanU, DivergentAndSymbolicRejected) {
    auto g = corpus_graph("bubble");
    EXPECT_FEYNPAR_ERROR(feynman_U(g, MomentumData::two_leg_symbolic(), 4), ErrorKind::Precondition);
    // a = n - D l / 2 < 0
    EXPECT_FEYNPAR_ERROR(feynman_U(g, MomentumData::two_leg(1), 6), ErrorKind::Precondition);
}

// ---------------------------------------------------------------- dimensional regularization

TEST(DimReg, MasslessBubbleMatchesBetaExpansion) {
    auto g = corpus_graph("bubble");
    auto s = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 2);
    ASSERT_EQ(s.coeffs.size(), 3u);
    // integral of (t(1-t))^{z/2} = Gamma(1+z/2)^2 / Gamma(2+z) = 1 - z + (1 - pi^2/24) z^2 + ...
    EXPECT_NEAR(s.coeffs[0], 1.0, 1e-6);
    EXPECT_NEAR(s.coeffs[1], -1.0, 1e-6);
    EXPECT_NEAR(s.coeffs[2], 1 - kPi * kPi / 24, 1e-6);
}

TEST(DimReg, ConstantTermIsFeynmanU) {
    for (const char* name : {"massive_bubble", "massive_banana3"}) {
        auto gf = corpus_file(name);
        auto m = file_momenta(gf);
        auto s = dimreg_series(gf.graph, m, gf.graph.dimension, 0, 1);
        auto u = feynman_U(gf.graph, m, gf.graph.dimension);
        EXPECT_NEAR(s.coeffs[0], u.quad.value, 1e-8) << name;
    }
}

TEST(DimReg, MassScaleShift) {
    auto g = corpus_graph("bubble");
    auto base = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 3);
    auto shifted = dimreg_series(g, MomentumData::two_leg(1), 4, 0.5, 3);
    auto applied = apply_mass_scale(base, 0.5);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(shifted.coeffs[k], applied.coeffs[k], 1e-12);
    // c1 picks up -l log mu c0
    EXPECT_NEAR(applied.coeffs[1], base.coeffs[1] - 0.5 * base.coeffs[0], 1e-12);
    auto back = apply_mass_scale(applied, -0.5);
    for (std::size_t k = 0; k < 4; ++k) EXPECT_NEAR(back.coeffs[k], base.coeffs[k], 1e-12);
}

TEST(DimReg, MassScaleShiftExact) {
    QSeries s(6);
    s.set(0, 1);
    s.set(1, -1);
    s.set(2, Q(2) / 3);
    Q a = Q(1) / 3, b = Q(-5) / 7;
    auto ab = apply_mass_scale_exact(apply_mass_scale_exact(s, 2, a, 6), 2, b, 6);
    auto direct = apply_mass_scale_exact(s, 2, a + b, 6);
    for (int k = 0; k <= 6; ++k) EXPECT_EQ(ab[k], direct[k]) << k;
    // z^1 coefficient: c1 - l L c0
    EXPECT_EQ(direct[1], Q(-1) - 2 * (a + b));
    auto zero = apply_mass_scale_exact(s, 2, Q(0), 6);
    for (int k = 0; k <= 6; ++k) EXPECT_EQ(zero[k], s[k]);
}

TEST(DimReg, LogModesSplitTheExponent) {
    auto g = corpus_graph("bubble");
    // Psi = 1 on the simplex: PsiOnly carries no z dependence, VOnly is the full series
    auto psi = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 2, {}, LogMode::PsiOnly);
    auto v = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 2, {}, LogMode::VOnly);
    EXPECT_NEAR(psi.coeffs[1], 0, 1e-12);
    EXPECT_NEAR(psi.coeffs[2], 0, 1e-12);
    EXPECT_NEAR(v.coeffs[1], -1, 1e-6);
}

// ---------------------------------------------------------------- boundary/interior identity

TEST(ProjectiveIdentity, SquareToy) {
    auto f = var(2, 0) + var(2, 1);
    auto r = projective_identity(f, IdentityForm{{}, cst(2, 1)}, 2, square_chain(1, 2));
    EXPECT_TRUE(r.closed);
    EXPECT_LT(r.residual, 1e-8);
    // integral of 1/(t1+t2)^2 over [1,2]^2 = log(9/8)
    EXPECT_NEAR(r.base, std::log(9.0 / 8), 1e-10);
    EXPECT_NEAR(r.lhs, 2 * std::log(9.0 / 8), 1e-10);
}

TEST(ProjectiveIdentity, WeightMismatchRejected) {
    auto f = var(2, 0) + var(2, 1);
    EXPECT_FEYNPAR_ERROR(projective_identity(f, IdentityForm{{}, cst(2, 1)}, 3, square_chain(1, 2)),
                         ErrorKind::Precondition);
}

TEST(ProjectiveIdentity, TriangleClosedForm) {
    auto g = corpus_graph("triangle");
    auto rep = feynman_identity(g, triangle_gram(), 4, true);
    EXPECT_TRUE(rep.identity.closed);
    EXPECT_LT(rep.identity.residual, 1e-4);
    EXPECT_NEAR(std::fabs(rep.identity.base), rep.feynman_value, 1e-5 * rep.feynman_value);
}

TEST(ProjectiveIdentity, OpenFormIsNegativeControl) {
    auto g = corpus_graph("triangle");
    auto rep = feynman_identity(g, triangle_gram(), 4, false);
    EXPECT_FALSE(rep.identity.closed);
    EXPECT_GT(rep.identity.residual, 1e-2);
}

// ---------------------------------------------------------------- level-set integrals

TEST(GelfandLeray, DiskIsConstantPi) {
    GLOptions gl;
    gl.backward_last = true;
    auto J = gelfand_leray_J(disk_f(), unit_density(2), Domain::ball(2, 1), geometric_grid(0.05, 0.8, 8), gl);
    for (const auto& s : J) EXPECT_NEAR(s.value, kPi, 1e-3) << s.s;
}

TEST(GelfandLeray, BoxAndBoundary) {
    auto u1 = var(2, 0);
    auto grid = linear_grid(0.2, 0.8, 4);
    for (const auto& s : gelfand_leray_J(u1, unit_density(2), Domain::box(2, 0, 1), grid)) EXPECT_NEAR(s.value, 1, 1e-6);
    // x dy - y dx over the part of the boundary with u1 <= s is s (top edge only)
    auto B = gelfand_leray_boundary_J(u1, euler_contract(unit_density(2)), Domain::box(2, 0, 1), grid);
    for (const auto& s : B) EXPECT_NEAR(s.value, 1, 1e-6) << s.s;
}

TEST(GelfandLeray, GridMustIncrease) {
    EXPECT_FEYNPAR_ERROR(gelfand_leray_J(disk_f(), unit_density(2), Domain::ball(2, 1), {0.5, 0.2}),
                         ErrorKind::Precondition);
}

TEST(Mellin, DiskTransformAndPole) {
    GLOptions gl;
    gl.backward_last = true;
    auto J = gelfand_leray_J(disk_f(), unit_density(2), Domain::ball(2, 1), geometric_grid(0.01, 1, 30), gl);
    auto fit = fit_small_levels(J);
    EXPECT_NEAR(fit.lambda, 0, 1e-2);
    EXPECT_EQ(fit.r, 0);
    EXPECT_NEAR(fit.a, kPi, 1e-2);
    EXPECT_NEAR(fit.pole(), -1, 1e-2);
    for (const auto& v : mellin_transform(J, {0, 0.5, 1, 2}, fit)) EXPECT_NEAR(v.value, kPi / (v.z + 1), 1e-4) << v.z;
    auto near = mellin_transform(J, {-0.99}, fit);
    EXPECT_LT(std::fabs(0.01 * near[0].value - kPi), 1e-2);
    EXPECT_FEYNPAR_ERROR(mellin_transform(J, {-1.5}, fit), ErrorKind::ConvergenceDomain);
}

TEST(Mellin, SyntheticSamples) {
    auto sample = [](auto fn) {
        std::vector<GLSample> J;
        for (double s : geometric_grid(1e-3, 0.5, 40)) J.push_back({s, fn(s), 0});
        return J;
    };
    auto sq = fit_small_levels(sample([](double s) { return 3 * std::sqrt(s); }));
    EXPECT_NEAR(sq.lambda, 0.5, 1e-9);
    EXPECT_EQ(sq.r, 0);
    EXPECT_NEAR(sq.a, 3, 1e-8);
    auto lg = fit_small_levels(sample([](double s) { return -2 * s * std::log(s); }));
    EXPECT_EQ(lg.r, 1);
    EXPECT_NEAR(lg.lambda, 1, 1e-9);
    // J = s on (0, 1]: F(z) = 1/(z+2)
    std::vector<GLSample> lin;
    for (double s : geometric_grid(1e-3, 1, 20)) lin.push_back({s, s, 0});
    for (const auto& v : mellin_transform(lin, {0, 1})) EXPECT_NEAR(v.value, 1 / (v.z + 2), 1e-9);
    EXPECT_FEYNPAR_ERROR(fit_small_levels(sample([](double s) { return s - 0.01; })), ErrorKind::FitUnstable);
}

TEST(Leray, DiskBlowsUpAtOrderM) {
    auto res = leray_I_epsilon(disk_f(), unit_density(2), Domain::ball(2, 1), 1, geometric_grid(0.02, 0.5, 30));
    EXPECT_TRUE(res.all_finite);
    EXPECT_TRUE(res.degenerate_boundary);
    ASSERT_TRUE(res.fitted);
    EXPECT_NEAR(res.nu, 1, 0.15);
    EXPECT_NEAR(res.c, kPi, 0.05);
    EXPECT_TRUE(res.within_bound);
}

TEST(Leray, RegularFormStaysBounded) {
    auto alpha = top_form(2, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; });
    auto res = leray_I_epsilon(disk_f(), alpha, Domain::ball(2, 1), 1, geometric_grid(0.02, 0.5, 30));
    EXPECT_TRUE(res.all_finite);
    ASSERT_TRUE(res.fitted);
    EXPECT_NEAR(res.nu, 0, 0.1);
}

// ---------------------------------------------------------------- log-zeta coefficients

TEST(Zeta, IteratedLogIntegrals) {
    for (std::size_t n = 1; n <= 3; ++n) {
        auto r = iterated_log_integral(1.0, std::exp(1.0), n);
        EXPECT_NEAR(r.value, 1 / detail::factorial(static_cast<int>(n)), 1e-6) << n;
    }
    EXPECT_NEAR(iterated_log_integral(1.0, 4.0, 2).value, std::pow(std::log(4.0), 2) / 2, 1e-8);
    EXPECT_FEYNPAR_ERROR(iterated_log_integral(2.0, 1.0, 1), ErrorKind::Precondition);
}

TEST(Zeta, BubbleHasTrivialLogPsi) {
    auto g = corpus_graph("bubble");
    auto z = log_zeta_coeffs(g, MomentumData::two_leg(1), 4, 3);
    auto s = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 0);
    EXPECT_NEAR(z.coeffs[0], s.coeffs[0], 1e-10);
    for (std::size_t k = 1; k <= 3; ++k) EXPECT_NEAR(z.coeffs[k], 0, 1e-12) << k;
}

TEST(Zeta, MassiveBanana3MatchesPsiOnlySeries) {
    auto gf = corpus_file("massive_banana3");
    auto m = file_momenta(gf);
    auto z = log_zeta_coeffs(gf.graph, m, 2, 3);
    auto s = dimreg_series(gf.graph, m, 2, 0, 3, {}, LogMode::PsiOnly);
    double scale = 1;
    for (std::size_t k = 0; k <= 3; ++k, scale *= -0.5) {
        EXPECT_NEAR(s.coeffs[k], scale * z.coeffs[k], 1e-7) << k;
        if (k >= 1) EXPECT_GT(std::fabs(z.coeffs[k]), 1e-3) << k;
    }
}
