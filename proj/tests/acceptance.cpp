// Acceptance run: one PASS/FAIL line per criterion, with wall time against its budget.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "feynpar/case_tables.hpp"
#include "feynpar/feynman.hpp"
#include "feynpar/finite_field.hpp"
#include "feynpar/hopf.hpp"
#include "feynpar/invariants.hpp"
#include "feynpar/io.hpp"
#include "feynpar/leray.hpp"
#include "feynpar/mellin.hpp"
#include "feynpar/slicing.hpp"
#include "feynpar/zeta.hpp"
#include "oracles.hpp"

using namespace feynpar;

namespace {

constexpr double kPi = std::numbers::pi;

// Collects failed sub-checks; a criterion passes when none failed.
class Checks {
public:
    void expect(bool ok, const std::string& what) {
        ++total_;
        if (!ok) failures_.push_back(what);
    }
    void near(double got, double want, double tol, const std::string& what) {
        std::ostringstream s;
        s << what << ": got " << got << ", want " << want << " +- " << tol;
        expect(std::isfinite(got) && std::fabs(got - want) <= tol, s.str());
    }
    void note(const std::string& s) { notes_.push_back(s); }
    bool ok() const { return failures_.empty(); }
    int total() const { return total_; }
    const std::vector<std::string>& failures() const { return failures_; }
    const std::vector<std::string>& notes() const { return notes_; }

private:
    int total_ = 0;
    std::vector<std::string> failures_, notes_;
};

std::string corpus(const std::string& file) { return std::string(FEYNPAR_CORPUS_DIR) + "/" + file; }
GraphFile load(const std::string& name) { return read_graph_file(corpus(name + ".json")); }
FeynmanGraph graph(const std::string& name) { return load(name).graph; }
MomentumData triangle_gram() { return gram_from_json(read_json_file(corpus("triangle.gram.json"))); }

MomentumData file_momenta(const GraphFile& gf) {
    MomentumData m = gf.p2 ? MomentumData::two_leg(*gf.p2) : MomentumData::two_leg_symbolic();
    m.mass2 = gf.mass2;
    return m;
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

MultiPoly var(std::size_t n, std::size_t i) { return MultiPoly::variable(n, i); }
NumForm unit_density(std::size_t n) {
    return top_form(n, [](const Vec&) { return 1.0; });
}

const std::vector<std::string> kCorpus = {"bubble",  "triangle", "banana3", "banana4",       "banana5",        "wheel3",
                                          "nested2", "bridge",   "box",     "double_bubble", "massive_bubble", "massive_banana3"};

// ---------------------------------------------------------------- 1

void exact_polynomial_suite(Checks& c) {
    for (const auto& name : kCorpus) {
        auto g = graph(name);
        std::optional<MomentumData> gram;
        if (name == "triangle") gram = triangle_gram();
        for (const auto& chk : exact_invariants(g, gram, 1, 20))
            c.expect(chk.ok || chk.skipped, name + ": " + chk.name + " " + chk.detail);
    }
    c.note(std::to_string(kCorpus.size()) + " graphs");
    // the bridge: Psi does not see the bridge edge, and the graph is not 1PI
    auto b = graph("bridge");
    std::size_t e3 = *b.find_edge("e3");
    auto psi = psi_polynomial(b);
    c.expect(!is_one_pi(b), "bridge graph reported 1PI");
    c.expect(psi.derivative(e3).is_zero(), "bridge: derivative along the bridge is nonzero");
    c.expect(!is_connected(delete_edge(b, "e3")), "bridge: deletion stays connected");
    EdgeSet rest;
    for (std::size_t e = 0; e < b.n_edges(); ++e)
        if (e != e3) rest.push_back(e);
    c.expect(!psi_of_edge_set(b, rest).is_zero(), "bridge: spanning forest polynomial of the rest vanished");
}

// ---------------------------------------------------------------- 2

void case_tables(Checks& c) {
    int cases = 0;
    for (int d : {2, 4, 6, 8})
        for (int l = 1; l <= 4; ++l)
            for (int n = 1; n <= 12; ++n) {
                auto a = case_table_affine(n, d, l);
                c.expect(a.m >= 1 && a.c == a.m * a.deg_f, "affine C = m deg f at n=" + std::to_string(n));
                auto s = case_table_sliced(n, d, l);
                c.expect(s.m >= 1 && s.c == s.m * s.deg_f, "sliced C = m deg f at k=" + std::to_string(n));
                cases += 2;
            }
    c.note(std::to_string(cases) + " tables");
    auto w1 = case_table_sliced(2, 4, 1);
    c.expect(w1.f_exp_psi == 1 && w1.f_exp_p == 0 && w1.m == 2 && w1.omega_exp_p == 0 && w1.r_max == 0,
             "worked example (k=2, D=4, l=1)");
    auto w2 = case_table_sliced(3, 4, 1);
    c.expect(w2.regime == Regime::Mixed && w2.m == 1 && w2.omega_exp_psi == 1 && w2.r_max == 2,
             "worked example (k=3, D=4, l=1)");
    auto w3 = case_table_sliced(2, 2, 1);
    c.expect(w3.regime == Regime::PDominant && w3.f_exp_p == 1 && w3.m == 1 && w3.omega_exp_psi == 0 && w3.r_max == 1,
             "worked example (k=2, D=2, l=1)");
}

// ---------------------------------------------------------------- 3

Character<Q> random_character(HopfAlgebra& h, const std::vector<int>& roots, std::uint64_t seed, int order = 6) {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> v(-6, 6);
    Character<Q> phi(order);
    for (int id : h.closure(roots)) {
        QSeries s(order);
        for (int k = -h.generator(id).loops; k <= order; ++k) s.set(k, Q(v(rng)) / (1 + std::abs(v(rng))));
        phi.set(id, s);
    }
    return phi;
}

void hopf_axioms(Checks& c, HopfAlgebra& h, const std::vector<int>& roots, const std::string& what) {
    for (int id : h.closure(roots)) {
        std::string name = what + " " + h.display_name(id);
        c.expect(h.generator(id).grade <= 4, name + ": grade above 4");
        c.expect(is_coassociative_on(h, id), name + ": coassociativity");
        Element self{{Monomial{id}, Q(1)}};
        auto [cl, cr] = counit_axiom_sides(h, {id});
        c.expect(cl == self && cr == self, name + ": counit");
        auto [al, ar] = antipode_axiom_sides(h, {id});
        c.expect(al == counit_element({id}) && ar == counit_element({id}), name + ": antipode");
    }
}

QSeries series(std::initializer_list<std::pair<int, Q>> coeffs, int order = 6) {
    QSeries s(order);
    for (const auto& [k, v] : coeffs) s.set(k, v);
    return s;
}

void hopf_suite(Checks& c) {
    const std::vector<std::string> small = {"bubble", "triangle", "banana3", "banana4", "nested2", "double_bubble", "box"};
    HopfAlgebra plain;
    std::vector<int> roots;
    for (const auto& n : small) roots.push_back(*plain.add_graph(graph(n)));
    hopf_axioms(c, plain, roots, "plain");

    HopfAlgebra dec;
    std::vector<int> droots;
    auto n2 = graph("nested2"), b4 = graph("banana4"), bub = graph("bubble");
    droots.push_back(*dec.add_decorated(n2, Subspace::make(edge_ids(n2), {{1, 2, -1, 3}})));
    droots.push_back(*dec.add_decorated(n2, Subspace::make(edge_ids(n2), {{0, 1, 1, 0}})));
    droots.push_back(*dec.add_decorated(b4, Subspace::make(edge_ids(b4), {{1, 2, 0, -1}, {0, 1, 1, 3}})));
    droots.push_back(*dec.add_decorated(b4, Subspace::make(edge_ids(b4), {{1, 0, 0, 0}, {0, 1, 0, 0}})));
    droots.push_back(*dec.add_decorated(bub, Subspace::make(edge_ids(bub), {{1, 1}})));
    hopf_axioms(c, dec, droots, "decorated");
    c.note(std::to_string(plain.closure(roots).size() + dec.closure(droots).size()) + " generators");

    // Rota-Baxter identity for the polar projection
    std::mt19937_64 rng(2024);
    std::uniform_int_distribution<int> v(-9, 9), lo(-4, 0);
    auto rnd = [&] {
        QSeries s(5);
        for (int k = lo(rng); k <= 5; ++k) s.set(k, Q(v(rng)) / (1 + std::abs(v(rng))));
        return s;
    };
    auto T = [](const QSeries& x) { return x.polar_part(); };
    bool rb = true;
    for (int trial = 0; trial < 100; ++trial) {
        QSeries a = rnd(), b = rnd();
        rb = rb && window_equal(T(a) * T(b), T(a * T(b)) + T(T(a) * b) - T(a * b));
    }
    c.expect(rb, "Rota-Baxter identity on 100 random series");

    // Birkhoff reconstruction and pole freedom
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto phi = random_character(plain, roots, seed);
        auto b = birkhoff(plain, phi, roots);
        auto minus_s = compose_antipode<Q>(plain, b.minus.as_map());
        for (int id : plain.closure(roots)) {
            std::string name = plain.display_name(id) + " seed " + std::to_string(seed);
            c.expect(b.plus.at(id).low() >= 0, name + ": renormalized part has a pole");
            c.expect(window_equal(b.minus.at(id).polar_part(), b.minus.at(id)), name + ": counterterm not polar");
            c.expect(window_equal(convolve<Q>(plain, minus_s, b.plus.as_map(), {id}), phi.at(id)),
                     name + ": reconstruction");
        }
    }

    // two-generator toy
    auto spec = character_spec_from_json(read_json_file(corpus("toy.character.json")), FEYNPAR_CORPUS_DIR);
    auto L = load_character(spec);
    int x2 = *L.algebra.find_name("x2");
    auto tb = birkhoff(L.algebra, L.phi_mu, L.roots);
    c.expect(tb.minus.at(x2).max_abs(8) == 0.0, "toy: counterterm of x2 nonzero");
    c.expect(tb.plus.at(x2).max_abs(8) == 0.0, "toy: renormalized x2 nonzero");

    // flatness of connection data
    for (auto g : {Grading::Edges, Grading::Loops})
        c.expect(connection_data(L.algebra, L.phi_mu, L.roots, g).residual == 0.0, "toy: flatness residual");
    auto phi = random_character(plain, roots, 9);
    c.expect(connection_data(plain, phi, roots, Grading::Edges).residual == 0.0, "corpus: flatness residual");
    c.expect(connection_data(plain, mu_character(plain, phi, Q(1) / 3, 6), roots, Grading::Loops).residual == 0.0,
             "corpus: flatness residual (mu character)");

    // scaling law for mu-prefactored characters
    for (Q t : std::vector<Q>{Q(0), Q(1) / 2, Q(-3)}) {
        auto mu0 = mu_character(plain, phi, Q(1) / 4, 6);
        auto mu1 = mu_character(plain, phi, Q(1) / 4 + t, 6);
        c.expect(scaling_check(plain, mu0, mu1, t) == 0.0, "scaling_check");
    }

    // grade-1 counterterms do not depend on mu
    HopfAlgebra h;
    int b = *h.add_graph(bub);
    int x = h.add_toy("x", 1, 1);
    Character<Q> p(6);
    p.set(b, series({{-1, Q(2)}, {0, Q(1) / 3}, {1, Q(5)}}));
    p.set(x, series({{-1, Q(-7) / 2}, {2, Q(1)}}));
    auto ref = birkhoff(h, mu_character(h, p, Q(0), 6), {b, x});
    for (Q mu : std::vector<Q>{Q(1), Q(-2) / 3, Q(5) / 2}) {
        auto other = birkhoff(h, mu_character(h, p, mu, 6), {b, x});
        c.expect(window_equal(other.minus.at(b), ref.minus.at(b)) && window_equal(other.minus.at(x), ref.minus.at(x)),
                 "grade-1 counterterm depends on mu");
    }
}

// ---------------------------------------------------------------- 4

void dimreg_oracle(Checks& c) {
    auto g = graph("bubble");
    auto s = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 2);
    // Gamma(1+z/2)^2 / Gamma(2+z) = 1 - z + (1 - pi^2/24) z^2 + ...
    c.near(s.coeffs[0], 1, 1e-6, "c0");
    c.near(s.coeffs[1], -1, 1e-6, "c1");
    c.near(s.coeffs[2], 1 - kPi * kPi / 24, 1e-6, "c2");
    auto u = feynman_U(g, MomentumData::two_leg(1), 4);
    c.near(s.coeffs[0], u.quad.value, 1e-8, "c0 against feynman_U");
    for (const char* name : {"massive_bubble", "massive_banana3"}) {
        auto gf = load(name);
        auto m = file_momenta(gf);
        int d = gf.graph.dimension;
        c.near(dimreg_series(gf.graph, m, d, 0, 0).coeffs[0], feynman_U(gf.graph, m, d).quad.value, 1e-8,
               std::string(name) + ": c0 against feynman_U");
    }
    // mu shift: exp(-z l log mu) composes additively, exactly
    QSeries q(6);
    q.set(-1, Q(1) / 2);
    q.set(0, 1);
    q.set(1, -1);
    Q a = Q(1) / 3, b = Q(-5) / 7;
    auto ab = apply_mass_scale_exact(apply_mass_scale_exact(q, 2, a, 6), 2, b, 6);
    c.expect(window_equal(ab, apply_mass_scale_exact(q, 2, a + b, 6)), "exact mu-shift composition");
    c.expect(apply_mass_scale_exact(q, 2, a, 6)[0] == Q(1) - 2 * a * Q(1) / 2, "exact mu-shift z^0 term");
    auto shifted = dimreg_series(g, MomentumData::two_leg(1), 4, 0.5, 2);
    auto applied = apply_mass_scale(s, 0.5);
    for (std::size_t k = 0; k < 3; ++k) c.near(shifted.coeffs[k], applied.coeffs[k], 1e-12, "numeric mu shift");
}

// ---------------------------------------------------------------- 5

void projective_identity_suite(Checks& c) {
    auto tri = feynman_identity(graph("triangle"), triangle_gram(), 4, true);
    c.expect(tri.identity.closed, "triangle: form not closed");
    c.near(tri.identity.residual, 0, 1e-4, "triangle residual");
    c.note("triangle residual " + sci(tri.identity.residual));
    auto f = var(2, 0) + var(2, 1);
    auto sq = projective_identity(f, IdentityForm{{}, MultiPoly::constant(2, 1)}, 2, square_chain(1, 2));
    c.near(sq.residual, 0, 1e-4, "square toy residual");
    c.near(sq.base, std::log(9.0 / 8), 1e-8, "square toy base integral");
    auto open = feynman_identity(graph("triangle"), triangle_gram(), 4, false);
    c.expect(!open.identity.closed && open.identity.residual > 1e-2,
             "open-form control residual " + sci(open.identity.residual) + " not above 1e-2");
    c.note("open control residual " + sci(open.identity.residual));
}

// ---------------------------------------------------------------- 6

void gelfand_leray_mellin(Checks& c) {
    auto disk = var(2, 0) * var(2, 0) + var(2, 1) * var(2, 1);
    GLOptions gl;
    gl.backward_last = true;
    for (const auto& s : gelfand_leray_J(disk, unit_density(2), Domain::ball(2, 1), geometric_grid(0.05, 0.8, 12), gl))
        c.near(s.value, kPi, 1e-3, "J(" + std::to_string(s.s) + ")");
    auto J = gelfand_leray_J(disk, unit_density(2), Domain::ball(2, 1), geometric_grid(0.01, 1, 30), gl);
    auto fit = fit_small_levels(J);
    c.near(fit.lambda, 0, 1e-2, "fit lambda");
    c.expect(fit.r == 0, "fit r");
    c.near(fit.a, kPi, 1e-2, "fit a");
    for (const auto& v : mellin_transform(J, {0, 0.5, 1, 2}, fit))
        c.near(v.value, kPi / (v.z + 1), 1e-4, "F(" + std::to_string(v.z) + ")");
    double z = -1 + 1e-2;
    auto near = mellin_transform(J, {z}, fit);
    c.near((z + 1) * near[0].value, kPi, 1e-2, "(z+1) F(z) at z = -0.99");
}

// ---------------------------------------------------------------- 7

void leray_suite(Checks& c) {
    auto disk = var(2, 0) * var(2, 0) + var(2, 1) * var(2, 1);
    auto grid = geometric_grid(0.02, 0.5, 30);
    int m = 1;
    auto res = leray_I_epsilon(disk, unit_density(2), Domain::ball(2, 1), m, grid);
    c.expect(res.all_finite, "disk: non-finite sample");
    c.expect(res.fitted, "disk: no fit");
    c.near(res.nu, m, 0.15, "disk nu");
    auto alpha = top_form(2, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; });
    auto reg = leray_I_epsilon(disk, alpha, Domain::ball(2, 1), m, grid);
    c.expect(reg.all_finite && reg.fitted, "smooth control: non-finite sample or no fit");
    c.near(reg.nu, 0, 0.1, "smooth control nu");
    c.note("nu " + sci(res.nu) + ", control " + sci(reg.nu));
}

// ---------------------------------------------------------------- 8

void milnor_suite(Checks& c) {
    using Mu = std::optional<std::size_t>;
    auto x = var(2, 0), y = var(2, 1);
    std::vector<Q> o2 = {0, 0}, o3 = {0, 0, 0};
    c.expect(milnor_number(x * x + y * y, o2) == Mu(1), "A1");
    c.expect(milnor_number(x.pow(3) - y * y, o2) == Mu(2), "cusp");
    auto a = var(3, 0), b = var(3, 1), cc = var(3, 2);
    c.expect(milnor_number(a.pow(3) + b.pow(3) + cc.pow(3), o3) == Mu(8), "cubic cone");
    for (unsigned p = 2; p <= 4; ++p)
        for (unsigned q = 2; q <= 4; ++q)
            c.expect(milnor_number(x.pow(p) + y.pow(q), o2) == Mu((p - 1) * (q - 1)),
                     "u1^" + std::to_string(p) + " + u2^" + std::to_string(q));

    auto b3 = graph("banana3");
    auto psi = psi_polynomial(b3);
    std::set<std::size_t> mus;
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        auto rep = milnor_report(psi, make_slice(3, 2, seed));
        c.expect(rep.transversal, "banana-3 slice not transversal, seed " + std::to_string(seed));
        for (const auto& p : rep.points)
            if (p.point.cone_origin && p.milnor_mu) mus.insert(*p.milnor_mu);
    }
    c.expect(mus == std::set<std::size_t>{1}, "banana-3 milnor number varies across seeds");

    auto r = resolve_momenta(b3, MomentumData::two_leg_symbolic());
    for (std::vector<int> dims : {std::vector<int>{2}, std::vector<int>{4}, std::vector<int>{2, 4}})
        for (std::uint64_t seed : {1u, 2u, 3u}) {
            auto s = make_slice(3, 2, seed);
            auto one = feynman_subspace_dim(b3, s, dims, r.leg_vertex1, r.leg_vertex2, {0, 0});
            auto two = feynman_subspace_dim(b3, make_slice(3, 2, seed), dims, r.leg_vertex1, r.leg_vertex2, {0, 0});
            c.expect(one.dim == two.dim && one.certificates == two.certificates, "feynman_subspace_dim not deterministic");
            std::vector<int> exps;
            for (int d : dims) {
                int e = -2 + d * loop_number(b3) / 2;
                if (std::find(exps.begin(), exps.end(), e) == exps.end()) exps.push_back(e);
            }
            c.expect(one.dim == fpt::brute_force_rank(restrict(psi, s), fpt::tree_products(b3, s, exps)),
                     "feynman_subspace_dim differs from the row-reduction oracle, seed " + std::to_string(seed));
        }
}

// ---------------------------------------------------------------- 9

void point_counts(Checks& c) {
    auto psi = psi_polynomial(graph("banana3"));
    c.expect(finite_field_point_count(psi, 2, false) == 4, "banana-3 over F2");
    c.expect(fpt::naive_count(psi, 2) == 4, "banana-3 over F2 (naive evaluator)");
    for (const auto& name : kCorpus) {
        auto p = psi_polynomial(graph(name));
        for (std::uint64_t q : {2u, 3u, 5u}) {
            auto aff = finite_field_point_count(p, q, false), proj = finite_field_point_count(p, q, true);
            c.expect(aff - 1 == (q - 1) * proj, name + ": cone identity at q=" + std::to_string(q));
            if (p.arity() <= 6) c.expect(aff == fpt::naive_count(p, q), name + ": naive count at q=" + std::to_string(q));
        }
    }
}

// ---------------------------------------------------------------- 10

void iterated_integrals(Checks& c) {
    for (std::size_t n = 1; n <= 3; ++n)
        c.near(iterated_log_integral(1.0, std::exp(1.0), n).value, 1 / detail::factorial(static_cast<int>(n)), 1e-6,
               "Lambda(" + std::to_string(n) + ")");
    // bubble: Psi = 1 on the simplex, so only the constant term survives
    auto g = graph("bubble");
    auto z = log_zeta_coeffs(g, MomentumData::two_leg(1), 4, 3);
    auto s = dimreg_series(g, MomentumData::two_leg(1), 4, 0, 3, {}, LogMode::PsiOnly);
    for (std::size_t k = 0; k <= 3; ++k) c.near(s.coeffs[k], std::pow(-0.5, k) * z.coeffs[k], 1e-8, "bubble k=" + std::to_string(k));
    for (std::size_t k = 1; k <= 3; ++k) c.near(z.coeffs[k], 0, 1e-12, "bubble zeta_" + std::to_string(k));
    // massive banana-3 at D = 2 has a nontrivial Psi on the simplex
    auto gf = load("massive_banana3");
    auto m = file_momenta(gf);
    auto zb = log_zeta_coeffs(gf.graph, m, 2, 3);
    auto sb = dimreg_series(gf.graph, m, 2, 0, 3, {}, LogMode::PsiOnly);
    for (std::size_t k = 0; k <= 3; ++k) {
        c.near(sb.coeffs[k], std::pow(-0.5, k) * zb.coeffs[k], 1e-7, "massive banana-3 k=" + std::to_string(k));
        if (k >= 1) c.expect(std::fabs(zb.coeffs[k]) > 1e-3, "massive banana-3 zeta_k vanished");
    }
}

struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<void(Checks&)> run;
};

}  // namespace

int main() {
    std::vector<Criterion> all = {
        {1, "exact polynomial suite", 10, exact_polynomial_suite},
        {2, "case tables", 1, case_tables},
        {3, "Hopf suite", 30, hopf_suite},
        {4, "dimreg oracle", 60, dimreg_oracle},
        {5, "projective identity", 120, projective_identity_suite},
        {6, "Gelfand-Leray / Mellin", 120, gelfand_leray_mellin},
        {7, "Leray regularization", 180, leray_suite},
        {8, "Milnor suite", 60, milnor_suite},
        {9, "point counts", 10, point_counts},
        {10, "iterated integrals", 30, iterated_integrals},
    };
    int failed = 0;
    for (const auto& cr : all) {
        Checks c;
        auto t0 = std::chrono::steady_clock::now();
        std::string crash;
        try {
            cr.run(c);
        } catch (const std::exception& e) {
            crash = e.what();
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        bool in_time = secs < cr.budget_s;
        bool pass = c.ok() && crash.empty() && in_time;
        if (!pass) ++failed;
        std::string notes;
        for (const auto& n : c.notes()) notes += (notes.empty() ? "" : "; ") + n;
        std::printf("criterion %2d  %-26s %s  %8.3f s (budget %g s)  %d checks%s%s\n", cr.id, cr.name,
                    pass ? "PASS" : "FAIL", secs, cr.budget_s, c.total(), notes.empty() ? "" : "  ", notes.c_str());
        for (const auto& f : c.failures()) std::printf("    failed: %s\n", f.c_str());
        if (!crash.empty()) std::printf("    exception: %s\n", crash.c_str());
        if (!in_time) std::printf("    over budget\n");
    }
    std::printf("%s: %d of %zu criteria passed\n", failed ? "FAIL" : "PASS", static_cast<int>(all.size()) - failed,
                all.size());
    return failed ? 1 : 0;
}
