// feynpar: command-line front end. One JSON document (or CSV) on stdout,
// diagnostics on stderr. Exit codes: 0 ok, 2 parse/validation, 3 numeric
// tolerance or failed check, 4 precondition.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "feynpar/case_tables.hpp"
#include "feynpar/feynman.hpp"
#include "feynpar/finite_field.hpp"
#include "feynpar/gelfand_leray.hpp"
#include "feynpar/hopf.hpp"
#include "feynpar/invariants.hpp"
#include "feynpar/io.hpp"
#include "feynpar/leray.hpp"
#include "feynpar/mellin.hpp"
#include "feynpar/slicing.hpp"
#include "feynpar/zeta.hpp"

namespace fs = std::filesystem;
using namespace feynpar;

namespace {

enum Exit { kOk = 0, kParse = 2, kTolerance = 3, kPrecondition = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
        case ErrorKind::Parse:
        case ErrorKind::MalformedGraph:
        case ErrorKind::UnknownEdge:
        case ErrorKind::NotASubgraph:
        case ErrorKind::ArityMismatch:
        case ErrorKind::MomentumNotConserved:
        case ErrorKind::BadLegConfiguration:
            return kParse;
        case ErrorKind::ToleranceNotReached:
        case ErrorKind::FitUnstable:
        case ErrorKind::Timeout:
            return kTolerance;
        default:
            return kPrecondition;
    }
}

std::uint64_t default_seed() {
    if (const char* s = std::getenv("FEYNPAR_SEED")) {
        try {
            return std::stoull(s);
        } catch (const std::exception&) {
            std::cerr << "warning: ignoring non-numeric FEYNPAR_SEED\n";
        }
    }
    return 1;
}

struct RunConfig {
    std::vector<std::string> inputs;
    std::string gram_path, slice_path, poly_path, toy, plot_path;
    std::string p2, mass2;
    int dim = 0;
    int order = 2;
    double mu = 1;
    std::uint64_t seed = default_seed();
    unsigned threads = 1;
    double tol = 1e-8;
    std::size_t max_evals = 4000000;
    bool allow_divergent = false;
};

// Report skeleton shared by every command.
struct Report {
    std::string command;
    InputHash hash;
    json body = json::object();
    bool numeric = false;
    bool failed = false;

    std::string read(const std::string& path) {
        std::string text = read_text_file(path);
        hash.add(text);
        return text;
    }
    json read_json(const std::string& path) { return parse_json_text(read(path), path); }
    GraphFile read_graph(const std::string& path) {
        json j = read_json(path);
        try {
            return graph_from_json(j);
        } catch (const json::exception& e) {
            throw Error(ErrorKind::Parse, path + ": " + e.what());
        }
    }
};

json header(const Report& r, const RunConfig& c) {
    json h;
    h["command"] = r.command;
    h["input_hash"] = r.hash.hex();
    if (r.numeric) {
        h["seed"] = c.seed;
        h["tolerance"] = c.tol;
        h["eval_budget"] = c.max_evals;
        h["threads"] = c.threads;
    }
    return h;
}

QuadOptions quad_options(const RunConfig& c) {
    QuadOptions q;
    q.rel_tol = c.tol;
    q.abs_tol = c.tol * 1e-2;
    q.max_evals = c.max_evals;
    q.seed = c.seed;
    q.threads = c.threads;
    return q;
}

FeynmanOptions feynman_options(const RunConfig& c) { return {quad_options(c), c.allow_divergent}; }

json quad_json(const QuadratureResult& q) {
    return {{"value", q.value}, {"error", q.error}, {"evals", q.evals}, {"method", quad_method_name(q.method)},
            {"converged", q.converged}};
}

std::vector<std::string> edge_names(const FeynmanGraph& g) { return default_names(g.n_edges()); }

// Momenta: --gram, then --p2, then the graph's kinematics block; symbolic two-leg otherwise.
MomentumData momenta(Report& r, const RunConfig& c, const GraphFile& gf, bool need_numeric) {
    MomentumData m;
    if (!c.gram_path.empty()) {
        m = gram_from_json(r.read_json(c.gram_path));
    } else if (!c.p2.empty()) {
        m = MomentumData::two_leg(parse_rational(c.p2));
    } else if (gf.p2) {
        m = MomentumData::two_leg(*gf.p2);
    } else {
        require(!need_numeric, ErrorKind::Precondition, "numeric momenta required: pass --p2 or --gram");
        m = MomentumData::two_leg_symbolic();
    }
    if (!c.mass2.empty()) m.mass2 = parse_rational(c.mass2);
    else if (m.mass2 == 0) m.mass2 = gf.mass2;
    return m;
}

int dimension(const RunConfig& c, const GraphFile& gf) {
    int d = c.dim ? c.dim : gf.graph.dimension;
    require(d > 0, ErrorKind::Precondition, "spacetime dimension required: pass --D");
    return d;
}

// Symbolic two-leg P carries p^2 as an extra last variable.
std::vector<std::string> poly_names(const FeynmanGraph& g, std::size_t arity) {
    auto names = edge_names(g);
    if (arity > g.n_edges()) names.push_back("p2");
    return names;
}

MultiPoly read_poly(Report& r, const std::string& path) {
    std::string text = r.read(path);
    std::istringstream in(text);
    std::string line;
    std::size_t arity = 0;
    while (std::getline(in, line)) {
        std::istringstream ls(line);
        std::string tag, coef, colon;
        if (!(ls >> tag >> coef >> colon)) continue;
        int x;
        while (ls >> x) ++arity;
        break;
    }
    require(arity > 0, ErrorKind::Parse, "polynomial file has no terms");
    return MultiPoly::parse_serialized(text, arity);
}

std::vector<Q> parse_point(const std::string& s, std::size_t n) {
    std::vector<Q> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(parse_rational(tok));
    if (v.empty()) v.assign(n, Q(0));
    require(v.size() == n, ErrorKind::ArityMismatch, "point has the wrong number of coordinates");
    return v;
}

void write_csv(const std::string& path, const std::string& head, const std::vector<std::vector<double>>& rows) {
    if (path.empty()) return;
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorKind::Parse, "cannot write '" + path + "'");
    out.precision(17);
    out << head << "\n";
    for (const auto& r : rows) {
        for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << r[i];
        out << "\n";
    }
}

// ------------------------------------------------------------ exact commands

void cmd_poly(Report& r, const RunConfig& c) {
    require(c.inputs.size() == 1, ErrorKind::Parse, "poly takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    const FeynmanGraph& g = gf.graph;
    // symbolic p^2 unless momenta are given on the command line
    GraphFile bare{gf.graph, std::nullopt, Q(0)};
    MomentumData m = momenta(r, c, bare, false);
    MultiPoly psi = psi_polynomial(g);
    json out;
    out["graph"] = g.name;
    out["edges"] = json::array();
    for (const auto& e : g.edges) out["edges"].push_back(e.id);
    out["loops"] = loop_number(g);
    out["psi"] = psi.to_string(edge_names(g));
    out["psi_serialized"] = psi.serialize();
    if (!g.legs.empty()) {
        MultiPoly P = second_symanzik(g, m);
        auto names = poly_names(g, P.arity());
        out["P"] = P.to_string(names);
        out["P_serialized"] = P.serialize();
        out["momentum_mode"] = m.mode == MomentumData::Mode::Gram ? "gram" : (m.symbolic() ? "two-leg symbolic" : "two-leg");
        if (m.mass2 != 0) {
            VFunction v = v_function(g, m);
            out["V_numerator"] = v.numerator.to_string(names);
        }
        auto cert = generic_condition(g, m, c.seed);
        out["generic"] = {{"holds", cert.holds}, {"reason", cert.reason}, {"checks", cert.checks}};
    }
    r.body = out;
}

// Graph files in the inputs (directories expanded); Gram files are "<stem>.gram.json".
std::vector<std::string> graph_paths(const std::vector<std::string>& inputs) {
    std::vector<std::string> out;
    for (const auto& in : inputs) {
        if (fs::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& e : fs::directory_iterator(in)) {
                std::string p = e.path().string();
                if (e.path().extension() != ".json") continue;
                auto stem = e.path().stem().string();
                if (stem.size() > 5 && stem.substr(stem.size() - 5) == ".gram") continue;
                found.push_back(p);
            }
            std::sort(found.begin(), found.end());
            out.insert(out.end(), found.begin(), found.end());
        } else {
            out.push_back(in);
        }
    }
    return out;
}

void cmd_check(Report& r, const RunConfig& c) {
    require(!c.inputs.empty(), ErrorKind::Parse, "check takes graph files or directories");
    json results = json::array();
    bool all = true;
    for (const auto& path : graph_paths(c.inputs)) {
        json j = r.read_json(path);
        if (!j.is_object() || !j.contains("edges")) continue;  // specs, slices
        GraphFile gf = graph_from_json(j);
        std::optional<MomentumData> gram;
        fs::path gp = fs::path(path).replace_extension(".gram.json");
        if (fs::exists(gp)) gram = gram_from_json(r.read_json(gp.string()));
        json checks = json::array();
        for (const auto& ck : exact_invariants(gf.graph, gram, c.seed)) {
            all = all && ck.ok;
            checks.push_back({{"name", ck.name}, {"ok", ck.ok}, {"skipped", ck.skipped}, {"detail", ck.detail}});
        }
        results.push_back({{"graph", gf.graph.name}, {"file", fs::path(path).filename().string()}, {"checks", checks}});
    }
    r.body = {{"all_passed", all}, {"graphs", results}};
    r.failed = !all;
}

// ------------------------------------------------------------ Hopf algebra

struct AlgebraInput {
    std::unique_ptr<LoadedCharacter> loaded;  // when a character spec is given
    std::unique_ptr<HopfAlgebra> plain;       // graphs only
    std::vector<int> roots;
    HopfAlgebra& algebra() { return loaded ? loaded->algebra : *plain; }
};

DivergenceRule divergence_rule(const RunConfig& c, const std::vector<GraphFile>& graphs) {
    DivergenceRule rule;
    if (!graphs.empty()) rule.theory_power = graphs[0].graph.theory_power;
    int d = c.dim ? c.dim : (!graphs.empty() ? graphs[0].graph.dimension : 0);
    rule.dimension = d ? d : 4;
    return rule;
}

AlgebraInput load_algebra(Report& r, const RunConfig& c, DecorationRule drule) {
    require(!c.inputs.empty(), ErrorKind::Parse, "expected a character spec or graph files");
    AlgebraInput in;
    json first = r.read_json(c.inputs[0]);
    if (first.is_object() && first.contains("values")) {
        require(c.inputs.size() == 1, ErrorKind::Parse, "one character spec at a time");
        CharacterSpec spec = character_spec_from_json(first, fs::path(c.inputs[0]).parent_path().string());
        std::vector<GraphFile> graphs;
        for (const auto& p : spec.graph_files) graphs.push_back(r.read_graph(p));
        in.loaded = std::make_unique<LoadedCharacter>(load_character(spec, divergence_rule(c, graphs), drule));
        in.roots = in.loaded->roots;
        return in;
    }
    std::vector<GraphFile> graphs{graph_from_json(first)};
    for (std::size_t i = 1; i < c.inputs.size(); ++i) graphs.push_back(r.read_graph(c.inputs[i]));
    in.plain = std::make_unique<HopfAlgebra>(divergence_rule(c, graphs), drule);
    std::optional<Subspace> slice;
    if (!c.slice_path.empty()) {
        require(graphs.size() == 1, ErrorKind::Parse, "a slice decorates a single graph");
        SliceFile sf = slice_file_from_json(r.read_json(c.slice_path));
        LinearSlice ls = linear_slice_from_file(sf, graphs[0].graph.n_edges());
        slice = Subspace::make(edge_ids(graphs[0].graph), ls.basis);
    }
    for (const auto& gf : graphs) {
        auto id = slice ? in.plain->add_decorated(gf.graph, *slice) : in.plain->add_graph(gf.graph);
        if (id) in.roots.push_back(*id);
    }
    return in;
}

json element_json(HopfAlgebra& h, const Element& e) {
    json a = json::array();
    for (const auto& [m, q] : e) a.push_back({{"coef", to_fraction_string(q)}, {"term", h.describe(m)}});
    return a;
}

json tensor_json(HopfAlgebra& h, const TensorElement& t) {
    json a = json::array();
    for (const auto& [k, q] : t)
        a.push_back({{"coef", to_fraction_string(q)}, {"left", h.describe(k.first)}, {"right", h.describe(k.second)}});
    return a;
}

void cmd_hopf(Report& r, const RunConfig& c, const std::string& what, DecorationRule drule) {
    AlgebraInput in = load_algebra(r, c, drule);
    HopfAlgebra& h = in.algebra();
    json gens = json::array();
    bool ok = true;
    if (what == "coproduct" || what == "antipode") {
        for (int id : h.closure(in.roots)) {
            json g;
            g["generator"] = h.display_name(id);
            g["grade"] = h.generator(id).grade;
            if (what == "coproduct") {
                g["coproduct"] = tensor_json(h, h.coproduct(id));
                bool co = is_coassociative_on(h, id);
                auto [cl, cr] = counit_axiom_sides(h, {id});
                g["coassociative"] = co;
                g["counit"] = cl == cr;
                ok = ok && co && cl == cr;
            } else {
                g["antipode"] = element_json(h, h.antipode(id));
                auto [al, ar] = antipode_axiom_sides(h, {id});
                g["antipode_axiom"] = al == ar;
                ok = ok && al == ar;
            }
            gens.push_back(g);
        }
        r.body = {{"generators", gens}, {"axioms_hold", ok}};
        r.failed = !ok;
        return;
    }
    require(in.loaded != nullptr, ErrorKind::Parse, "birkhoff needs a character spec");
    auto b = birkhoff(h, in.loaded->phi_mu, in.roots);
    for (int id : h.closure(in.roots)) {
        const auto& plus = b.plus.at(id);
        bool pole_free = plus.low() >= 0;
        ok = ok && pole_free;
        gens.push_back({{"generator", h.display_name(id)},
                        {"phi", series_to_json(in.loaded->phi_mu.at(id))},
                        {"phi_minus", series_to_json(b.minus.at(id))},
                        {"phi_plus", series_to_json(plus)},
                        {"phi_plus_pole_free", pole_free}});
    }
    r.body = {{"generators", gens}, {"all_pole_free", ok}};
    r.failed = !ok;
}

void cmd_renorm(Report& r, const RunConfig& c) {
    AlgebraInput in = load_algebra(r, c, DecorationRule::RestrictedDimension);
    require(in.loaded != nullptr, ErrorKind::Parse, "renorm needs a character spec");
    HopfAlgebra& h = in.algebra();
    const auto& L = *in.loaded;
    auto b = birkhoff(h, L.phi_mu, in.roots);
    // the same subtraction one unit of log mu higher
    auto b_up = birkhoff(h, mu_character(h, L.phi, L.log_mu + 1, L.phi.order()), in.roots);
    json out = json::array();
    for (int id : in.roots) {
        auto rv = renormalized_value(b, id);
        out.push_back({{"generator", h.display_name(id)},
                       {"renormalized_value", to_fraction_string(rv.value)},
                       {"counterterm", series_to_json(rv.counterterm)},
                       {"counterterm_mu_shift", series_deviation(b.minus.at(id), b_up.minus.at(id))}});
    }
    r.body = {{"roots", out}};
}

void cmd_connection(Report& r, const RunConfig& c, const std::string& grading) {
    AlgebraInput in = load_algebra(r, c, DecorationRule::RestrictedDimension);
    require(in.loaded != nullptr, ErrorKind::Parse, "connection needs a character spec");
    HopfAlgebra& h = in.algebra();
    const auto& L = *in.loaded;
    Grading gr = grading == "edges" ? Grading::Edges : Grading::Loops;
    auto cd = connection_data(h, L.phi_mu, in.roots, gr);
    json gens = json::array();
    for (int id : h.closure(in.roots))
        gens.push_back({{"generator", h.display_name(id)}, {"a", series_to_json(cd.a.at(id))},
                        {"b", series_to_json(cd.b.at(id))}});
    r.body = {{"grading", grading}, {"flatness_residual", cd.residual}, {"generators", gens}};
    r.failed = cd.residual != 0;
}

// ------------------------------------------------------------ slicing

LinearSlice load_slice(Report& r, const RunConfig& c, std::size_t ambient, int dim) {
    if (!c.slice_path.empty()) return linear_slice_from_file(slice_file_from_json(r.read_json(c.slice_path)), ambient);
    require(dim > 0, ErrorKind::Precondition, "pass --slice or --dim");
    return make_slice(ambient, static_cast<std::size_t>(dim), c.seed);
}

SingularSearchOptions search_options(const RunConfig& c, const std::string& mode) {
    SingularSearchOptions o;
    o.seed = c.seed;
    if (mode == "affine") o.mode = SingularSearch::Affine;
    else if (mode == "projective") o.mode = SingularSearch::Projective;
    return o;
}

json mu_json(const std::optional<std::size_t>& mu) {
    return mu ? json(*mu) : json("infinite");
}

json point_json(const SingularPoint& p) {
    json j;
    j["tag"] = p.tag == PointTag::Exact ? "exact" : "numeric";
    if (p.tag == PointTag::Exact) {
        j["exact"] = json::array();
        for (const auto& x : p.exact) j["exact"].push_back(to_fraction_string(x));
    }
    j["approx"] = p.approx;
    j["projective"] = p.projective;
    j["cone_origin"] = p.cone_origin;
    return j;
}

void cmd_slice(Report& r, const RunConfig& c, int dim) {
    require(c.inputs.size() == 1, ErrorKind::Parse, "slice takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    LinearSlice s = load_slice(r, c, gf.graph.n_edges(), dim);
    MultiPoly f = restrict(psi_polynomial(gf.graph), s);
    r.body = {{"slice", slice_to_json(s)}, {"consistent", slice_is_consistent(s)},
              {"restricted_psi", f.to_string(default_names(s.dim, "u"))}};
}

void cmd_milnor(Report& r, const RunConfig& c, int dim, const std::string& mode) {
    auto opt = search_options(c, mode);
    if (!c.poly_path.empty()) {
        MultiPoly f = read_poly(r, c.poly_path);
        json pts = json::array();
        for (const auto& p : find_singular_points(f, opt)) {
            json pj = point_json(p);
            if (p.tag == PointTag::Exact)
                pj["milnor_mu"] = mu_json(p.projective ? projective_milnor_number(f, p.exact) : milnor_number(f, p.exact));
            pts.push_back(pj);
        }
        r.body = {{"polynomial", f.to_string(default_names(f.arity(), "u"))}, {"points", pts},
                  {"global_quotient_dim", mu_json(global_jacobian_dimension(f))}};
        return;
    }
    require(c.inputs.size() == 1, ErrorKind::Parse, "milnor takes one graph file (or --poly)");
    GraphFile gf = r.read_graph(c.inputs[0]);
    LinearSlice s = load_slice(r, c, gf.graph.n_edges(), dim);
    auto rep = milnor_report(psi_polynomial(gf.graph), s, opt);
    json pts = json::array();
    for (const auto& p : rep.points) {
        json pj = point_json(p.point);
        pj["milnor_mu"] = p.point.tag == PointTag::Exact ? mu_json(p.milnor_mu) : json(nullptr);
        pts.push_back(pj);
    }
    r.body = {{"slice", slice_to_json(s)},
              {"restricted", rep.restricted.to_string(default_names(s.dim, "u"))},
              {"points", pts},
              {"global_quotient_dim", mu_json(rep.global_quotient_dim)},
              {"rerandomized_quotient_dim", mu_json(rep.rerandomized_quotient_dim)},
              {"transversal", rep.transversal}};
}

void cmd_feynman_subspace(Report& r, const RunConfig& c, int dim, const std::string& dims, const std::string& point) {
    require(c.inputs.size() == 1, ErrorKind::Parse, "feynman-subspace takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    LinearSlice s = load_slice(r, c, gf.graph.n_edges(), dim);
    std::vector<int> ds;
    std::stringstream ss(dims);
    std::string tok;
    while (std::getline(ss, tok, ',')) ds.push_back(std::stoi(tok));
    if (ds.empty()) ds.push_back(c.dim ? c.dim : 4);
    auto res = resolve_momenta(gf.graph, MomentumData::two_leg_symbolic());
    auto pt = parse_point(point, s.dim);
    auto out = feynman_subspace_dim(gf.graph, s, ds, res.leg_vertex1, res.leg_vertex2, pt);
    r.body = {{"slice", slice_to_json(s)},
              {"dimensions", ds},
              {"exponents", out.exponents},
              {"subspace_dim", out.dim},
              {"milnor_mu", mu_json(out.milnor_mu)},
              {"generators", out.generators},
              {"certificates", out.certificates}};
}

void cmd_count_points(Report& r, const RunConfig& c, const std::string& qs, bool projective) {
    MultiPoly f;
    if (!c.poly_path.empty()) f = read_poly(r, c.poly_path);
    else {
        require(c.inputs.size() == 1, ErrorKind::Parse, "count-points takes one graph file (or --poly)");
        f = psi_polynomial(r.read_graph(c.inputs[0]).graph);
    }
    json counts = json::array();
    std::stringstream ss(qs);
    std::string tok;
    bool ok = true;
    while (std::getline(ss, tok, ',')) {
        std::uint64_t q = std::stoull(tok);
        json e{{"q", q}, {"affine", finite_field_point_count(f, q, false)}};
        if (projective || f.is_homogeneous()) {
            auto pc = finite_field_point_count(f, q, true);
            e["projective"] = pc;
            if (f.is_homogeneous()) {
                bool id = e["affine"].get<std::uint64_t>() - 1 == (q - 1) * pc;
                e["cone_identity"] = id;
                ok = ok && id;
            }
        }
        counts.push_back(e);
    }
    r.body = {{"polynomial", f.to_string()}, {"counts", counts}};
    r.failed = !ok;
}

// ------------------------------------------------------------ numeric

void cmd_integrate(Report& r, const RunConfig& c) {
    r.numeric = true;
    require(c.inputs.size() == 1, ErrorKind::Parse, "integrate takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    auto m = momenta(r, c, gf, true);
    int d = dimension(c, gf);
    auto u = feynman_U(gf.graph, m, d, feynman_options(c));
    r.body = {{"graph", gf.graph.name}, {"D", d}, {"integral", quad_json(u.quad)}, {"prefactor", u.prefactor}};
    r.failed = !u.quad.converged;
}

void cmd_dimreg(Report& r, const RunConfig& c, const std::string& mode_s) {
    r.numeric = true;
    require(c.inputs.size() == 1, ErrorKind::Parse, "dimreg takes one graph file");
    require(c.mu > 0, ErrorKind::Precondition, "mass scale must be positive");
    GraphFile gf = r.read_graph(c.inputs[0]);
    auto m = momenta(r, c, gf, true);
    int d = dimension(c, gf);
    LogMode mode = mode_s == "psi" ? LogMode::PsiOnly : mode_s == "v" ? LogMode::VOnly : LogMode::Full;
    auto s = dimreg_series(gf.graph, m, d, std::log(c.mu), static_cast<std::size_t>(c.order), feynman_options(c), mode);
    ParametricIntegrand p = parametric_integrand(gf.graph, m, d);
    json coeffs = json::array();
    std::vector<std::vector<double>> rows;
    for (std::size_t k = 0; k < s.coeffs.size(); ++k) {
        coeffs.push_back({{"k", k}, {"value", s.coeffs[k]}, {"error", s.errors[k]}});
        rows.push_back({static_cast<double>(k), s.coeffs[k], s.errors[k]});
    }
    write_csv(c.plot_path, "k,c_k,error", rows);
    r.body = {{"graph", gf.graph.name}, {"D", d}, {"mu", c.mu}, {"mass_rule", s.mass_rule},
              {"log_mode", mode_s}, {"coefficients", coeffs}, {"loops", s.loops},
              {"prefactor", feynman_prefactor(p.n, d, p.loops)}, {"quadrature", quad_json(s.quad)}};
    r.failed = !s.quad.converged;
}

json identity_json(const IdentityReport& id) {
    return {{"m", id.m}, {"deg_f", id.deg_f}, {"base", id.base}, {"lhs", id.lhs}, {"boundary", id.boundary},
            {"interior", id.interior}, {"rhs", id.rhs}, {"residual", id.residual}, {"rhs_unit", id.rhs_unit},
            {"residual_unit", id.residual_unit}, {"error_estimate", id.error_estimate}, {"closed", id.closed},
            {"converged", id.converged}};
}

void cmd_identity(Report& r, const RunConfig& c, bool open) {
    r.numeric = true;
    if (c.toy == "square") {
        MultiPoly f = MultiPoly::variable(2, 0) + MultiPoly::variable(2, 1);
        auto id = projective_identity(f, IdentityForm{{}, MultiPoly::constant(2, 1)}, 2, square_chain(1, 2),
                                      quad_options(c));
        r.body = {{"toy", "square"}, {"identity", identity_json(id)}};
        r.failed = !id.converged;
        return;
    }
    require(c.toy.empty(), ErrorKind::Parse, "identity-check toy must be 'square'");
    require(c.inputs.size() == 1, ErrorKind::Parse, "identity-check takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    auto m = momenta(r, c, gf, true);
    int d = dimension(c, gf);
    auto rep = feynman_identity(gf.graph, m, d, !open, feynman_options(c));
    json field = json::array();
    for (const auto& F : rep.field) field.push_back(F.to_string(edge_names(gf.graph)));
    r.body = {{"graph", gf.graph.name},
              {"D", d},
              {"regime", regime_name(rep.table.regime)},
              {"f", describe_product(rep.table.f_exp_p, rep.table.f_exp_psi)},
              {"field", field},
              {"feynman_value", rep.feynman_value},
              {"identity", identity_json(rep.identity)}};
    r.failed = !rep.identity.converged;
}

struct LevelProblem {
    std::string label;
    MultiPoly f;
    NumForm alpha;
    Domain dom;
    bool backward_last = false;
    int m = 1;
};

LevelProblem toy_problem(const std::string& toy) {
    auto u1 = MultiPoly::variable(2, 0), u2 = MultiPoly::variable(2, 1);
    if (toy == "disk") return {"disk", u1 * u1 + u2 * u2, top_form(2, [](const Vec&) { return 1.0; }), Domain::ball(2, 1), true, 1};
    if (toy == "regular")
        return {"regular", u1 * u1 + u2 * u2, top_form(2, [](const Vec& x) { return x[0] * x[0] + x[1] * x[1]; }),
                Domain::ball(2, 1), true, 1};
    if (toy == "square") return {"square", u1, top_form(2, [](const Vec&) { return 1.0; }), Domain::box(2, 0, 1), true, 1};
    throw Error(ErrorKind::Parse, "unknown toy '" + toy + "' (disk, regular, square)");
}

LevelProblem graph_level_problem(Report& r, const RunConfig& c) {
    require(c.inputs.size() == 1, ErrorKind::Parse, "expected one graph file or --toy");
    GraphFile gf = r.read_graph(c.inputs[0]);
    std::size_t n = gf.graph.n_edges();
    require(n >= 2 && n <= 4, ErrorKind::TooLarge, "level-set sampling supports 2 to 4 edges");
    return {gf.graph.name, dehomogenize_simplex(psi_polynomial(gf.graph)),
            top_form(n - 1, [](const Vec&) { return 1.0; }), Domain::simplex(n - 1), false, 1};
}

std::vector<double> parse_doubles(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) v.push_back(std::stod(tok));
    return v;
}

void cmd_gl_mellin(Report& r, const RunConfig& c, double lo, double hi, std::size_t points, const std::string& zs) {
    r.numeric = true;
    LevelProblem p = c.toy.empty() ? graph_level_problem(r, c) : toy_problem(c.toy);
    GLOptions gl;
    gl.backward_last = p.backward_last;
    auto grid = geometric_grid(lo, hi, points);
    auto J = gelfand_leray_J(p.f, p.alpha, p.dom, grid, gl);
    json samples = json::array();
    std::vector<std::vector<double>> rows;
    for (const auto& s : J) {
        samples.push_back({{"s", s.s}, {"J", s.value}, {"error", s.error}});
        rows.push_back({s.s, s.value, s.error});
    }
    write_csv(c.plot_path, "s,J,error", rows);
    r.body = {{"problem", p.label}, {"domain", domain_name(p.dom.kind)}, {"samples", samples}};
    auto fit = fit_small_levels(J);
    r.body["fit"] = {{"lambda", fit.lambda}, {"r", fit.r}, {"a", fit.a}, {"residual", fit.residual},
                     {"pole", fit.pole()}, {"pole_order", fit.pole_order()}, {"pole_coefficient", fit.pole_coefficient()}};
    json mv = json::array();
    for (const auto& v : mellin_transform(J, parse_doubles(zs), fit))
        mv.push_back({{"z", v.z}, {"F", v.value}, {"error", v.error}, {"tail", v.tail}});
    r.body["mellin"] = mv;
}

void cmd_leray(Report& r, const RunConfig& c, double lo, double hi, std::size_t points) {
    r.numeric = true;
    auto grid = geometric_grid(lo, hi, points);
    LerayResult res;
    std::string label;
    if (c.toy.empty()) {
        require(c.inputs.size() == 1, ErrorKind::Parse, "leray takes one graph file or --toy");
        GraphFile gf = r.read_graph(c.inputs[0]);
        auto m = momenta(r, c, gf, true);
        label = gf.graph.name;
        res = leray_feynman(gf.graph, m, dimension(c, gf), grid);
    } else {
        LevelProblem p = toy_problem(c.toy);
        label = p.label;
        res = leray_I_epsilon(p.f, p.alpha, p.dom, p.m, grid);
    }
    json samples = json::array();
    std::vector<std::vector<double>> rows;
    for (const auto& s : res.samples) {
        samples.push_back({{"eps", s.eps}, {"interior", s.interior}, {"boundary", s.boundary}, {"I", s.value},
                           {"error", s.error}});
        rows.push_back({s.eps, s.value, s.error});
    }
    write_csv(c.plot_path, "eps,I,error", rows);
    r.body = {{"problem", label}, {"m", res.m}, {"degenerate_boundary", res.degenerate_boundary},
              {"samples", samples}, {"all_finite", res.all_finite}, {"fitted", res.fitted}};
    if (res.fitted)
        r.body["fit"] = {{"nu", res.nu}, {"c", res.c}, {"residual", res.fit_residual}, {"within_bound", res.within_bound}};
    r.failed = !res.all_finite || !res.within_bound;
}

void cmd_zeta(Report& r, const RunConfig& c, bool lambda) {
    r.numeric = true;
    require(c.inputs.size() == 1, ErrorKind::Parse, "zeta-log takes one graph file");
    GraphFile gf = r.read_graph(c.inputs[0]);
    auto m = momenta(r, c, gf, true);
    int d = dimension(c, gf);
    auto z = log_zeta_coeffs(gf.graph, m, d, static_cast<std::size_t>(c.order), feynman_options(c));
    json coeffs = json::array();
    for (std::size_t k = 0; k < z.coeffs.size(); ++k)
        coeffs.push_back({{"n", k}, {"value", z.coeffs[k]}, {"error", z.errors[k]}});
    r.body = {{"graph", gf.graph.name}, {"D", d}, {"zeta", coeffs}, {"quadrature", quad_json(z.quad)}};
    bool ok = z.quad.converged;
    if (lambda) {
        json li = json::array();
        for (std::size_t n = 1; n <= 3; ++n) {
            auto q = iterated_log_integral(1.0, std::exp(1.0), n, quad_options(c));
            double exact = 1.0 / detail::factorial(static_cast<int>(n));
            li.push_back({{"n", n}, {"value", q.value}, {"exact", exact}, {"error", q.error}});
            ok = ok && q.converged;
        }
        r.body["iterated_log_integrals"] = li;
    }
    r.failed = !ok;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Parametric Feynman integrals, graph polynomials and Hopf-algebraic renormalization"};
    app.require_subcommand(1);
    RunConfig cfg;
    int slice_dim = 0;
    std::string mode = "auto", dims, point, qs = "2,3,5", zs = "0,0.5,1,2", log_mode = "full", grading = "loops";
    bool projective = false, open = false, lambda = false, original_rule = false;
    double s_lo = 0.01, s_hi = 1, eps_lo = 0.02, eps_hi = 0.5;
    std::size_t points = 30;

    auto common = [&](CLI::App* sub, bool files = true) {
        if (files) sub->add_option("inputs", cfg.inputs, "input files");
        sub->add_option("--seed", cfg.seed, "random seed (default FEYNPAR_SEED or 1)");
        return sub;
    };
    auto kinematic = [&](CLI::App* sub) {
        sub->add_option("--p2", cfg.p2, "two-leg p^2 as num/den");
        sub->add_option("--mass2", cfg.mass2, "uniform mass squared as num/den");
        sub->add_option("--gram", cfg.gram_path, "Gram JSON file");
        sub->add_option("--D", cfg.dim, "spacetime dimension");
        return sub;
    };
    auto numeric = [&](CLI::App* sub) {
        kinematic(sub);
        sub->add_option("--tol", cfg.tol, "relative quadrature tolerance");
        sub->add_option("--max-evals", cfg.max_evals, "evaluation budget");
        sub->add_option("--threads", cfg.threads, "worker threads")->check(CLI::PositiveNumber);
        sub->add_option("--order", cfg.order, "truncation order");
        sub->add_option("--emit-plot-data", cfg.plot_path, "CSV output path");
        sub->add_flag("--allow-divergent", cfg.allow_divergent, "integrate even if probes flag a divergence");
        return sub;
    };

    auto* poly = kinematic(common(app.add_subcommand("poly", "graph polynomials")));
    auto* check = common(app.add_subcommand("check", "exact invariants over graph files or directories"));
    auto* hopf = app.add_subcommand("hopf", "Hopf algebra operations");
    hopf->require_subcommand(1);
    std::vector<std::pair<std::string, CLI::App*>> hopf_subs;
    for (const char* n : {"coproduct", "antipode", "birkhoff"}) {
        auto* s = common(hopf->add_subcommand(n));
        s->add_option("--D", cfg.dim, "spacetime dimension for the divergence rule");
        s->add_option("--slice", cfg.slice_path, "slice JSON decorating the graph");
        s->add_flag("--original-dimension", original_rule, "decorate by the dimension of the whole slice");
        hopf_subs.emplace_back(n, s);
    }
    auto* renorm = common(app.add_subcommand("renorm", "renormalized values and counterterms"));
    auto* conn = common(app.add_subcommand("connection", "connection data of a character"));
    conn->add_option("--grading", grading, "loops or edges")->check(CLI::IsMember({"loops", "edges"}));
    auto* slice = common(app.add_subcommand("slice", "random rational slice"));
    slice->add_option("--dim", slice_dim, "slice dimension");
    slice->add_option("--slice", cfg.slice_path, "slice JSON");
    auto* milnor = common(app.add_subcommand("milnor", "singular points and Milnor numbers"));
    milnor->add_option("--dim", slice_dim, "slice dimension");
    milnor->add_option("--slice", cfg.slice_path, "slice JSON");
    milnor->add_option("--poly", cfg.poly_path, "serialized polynomial instead of a graph");
    milnor->add_option("--mode", mode, "auto, affine or projective")->check(CLI::IsMember({"auto", "affine", "projective"}));
    auto* fsub = common(app.add_subcommand("feynman-subspace", "rank of the tree-product subspace"));
    fsub->add_option("--dim", slice_dim, "slice dimension");
    fsub->add_option("--slice", cfg.slice_path, "slice JSON");
    fsub->add_option("--dims", dims, "comma-separated even dimensions");
    fsub->add_option("--point", point, "singular point in slice coordinates (default origin)");
    fsub->add_option("--D", cfg.dim, "default dimension");
    auto* dimreg = numeric(common(app.add_subcommand("dimreg", "dimensionally regularized series")));
    dimreg->add_option("--mu", cfg.mu, "mass scale");
    dimreg->add_option("--log-mode", log_mode, "full, psi or v")->check(CLI::IsMember({"full", "psi", "v"}));
    auto* integ = numeric(common(app.add_subcommand("integrate", "parametric integral at z = 0")));
    auto* ident = numeric(common(app.add_subcommand("identity-check", "boundary/interior identity")));
    ident->add_option("--toy", cfg.toy, "square");
    ident->add_flag("--open", open, "use a non-closed form (negative control)");
    auto* glm = numeric(common(app.add_subcommand("gl-mellin", "Gelfand-Leray function and Mellin transform")));
    glm->add_option("--toy", cfg.toy, "disk or square");
    glm->add_option("--s-min", s_lo);
    glm->add_option("--s-max", s_hi);
    glm->add_option("--points", points);
    glm->add_option("--z", zs, "comma-separated Mellin arguments");
    auto* leray = numeric(common(app.add_subcommand("leray", "Leray-regularized level integrals")));
    leray->add_option("--toy", cfg.toy, "disk or regular");
    leray->add_option("--eps-min", eps_lo);
    leray->add_option("--eps-max", eps_hi);
    leray->add_option("--points", points);
    auto* zeta = numeric(common(app.add_subcommand("zeta-log", "log-moment coefficients")));
    zeta->add_flag("--iterated", lambda, "also check the iterated logarithm integrals");
    auto* count = common(app.add_subcommand("count-points", "point counts over prime fields"));
    count->add_option("--q", qs, "comma-separated primes");
    count->add_option("--poly", cfg.poly_path, "serialized polynomial instead of a graph");
    count->add_flag("--projective", projective, "also count projective points");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? kOk : kParse;
    }

    Report rep;
    try {
        DecorationRule drule = original_rule ? DecorationRule::OriginalDimension : DecorationRule::RestrictedDimension;
        if (*poly) rep.command = "poly", cmd_poly(rep, cfg);
        else if (*check) rep.command = "check", cmd_check(rep, cfg);
        else if (*hopf) {
            for (auto& [n, s] : hopf_subs)
                if (*s) rep.command = "hopf " + n, cmd_hopf(rep, cfg, n, drule);
        } else if (*renorm) rep.command = "renorm", cmd_renorm(rep, cfg);
        else if (*conn) rep.command = "connection", cmd_connection(rep, cfg, grading);
        else if (*slice) rep.command = "slice", cmd_slice(rep, cfg, slice_dim);
        else if (*milnor) rep.command = "milnor", cmd_milnor(rep, cfg, slice_dim, mode);
        else if (*fsub) rep.command = "feynman-subspace", cmd_feynman_subspace(rep, cfg, slice_dim, dims, point);
        else if (*dimreg) rep.command = "dimreg", cmd_dimreg(rep, cfg, log_mode);
        else if (*integ) rep.command = "integrate", cmd_integrate(rep, cfg);
        else if (*ident) rep.command = "identity-check", cmd_identity(rep, cfg, open);
        else if (*glm) rep.command = "gl-mellin", cmd_gl_mellin(rep, cfg, s_lo, s_hi, points, zs);
        else if (*leray) rep.command = "leray", cmd_leray(rep, cfg, eps_lo, eps_hi, points);
        else if (*zeta) rep.command = "zeta-log", cmd_zeta(rep, cfg, lambda);
        else if (*count) rep.command = "count-points", cmd_count_points(rep, cfg, qs, projective);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const json::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kParse;
    }
    json doc = header(rep, cfg);
    doc["result"] = rep.body;
    std::cout << doc.dump(2) << "\n";
    if (rep.failed) {
        std::cerr << "check failed or tolerance not reached\n";
        return kTolerance;
    }
    return kOk;
}
