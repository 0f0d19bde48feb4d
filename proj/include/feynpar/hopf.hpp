#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "feynpar/graph.hpp"
#include "feynpar/graph_polynomials.hpp"
#include "feynpar/groebner.hpp"
#include "feynpar/laurent.hpp"
#include "feynpar/poly_algebra.hpp"

namespace feynpar {

// Commutative monomial in generator ids (sorted, with repetition); empty = unit.
using Monomial = std::vector<int>;
using Element = std::map<Monomial, Q>;
using TensorElement = std::map<std::pair<Monomial, Monomial>, Q>;
using Tensor3Element = std::map<std::tuple<Monomial, Monomial, Monomial>, Q>;

inline Monomial monomial_product(const Monomial& a, const Monomial& b) {
    Monomial r;
    r.reserve(a.size() + b.size());
    std::merge(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(r));
    return r;
}

inline void add_to(Element& e, const Monomial& m, const Q& c) {
    if (c == 0) return;
    auto it = e.find(m);
    if (it == e.end()) {
        e.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) e.erase(it);
    }
}

template <class K>
void add_to(std::map<K, Q>& e, const K& k, const Q& c) {
    if (c == 0) return;
    auto it = e.find(k);
    if (it == e.end()) {
        e.emplace(k, c);
    } else {
        it->second += c;
        if (it->second == 0) e.erase(it);
    }
}

inline Element element_product(const Element& a, const Element& b) {
    Element r;
    for (const auto& [ma, ca] : a)
        for (const auto& [mb, cb] : b) add_to(r, monomial_product(ma, mb), ca * cb);
    return r;
}

inline TensorElement tensor_product(const TensorElement& a, const TensorElement& b) {
    TensorElement r;
    for (const auto& [ka, ca] : a)
        for (const auto& [kb, cb] : b)
            add_to(r, std::make_pair(monomial_product(ka.first, kb.first), monomial_product(ka.second, kb.second)),
                   ca * cb);
    return r;
}

// Linear subspace of the coordinate space indexed by edge ids, kept in reduced row echelon form.
struct Subspace {
    std::vector<std::string> coords;
    QMatrix basis;

    std::size_t dim() const { return basis.size(); }
    std::size_t ambient() const { return coords.size(); }

    static Subspace make(std::vector<std::string> coords, QMatrix rows) {
        Subspace s;
        s.coords = std::move(coords);
        for (const auto& r : rows)
            require(r.size() == s.coords.size(), ErrorKind::ArityMismatch, "slice row length differs from edge count");
        auto piv = row_reduce(rows);
        rows.resize(piv.size());
        s.basis = rows;
        return s;
    }

    // Pi intersected with the coordinate subspace spanned by `sub`, in the coordinates `sub`.
    Subspace restrict_to(const std::vector<std::string>& sub) const {
        std::vector<int> pos(coords.size(), -1);
        for (std::size_t j = 0; j < sub.size(); ++j)
            for (std::size_t i = 0; i < coords.size(); ++i)
                if (coords[i] == sub[j]) pos[i] = static_cast<int>(j);
        std::size_t d = basis.size();
        // Combinations c with (c^T B)_i = 0 for every coordinate outside sub.
        QMatrix a;
        for (std::size_t i = 0; i < coords.size(); ++i) {
            if (pos[i] >= 0) continue;
            std::vector<Q> row(d);
            for (std::size_t r = 0; r < d; ++r) row[r] = basis[r][i];
            a.push_back(row);
        }
        QMatrix ker;
        if (a.empty()) {
            for (std::size_t r = 0; r < d; ++r) {
                std::vector<Q> e(d, 0);
                e[r] = 1;
                ker.push_back(e);
            }
        } else {
            ker = kernel_basis(a, d);
        }
        QMatrix rows;
        for (const auto& c : ker) {
            std::vector<Q> v(sub.size(), 0);
            for (std::size_t i = 0; i < coords.size(); ++i) {
                if (pos[i] < 0) continue;
                Q s = 0;
                for (std::size_t r = 0; r < d; ++r) s += c[r] * basis[r][i];
                v[static_cast<std::size_t>(pos[i])] = s;
            }
            rows.push_back(v);
        }
        return make(sub, rows);
    }

    std::string key() const {
        std::string k = "[";
        for (std::size_t r = 0; r < basis.size(); ++r) {
            k += r ? ";" : "";
            for (std::size_t i = 0; i < basis[r].size(); ++i) k += (i ? "," : "") + basis[r][i].get_str();
        }
        return k + "]";
    }
};

inline std::vector<std::string> edge_ids(const FeynmanGraph& g) {
    std::vector<std::string> v;
    for (const auto& e : g.edges) v.push_back(e.id);
    return v;
}

// codim of the singular locus of the affine hypersurface {p = 0} (arity when it is empty).
inline int singular_codimension(const MultiPoly& p) {
    std::size_t n = p.arity();
    if (p.is_constant()) return static_cast<int>(n);
    std::vector<MultiPoly> gens{p};
    for (std::size_t i = 0; i < n; ++i) gens.push_back(p.derivative(i));
    GroebnerOptions opt;
    opt.max_arity = 10;
    auto gb = groebner_grlex(gens, n, opt);
    if (is_unit_ideal(gb)) return static_cast<int>(n);
    return static_cast<int>(n) - ideal_dimension(gb, n);
}

// Kirchhoff polynomial of a possibly disconnected edge subset: product over components.
inline MultiPoly psi_of_edge_set(const FeynmanGraph& g, const EdgeSet& edges) {
    std::size_t n = edges.size();
    MultiPoly psi = MultiPoly::constant(n, 1);
    for (const auto& comp : edge_components(g, edges)) {
        MultiPoly pc = psi_polynomial(subgraph_as_graph(g, comp));
        std::vector<std::size_t> map;
        for (auto e : comp) map.push_back(static_cast<std::size_t>(std::find(edges.begin(), edges.end(), e) - edges.begin()));
        psi *= pc.embed(n, map);
    }
    return psi;
}

// Which atoms survive restriction to a subgraph or quotient.
enum class DecorationRule {
    RestrictedDimension,  // dim(Pi ∩ A^{E(target)}) <= cap(target)
    OriginalDimension,    // dim(Pi) <= cap(target)
};

struct ReducedTerm {
    Q coef;
    Monomial left;
    Monomial right;
};

struct GeneratorInfo {
    std::string key;
    std::string name;
    int grade = 0;
    int loops = 0;
    std::optional<FeynmanGraph> graph;
    std::optional<Subspace> slice;
    bool reduced_known = false;
    std::vector<ReducedTerm> reduced;
};

class HopfAlgebra {
public:
    explicit HopfAlgebra(DivergenceRule rule = {}, DecorationRule drule = DecorationRule::RestrictedDimension)
        : rule_(std::move(rule)), drule_(drule) {}

    const DivergenceRule& rule() const { return rule_; }
    std::size_t size() const { return gens_.size(); }
    const GeneratorInfo& generator(int id) const { return gens_.at(static_cast<std::size_t>(id)); }

    std::optional<int> find(const std::string& key) const {
        auto it = by_key_.find(key);
        if (it == by_key_.end()) return std::nullopt;
        return it->second;
    }
    std::optional<int> find_name(const std::string& name) const {
        for (std::size_t i = 0; i < gens_.size(); ++i)
            if (gens_[i].name == name) return static_cast<int>(i);
        return std::nullopt;
    }

    // Edgeless graphs are the unit and yield nullopt.
    std::optional<int> add_graph(const FeynmanGraph& g) {
        if (g.edges.empty()) return std::nullopt;
        std::string key = canonical_key(g);
        if (auto f = find(key)) return f;
        GeneratorInfo info;
        info.key = key;
        info.name = g.name.empty() ? key : g.name;
        info.grade = static_cast<int>(g.n_edges());
        info.loops = loop_number(g);
        info.graph = g;
        return insert(std::move(info));
    }

    std::optional<int> add_decorated(const FeynmanGraph& g, const Subspace& s) {
        if (g.edges.empty()) return std::nullopt;
        require(s.coords == edge_ids(g), ErrorKind::ArityMismatch, "slice coordinates must be the graph's edges");
        require(static_cast<int>(s.dim()) <= cap(g), ErrorKind::DecorationDimension,
                "slice dimension " + std::to_string(s.dim()) + " exceeds cap " + std::to_string(cap(g)));
        return add_decorated_unchecked(g, s);
    }

    int add_toy(const std::string& name, int grade, int loops = -1) {
        std::string key = "toy:" + name;
        if (auto f = find(key)) return *f;
        GeneratorInfo info;
        info.key = key;
        info.name = name;
        info.grade = grade;
        info.loops = loops < 0 ? grade : loops;
        info.reduced_known = true;
        return insert(std::move(info));
    }
    void set_reduced(int id, std::vector<ReducedTerm> terms) {
        auto& g = gens_.at(static_cast<std::size_t>(id));
        for (const auto& t : terms)
            require(grade(t.left) + grade(t.right) == g.grade, ErrorKind::Precondition,
                    "reduced coproduct term does not preserve the grade of " + g.name);
        g.reduced = std::move(terms);
        g.reduced_known = true;
        antipode_cache_.clear();
    }

    int grade(const Monomial& m) const {
        int s = 0;
        for (int id : m) s += generator(id).grade;
        return s;
    }
    int loops(const Monomial& m) const {
        int s = 0;
        for (int id : m) s += generator(id).loops;
        return s;
    }

    // Affine codim Sing X_g, the decoration cap.
    int cap(const FeynmanGraph& g) {
        std::string k = canonical_key(g);
        auto it = cap_cache_.find(k);
        if (it != cap_cache_.end()) return it->second;
        EdgeSet all(g.n_edges());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        int c = singular_codimension(psi_of_edge_set(g, all));
        cap_cache_[k] = c;
        return c;
    }

    const std::vector<ReducedTerm>& reduced_coproduct(int id) {
        if (!generator(id).reduced_known) compute_reduced(id);
        return gens_.at(static_cast<std::size_t>(id)).reduced;
    }

    TensorElement coproduct(int id) {
        TensorElement t;
        t[{Monomial{id}, Monomial{}}] += 1;
        t[{Monomial{}, Monomial{id}}] += 1;
        for (const auto& r : reduced_coproduct(id)) add_to(t, std::make_pair(r.left, r.right), r.coef);
        return t;
    }
    TensorElement coproduct(const Monomial& m) {
        TensorElement t{{{Monomial{}, Monomial{}}, Q(1)}};
        for (int id : m) t = tensor_product(t, coproduct(id));
        return t;
    }
    TensorElement coproduct(const Element& x) {
        TensorElement t;
        for (const auto& [m, c] : x)
            for (const auto& [k, v] : coproduct(m)) add_to(t, k, c * v);
        return t;
    }

    Element antipode(int id) {
        auto it = antipode_cache_.find(id);
        if (it != antipode_cache_.end()) return it->second;
        Element s{{Monomial{id}, Q(-1)}};
        for (const auto& r : std::vector<ReducedTerm>(reduced_coproduct(id))) {
            Element left = antipode(r.left);
            for (const auto& [m, c] : left) add_to(s, monomial_product(m, r.right), -r.coef * c);
        }
        antipode_cache_[id] = s;
        return s;
    }
    Element antipode(const Monomial& m) {
        Element r{{Monomial{}, Q(1)}};
        for (int id : m) r = element_product(r, antipode(id));
        return r;
    }
    Element antipode(const Element& x) {
        Element r;
        for (const auto& [m, c] : x)
            for (const auto& [mm, cc] : antipode(m)) add_to(r, mm, c * cc);
        return r;
    }

    std::string describe(const Monomial& m) const {
        if (m.empty()) return "1";
        std::string s;
        for (std::size_t i = 0; i < m.size(); ++i) s += (i ? "*" : "") + display_name(m[i]);
        return s;
    }
    std::string display_name(int id) const {
        const auto& g = generator(id);
        return g.slice ? g.name + "{" + g.slice->key() + "}" : g.name;
    }

    // All generators reachable from `roots` through reduced coproducts, sorted by grade.
    std::vector<int> closure(const std::vector<int>& roots) {
        std::set<int> seen;
        std::vector<int> stack(roots.begin(), roots.end());
        while (!stack.empty()) {
            int id = stack.back();
            stack.pop_back();
            if (!seen.insert(id).second) continue;
            for (const auto& r : std::vector<ReducedTerm>(reduced_coproduct(id))) {
                for (int x : r.left) stack.push_back(x);
                for (int x : r.right) stack.push_back(x);
            }
        }
        std::vector<int> out(seen.begin(), seen.end());
        std::stable_sort(out.begin(), out.end(), [&](int a, int b) { return generator(a).grade < generator(b).grade; });
        return out;
    }

private:
    int insert(GeneratorInfo info) {
        int id = static_cast<int>(gens_.size());
        by_key_[info.key] = id;
        gens_.push_back(std::move(info));
        return id;
    }

    std::optional<int> add_decorated_unchecked(const FeynmanGraph& g, const Subspace& s) {
        if (g.edges.empty()) return std::nullopt;
        std::string key = canonical_key(g) + "|" + s.key();
        if (auto f = find(key)) return f;
        GeneratorInfo info;
        info.key = key;
        info.name = g.name.empty() ? canonical_key(g) : g.name;
        info.grade = static_cast<int>(g.n_edges());
        info.loops = loop_number(g);
        info.graph = g;
        info.slice = s;
        return insert(std::move(info));
    }

    static FeynmanGraph named(FeynmanGraph g, const std::string& name) {
        g.name = name;
        return g;
    }

    static std::string edge_label(const FeynmanGraph& g, const EdgeSet& es) {
        std::string s;
        for (std::size_t i = 0; i < es.size(); ++i) s += (i ? "," : "") + g.edges[es[i]].id;
        return s;
    }

    void compute_reduced(int id) {
        FeynmanGraph g = *generator(id).graph;
        std::optional<Subspace> slice = generator(id).slice;
        std::string base = generator(id).name;
        std::vector<ReducedTerm> terms;
        for (const auto& sub : divergent_subgraphs(g, rule_)) {
            ReducedTerm t{1, {}, {}};
            bool dropped = false;
            FeynmanGraph quotient = named(contract_subgraph(g, sub.edges), base + "/{" + edge_label(g, sub.edges) + "}");
            quotient.legs.clear();
            if (slice && drule_ == DecorationRule::OriginalDimension &&
                static_cast<int>(slice->dim()) > singular_codimension(psi_of_edge_set(g, sub.edges)))
                dropped = true;
            for (const auto& comp : edge_components(g, sub.edges)) {
                FeynmanGraph cg = named(subgraph_as_graph(g, comp), "{" + edge_label(g, comp) + "}");
                std::optional<int> cid;
                if (slice) {
                    Subspace r = slice->restrict_to(edge_ids(cg));
                    if (drule_ == DecorationRule::RestrictedDimension && static_cast<int>(r.dim()) > cap(cg))
                        dropped = true;
                    cid = add_decorated_unchecked(cg, r);
                } else {
                    cid = add_graph(cg);
                }
                if (cid) t.left.push_back(*cid);
            }
            std::optional<int> qid;
            if (slice) {
                Subspace r = slice->restrict_to(edge_ids(quotient));
                int c = cap(quotient);
                int d = static_cast<int>(drule_ == DecorationRule::RestrictedDimension ? r.dim() : slice->dim());
                if (d > c) dropped = true;
                qid = add_decorated_unchecked(quotient, r);
            } else {
                qid = add_graph(quotient);
            }
            if (qid) t.right.push_back(*qid);
            if (dropped) continue;
            std::sort(t.left.begin(), t.left.end());
            terms.push_back(t);
        }
        auto& info = gens_.at(static_cast<std::size_t>(id));
        info.reduced = std::move(terms);
        info.reduced_known = true;
    }

    DivergenceRule rule_;
    DecorationRule drule_;
    std::vector<GeneratorInfo> gens_;
    std::map<std::string, int> by_key_;
    std::map<int, Element> antipode_cache_;
    std::map<std::string, int> cap_cache_;
};

// (Δ⊗id)Δ and (id⊗Δ)Δ of a generator.
inline std::pair<Tensor3Element, Tensor3Element> coassociativity_sides(HopfAlgebra& h, int id) {
    Tensor3Element lhs, rhs;
    for (const auto& [k, c] : h.coproduct(id)) {
        for (const auto& [k2, c2] : h.coproduct(k.first)) add_to(lhs, std::make_tuple(k2.first, k2.second, k.second), c * c2);
        for (const auto& [k2, c2] : h.coproduct(k.second)) add_to(rhs, std::make_tuple(k.first, k2.first, k2.second), c * c2);
    }
    return {lhs, rhs};
}

inline bool is_coassociative_on(HopfAlgebra& h, int id) {
    auto [l, r] = coassociativity_sides(h, id);
    return l == r;
}

// m(S⊗id)Δ(x) and m(id⊗S)Δ(x); both must equal ε(x).
inline std::pair<Element, Element> antipode_axiom_sides(HopfAlgebra& h, const Monomial& x) {
    Element a, b;
    for (const auto& [k, c] : h.coproduct(x)) {
        for (const auto& [m, v] : h.antipode(k.first)) add_to(a, monomial_product(m, k.second), c * v);
        for (const auto& [m, v] : h.antipode(k.second)) add_to(b, monomial_product(k.first, m), c * v);
    }
    return {a, b};
}

inline Element counit_element(const Monomial& x) {
    return x.empty() ? Element{{Monomial{}, Q(1)}} : Element{};
}

// (ε⊗id)Δ(x) and (id⊗ε)Δ(x).
inline std::pair<Element, Element> counit_axiom_sides(HopfAlgebra& h, const Monomial& x) {
    Element a, b;
    for (const auto& [k, c] : h.coproduct(x)) {
        if (k.first.empty()) add_to(a, k.second, c);
        if (k.second.empty()) add_to(b, k.first, c);
    }
    return {a, b};
}

// Linear maps H -> K, given on monomials.
template <class T>
using LinearMap = std::function<LaurentSeries<T>(const Monomial&)>;

template <class T>
class Character {
public:
    Character() = default;
    explicit Character(int order) : order_(order) {}

    void set(int id, LaurentSeries<T> v) { values_[id] = std::move(v); }
    bool has(int id) const { return values_.count(id) > 0; }
    const LaurentSeries<T>& at(int id) const {
        auto it = values_.find(id);
        require(it != values_.end(), ErrorKind::Precondition,
                "character has no value for generator #" + std::to_string(id));
        return it->second;
    }
    const std::map<int, LaurentSeries<T>>& values() const { return values_; }
    int order() const { return order_; }

    LaurentSeries<T> operator()(const Monomial& m) const {
        LaurentSeries<T> r = LaurentSeries<T>::constant(T(1));
        for (int id : m) r *= at(id);
        return r;
    }
    LaurentSeries<T> operator()(const Element& x) const {
        LaurentSeries<T> r(kExactOrder);
        for (const auto& [m, c] : x) r += (*this)(m) * to_scalar(c);
        return r;
    }
    LinearMap<T> as_map() const {
        return [this](const Monomial& m) { return (*this)(m); };
    }

    static T to_scalar(const Q& c) {
        if constexpr (std::is_same_v<T, double>) return c.get_d();
        else return c;
    }

private:
    int order_ = kDefaultHigh;
    std::map<int, LaurentSeries<T>> values_;
};

template <class T>
LaurentSeries<T> counit_value(const Monomial& m) {
    return m.empty() ? LaurentSeries<T>::constant(T(1)) : LaurentSeries<T>(kExactOrder);
}

template <class T>
LaurentSeries<T> convolve(HopfAlgebra& h, const LinearMap<T>& f, const LinearMap<T>& g, const Monomial& x) {
    LaurentSeries<T> r(kExactOrder);
    for (const auto& [k, c] : h.coproduct(x)) r += f(k.first) * g(k.second) * Character<T>::to_scalar(c);
    return r;
}

// φ∘S as a linear map.
template <class T>
LinearMap<T> compose_antipode(HopfAlgebra& h, LinearMap<T> f) {
    return [&h, f](const Monomial& m) {
        LaurentSeries<T> r(kExactOrder);
        for (const auto& [mm, c] : h.antipode(m)) r += f(mm) * Character<T>::to_scalar(c);
        return r;
    };
}

template <class T>
struct BirkhoffResult {
    Character<T> minus;
    Character<T> plus;
};

// Recursive minimal subtraction on every generator reachable from `roots`.
template <class T>
BirkhoffResult<T> birkhoff(HopfAlgebra& h, const Character<T>& phi, const std::vector<int>& roots) {
    BirkhoffResult<T> out;
    for (int id : h.closure(roots)) {
        LaurentSeries<T> bar = phi.at(id);
        for (const auto& r : std::vector<ReducedTerm>(h.reduced_coproduct(id)))
            bar += out.minus(r.left) * phi(r.right) * Character<T>::to_scalar(r.coef);
        LaurentSeries<T> pol = bar.polar_part();
        out.minus.set(id, -pol);
        out.plus.set(id, bar - pol);
    }
    return out;
}

template <class T>
struct Renormalized {
    T value;
    LaurentSeries<T> counterterm;
};

template <class T>
Renormalized<T> renormalized_value(const BirkhoffResult<T>& b, int id) {
    return {b.plus.at(id)[0], b.minus.at(id)};
}

// μ-dependent character φ_μ(x) = exp(-z·loops(x)·L)·φ(x), L = log μ as an exact rational.
inline Character<Q> mu_character(const HopfAlgebra& h, const Character<Q>& phi, const Q& log_mu, int order = kDefaultHigh) {
    Character<Q> out(order);
    for (const auto& [id, v] : phi.values()) out.set(id, exp_linear(-log_mu * h.generator(id).loops, order) * v);
    return out;
}

enum class Grading { Edges, Loops };

inline int generator_degree(const HopfAlgebra& h, int id, Grading g) {
    return g == Grading::Edges ? h.generator(id).grade : h.generator(id).loops;
}

// θ_t(φ)(x) = exp(t·deg(x)·z)·φ(x).
inline Character<Q> grading_flow(const HopfAlgebra& h, const Character<Q>& phi, const Q& t,
                                 Grading grading = Grading::Loops, int order = kDefaultHigh) {
    Character<Q> out(order);
    for (const auto& [id, v] : phi.values()) out.set(id, exp_linear(t * generator_degree(h, id, grading), order) * v);
    return out;
}

template <class T>
double series_deviation(const LaurentSeries<T>& a, const LaurentSeries<T>& b) {
    int top = std::min(a.order(), b.order());
    top = std::min(top, kDefaultHigh);
    return (a.truncated(top) - b.truncated(top)).max_abs(top);
}

// max over generators of |φ_{e^t μ} - θ_{-t}(φ_μ)|, using the loop grading.
inline double scaling_check(const HopfAlgebra& h, const Character<Q>& phi_mu, const Character<Q>& phi_shifted,
                            const Q& t) {
    Character<Q> flowed = grading_flow(h, phi_mu, -t, Grading::Loops);
    double dev = 0;
    for (const auto& [id, v] : phi_shifted.values()) dev = std::max(dev, series_deviation(v, flowed.at(id)));
    return dev;
}

template <class T>
struct ConnectionData {
    std::map<int, LaurentSeries<T>> a;
    std::map<int, LaurentSeries<T>> b;
    std::map<int, LaurentSeries<T>> residual_series;
    double residual = 0;
};

// a = (φ∘S)*dφ/dz, b = (φ∘S)*Y(φ); residual = db/dz - Y(a) + [a,b] on generators.
template <class T>
ConnectionData<T> connection_data(HopfAlgebra& h, const Character<T>& phi, const std::vector<int>& roots,
                                  Grading grading = Grading::Edges) {
    ConnectionData<T> out;
    auto gens = h.closure(roots);
    LinearMap<T> phi_map = phi.as_map();
    LinearMap<T> phi_inv = compose_antipode<T>(h, phi_map);
    auto deg = [&](const Monomial& m) {
        int d = 0;
        for (int id : m) d += generator_degree(h, id, grading);
        return d;
    };
    LinearMap<T> dphi = [&](const Monomial& m) { return phi(m).derivative(); };
    LinearMap<T> yphi = [&](const Monomial& m) { return phi(m) * T(deg(m)); };
    for (int id : gens) {
        out.a[id] = convolve<T>(h, phi_inv, dphi, Monomial{id});
        out.b[id] = convolve<T>(h, phi_inv, yphi, Monomial{id});
    }
    auto inf = [&](const std::map<int, LaurentSeries<T>>& v) -> LinearMap<T> {
        return [&v](const Monomial& m) {
            if (m.size() != 1) return LaurentSeries<T>(kExactOrder);
            return v.at(m[0]);
        };
    };
    LinearMap<T> am = inf(out.a), bm = inf(out.b);
    for (int id : gens) {
        LaurentSeries<T> bracket = convolve<T>(h, am, bm, Monomial{id}) - convolve<T>(h, bm, am, Monomial{id});
        LaurentSeries<T> res = out.b[id].derivative() - out.a[id] * T(generator_degree(h, id, grading)) + bracket;
        int top = std::min(res.order(), kDefaultHigh);
        out.residual = std::max(out.residual, res.max_abs(top));
        out.residual_series[id] = res;
    }
    return out;
}

}  // namespace feynpar
