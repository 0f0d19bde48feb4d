#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "feynpar/error.hpp"
#include "feynpar/rational.hpp"

namespace feynpar {

struct Edge {
    std::string id;
    std::string src;
    std::string tgt;
};

// Momentum label carries its sign: "p", "-p", "p1", "-q"; "0" or "" for none.
struct ExternalLeg {
    std::string id;
    std::string vertex;
    std::string momentum;
};

struct SignedLabel {
    int sign = 0;
    std::string label;
};

inline SignedLabel parse_momentum_label(const std::string& m) {
    std::string s;
    for (char c : m)
        if (c != ' ') s += c;
    if (s.empty() || s == "0") return {0, ""};
    if (s[0] == '-') return {-1, s.substr(1)};
    if (s[0] == '+') return {1, s.substr(1)};
    return {1, s};
}

struct FeynmanGraph {
    std::string name;
    std::vector<std::string> vertices;
    std::vector<Edge> edges;
    std::vector<ExternalLeg> legs;
    int theory_power = 4;
    int dimension = 0;  // 0: not specified

    std::size_t n_edges() const { return edges.size(); }
    std::size_t n_vertices() const { return vertices.size(); }

    std::size_t vertex_index(const std::string& v) const {
        for (std::size_t i = 0; i < vertices.size(); ++i)
            if (vertices[i] == v) return i;
        throw Error(ErrorKind::MalformedGraph, "unknown vertex '" + v + "'");
    }
    std::optional<std::size_t> find_edge(const std::string& id) const {
        for (std::size_t i = 0; i < edges.size(); ++i)
            if (edges[i].id == id) return i;
        return std::nullopt;
    }
    std::size_t src(std::size_t e) const { return vertex_index(edges[e].src); }
    std::size_t tgt(std::size_t e) const { return vertex_index(edges[e].tgt); }
    bool is_self_loop(std::size_t e) const { return edges[e].src == edges[e].tgt; }
};

using EdgeSet = std::vector<std::size_t>;

class UnionFind {
public:
    explicit UnionFind(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
    std::size_t find(std::size_t x) {
        while (parent_[x] != x) x = parent_[x] = parent_[parent_[x]];
        return x;
    }
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        if (a > b) std::swap(a, b);
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

inline std::vector<std::pair<std::size_t, std::size_t>> edge_endpoints(const FeynmanGraph& g) {
    std::map<std::string, std::size_t> idx;
    for (std::size_t i = 0; i < g.vertices.size(); ++i) idx[g.vertices[i]] = i;
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (const auto& e : g.edges) out.emplace_back(idx.at(e.src), idx.at(e.tgt));
    return out;
}

// Number of connected components of (V, edges where keep[e]).
inline std::size_t component_count(const FeynmanGraph& g, const std::vector<bool>& keep) {
    auto ep = edge_endpoints(g);
    UnionFind uf(g.n_vertices());
    std::size_t comps = g.n_vertices();
    for (std::size_t e = 0; e < ep.size(); ++e)
        if (keep[e] && uf.unite(ep[e].first, ep[e].second)) --comps;
    return comps;
}

inline bool is_connected(const FeynmanGraph& g) {
    return component_count(g, std::vector<bool>(g.n_edges(), true)) == 1;
}

inline FeynmanGraph validate(const FeynmanGraph& d) {
    std::set<std::string> vs, es, ls;
    for (const auto& v : d.vertices)
        require(vs.insert(v).second, ErrorKind::MalformedGraph, "duplicate vertex id '" + v + "'");
    for (const auto& e : d.edges) {
        require(es.insert(e.id).second, ErrorKind::MalformedGraph, "duplicate edge id '" + e.id + "'");
        require(vs.count(e.src) && vs.count(e.tgt), ErrorKind::MalformedGraph,
                "edge '" + e.id + "' has a dangling endpoint");
    }
    for (const auto& l : d.legs) {
        require(ls.insert(l.id).second && !es.count(l.id), ErrorKind::MalformedGraph,
                "duplicate leg id '" + l.id + "'");
        require(vs.count(l.vertex), ErrorKind::MalformedGraph, "leg '" + l.id + "' attaches to an unknown vertex");
    }
    require(!d.vertices.empty(), ErrorKind::MalformedGraph, "graph has no vertices");
    require(d.theory_power >= 3, ErrorKind::MalformedGraph, "theory power must be at least 3");
    require(is_connected(d), ErrorKind::MalformedGraph, "graph is disconnected");
    return d;
}

inline int loop_number(const FeynmanGraph& g) {
    return static_cast<int>(g.n_edges()) - static_cast<int>(g.n_vertices()) + 1;
}

inline std::vector<std::vector<int>> incidence_matrix(const FeynmanGraph& g) {
    auto ep = edge_endpoints(g);
    std::vector<std::vector<int>> m(g.n_vertices(), std::vector<int>(g.n_edges(), 0));
    for (std::size_t e = 0; e < ep.size(); ++e) {
        m[ep[e].second][e] += 1;
        m[ep[e].first][e] -= 1;
    }
    return m;
}

inline constexpr std::size_t kDefaultEnumerationCap = 1000000;

// Edge subsets of size |V|-1 forming spanning trees, lexicographic in edge order.
inline std::vector<EdgeSet> spanning_forests_of_size(const FeynmanGraph& g, std::size_t size,
                                                     std::size_t cap = kDefaultEnumerationCap) {
    auto ep = edge_endpoints(g);
    std::size_t n = g.n_edges(), nv = g.n_vertices();
    std::vector<EdgeSet> out;
    EdgeSet cur;
    std::function<void(std::size_t, std::vector<std::size_t>&)> rec = [&](std::size_t start,
                                                                          std::vector<std::size_t>& comp) {
        if (cur.size() == size) {
            require(out.size() < cap, ErrorKind::TooLarge, "enumeration cap exceeded");
            out.push_back(cur);
            return;
        }
        for (std::size_t e = start; e < n; ++e) {
            if (n - e < size - cur.size()) break;
            std::size_t a = comp[ep[e].first], b = comp[ep[e].second];
            if (a == b) continue;
            std::vector<std::size_t> saved = comp;
            std::size_t lo = std::min(a, b), hi = std::max(a, b);
            for (auto& c : comp)
                if (c == hi) c = lo;
            cur.push_back(e);
            rec(e + 1, comp);
            cur.pop_back();
            comp = saved;
        }
    };
    std::vector<std::size_t> comp(nv);
    std::iota(comp.begin(), comp.end(), 0);
    if (size <= nv) rec(0, comp);
    return out;
}

inline std::vector<EdgeSet> spanning_trees(const FeynmanGraph& g, std::size_t cap = kDefaultEnumerationCap) {
    return spanning_forests_of_size(g, g.n_vertices() - 1, cap);
}

inline EdgeSet first_spanning_tree(const FeynmanGraph& g) {
    auto ep = edge_endpoints(g);
    UnionFind uf(g.n_vertices());
    EdgeSet t;
    for (std::size_t e = 0; e < ep.size(); ++e)
        if (uf.unite(ep[e].first, ep[e].second)) t.push_back(e);
    return t;
}

// Signed edge path from vertex a to vertex b inside the tree; sign +1 when traversed along orientation.
inline std::vector<std::pair<std::size_t, int>> tree_path(const FeynmanGraph& g, const EdgeSet& tree, std::size_t a,
                                                          std::size_t b) {
    auto ep = edge_endpoints(g);
    std::size_t nv = g.n_vertices();
    std::vector<std::vector<std::pair<std::size_t, std::size_t>>> adj(nv);
    for (auto e : tree) {
        adj[ep[e].first].push_back({e, ep[e].second});
        adj[ep[e].second].push_back({e, ep[e].first});
    }
    std::vector<long> via(nv, -1);
    std::vector<bool> seen(nv, false);
    std::vector<std::size_t> stack{a};
    seen[a] = true;
    while (!stack.empty()) {
        std::size_t v = stack.back();
        stack.pop_back();
        for (auto [e, w] : adj[v])
            if (!seen[w]) {
                seen[w] = true;
                via[w] = static_cast<long>(e);
                stack.push_back(w);
            }
    }
    require(seen[b], ErrorKind::MalformedGraph, "tree does not connect the requested vertices");
    std::vector<std::pair<std::size_t, int>> path;
    std::size_t v = b;
    while (v != a) {
        std::size_t e = static_cast<std::size_t>(via[v]);
        std::size_t prev = ep[e].first == v ? ep[e].second : ep[e].first;
        int sign = (ep[e].first == prev && ep[e].second == v) ? 1 : -1;
        path.emplace_back(e, sign);
        v = prev;
    }
    std::reverse(path.begin(), path.end());
    return path;
}

// n x l matrix of fundamental cycles of the first spanning tree; each column
// is normalized so that its lowest-index nonzero entry is +1.
inline std::vector<std::vector<int>> circuit_matrix(const FeynmanGraph& g) {
    auto ep = edge_endpoints(g);
    EdgeSet tree = first_spanning_tree(g);
    std::vector<bool> in_tree(g.n_edges(), false);
    for (auto e : tree) in_tree[e] = true;
    std::vector<std::vector<int>> cols;
    for (std::size_t e = 0; e < g.n_edges(); ++e) {
        if (in_tree[e]) continue;
        std::vector<int> col(g.n_edges(), 0);
        col[e] = 1;
        for (auto [f, s] : tree_path(g, tree, ep[e].second, ep[e].first)) col[f] += s;
        for (int x : col)
            if (x != 0) {
                if (x < 0)
                    for (int& y : col) y = -y;
                break;
            }
        cols.push_back(col);
    }
    std::vector<std::vector<int>> eta(g.n_edges(), std::vector<int>(cols.size(), 0));
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (std::size_t e = 0; e < g.n_edges(); ++e) eta[e][k] = cols[k][e];
    return eta;
}

struct CutSet {
    EdgeSet edges;
    std::vector<std::size_t> side1;  // contains the first vertex
    std::vector<std::size_t> side2;
};

// Complements of spanning 2-forests: removal leaves exactly two components.
inline std::vector<CutSet> cut_sets(const FeynmanGraph& g, std::size_t cap = kDefaultEnumerationCap) {
    std::vector<CutSet> out;
    if (g.n_vertices() < 2) return out;
    auto ep = edge_endpoints(g);
    for (const auto& forest : spanning_forests_of_size(g, g.n_vertices() - 2, cap)) {
        std::vector<bool> in(g.n_edges(), false);
        for (auto e : forest) in[e] = true;
        CutSet c;
        for (std::size_t e = 0; e < g.n_edges(); ++e)
            if (!in[e]) c.edges.push_back(e);
        UnionFind uf(g.n_vertices());
        for (auto e : forest) uf.unite(ep[e].first, ep[e].second);
        std::size_t root = uf.find(0);
        for (std::size_t v = 0; v < g.n_vertices(); ++v) (uf.find(v) == root ? c.side1 : c.side2).push_back(v);
        out.push_back(c);
    }
    std::sort(out.begin(), out.end(), [](const CutSet& a, const CutSet& b) { return a.edges < b.edges; });
    return out;
}

inline bool is_one_pi(const FeynmanGraph& g) {
    for (std::size_t e = 0; e < g.n_edges(); ++e) {
        std::vector<bool> keep(g.n_edges(), true);
        keep[e] = false;
        if (component_count(g, keep) != 1) return false;
    }
    return true;
}

inline FeynmanGraph delete_edge(const FeynmanGraph& g, const std::string& edge_id) {
    auto e = g.find_edge(edge_id);
    require(e.has_value(), ErrorKind::UnknownEdge, "no internal edge '" + edge_id + "'");
    FeynmanGraph h = g;
    h.edges.erase(h.edges.begin() + static_cast<long>(*e));
    h.name = g.name + "\\" + edge_id;
    return h;
}

// Connected components of an edge subset, each as a sorted edge list.
inline std::vector<EdgeSet> edge_components(const FeynmanGraph& g, const EdgeSet& edges) {
    auto ep = edge_endpoints(g);
    UnionFind uf(g.n_vertices());
    for (auto e : edges) uf.unite(ep[e].first, ep[e].second);
    std::map<std::size_t, EdgeSet> groups;
    for (auto e : edges) groups[uf.find(ep[e].first)].push_back(e);
    std::vector<EdgeSet> out;
    for (auto& [r, es] : groups) {
        std::sort(es.begin(), es.end());
        out.push_back(es);
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct Subgraph {
    EdgeSet edges;
    std::vector<std::size_t> vertices;  // induced, derived from edges
};

inline Subgraph make_subgraph(const FeynmanGraph& g, EdgeSet edges) {
    std::sort(edges.begin(), edges.end());
    edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
    auto ep = edge_endpoints(g);
    std::set<std::size_t> vs;
    for (auto e : edges) {
        require(e < g.n_edges(), ErrorKind::NotASubgraph, "edge index outside the parent graph");
        vs.insert(ep[e].first);
        vs.insert(ep[e].second);
    }
    return {edges, std::vector<std::size_t>(vs.begin(), vs.end())};
}

// The subgraph as a standalone graph (no external legs).
inline FeynmanGraph subgraph_as_graph(const FeynmanGraph& g, const EdgeSet& edges) {
    Subgraph s = make_subgraph(g, edges);
    FeynmanGraph h;
    h.theory_power = g.theory_power;
    h.dimension = g.dimension;
    for (auto v : s.vertices) h.vertices.push_back(g.vertices[v]);
    for (auto e : s.edges) h.edges.push_back(g.edges[e]);
    return h;
}

// Contract each component of the edge subset to its smallest vertex (in vertex order).
inline FeynmanGraph contract_subgraph(const FeynmanGraph& g, const EdgeSet& gamma) {
    for (auto e : gamma) require(e < g.n_edges(), ErrorKind::NotASubgraph, "edge index outside the graph");
    auto ep = edge_endpoints(g);
    UnionFind uf(g.n_vertices());
    for (auto e : gamma) uf.unite(ep[e].first, ep[e].second);
    std::vector<bool> removed(g.n_edges(), false);
    for (auto e : gamma) removed[e] = true;
    FeynmanGraph h;
    h.theory_power = g.theory_power;
    h.dimension = g.dimension;
    h.name = g.name;
    for (std::size_t v = 0; v < g.n_vertices(); ++v)
        if (uf.find(v) == v) h.vertices.push_back(g.vertices[v]);
    auto rep = [&](const std::string& v) { return g.vertices[uf.find(g.vertex_index(v))]; };
    for (std::size_t e = 0; e < g.n_edges(); ++e) {
        if (removed[e]) continue;
        h.edges.push_back({g.edges[e].id, rep(g.edges[e].src), rep(g.edges[e].tgt)});
    }
    for (const auto& l : g.legs) h.legs.push_back({l.id, rep(l.vertex), l.momentum});
    return h;
}

inline FeynmanGraph contract_subgraph(const FeynmanGraph& g, const std::vector<std::string>& edge_ids) {
    EdgeSet es;
    for (const auto& id : edge_ids) {
        auto e = g.find_edge(id);
        require(e.has_value(), ErrorKind::NotASubgraph, "edge '" + id + "' is not in the graph");
        es.push_back(*e);
    }
    return contract_subgraph(g, es);
}

struct DivergenceRule {
    int theory_power = 4;
    int dimension = 4;
    // Applied to each connected component; default: 1PI with D*l - 2n >= 0 and l >= 1.
    std::function<bool(const FeynmanGraph&, const DivergenceRule&)> component_predicate;

    bool accepts(const FeynmanGraph& comp) const {
        if (component_predicate) return component_predicate(comp, *this);
        int l = loop_number(comp);
        return l >= 1 && is_one_pi(comp) && dimension * l - 2 * static_cast<int>(comp.n_edges()) >= 0;
    }
};

inline bool subgraph_is_divergent(const FeynmanGraph& g, const EdgeSet& edges, const DivergenceRule& rule) {
    if (edges.empty()) return false;
    for (const auto& comp : edge_components(g, edges))
        if (!rule.accepts(subgraph_as_graph(g, comp))) return false;
    return true;
}

inline std::vector<Subgraph> divergent_subgraphs(const FeynmanGraph& g, const DivergenceRule& rule) {
    std::size_t n = g.n_edges();
    require(n <= 24, ErrorKind::TooLarge, "too many edges for subgraph enumeration");
    std::vector<Subgraph> out;
    for (std::uint64_t mask = 1; mask + 1 < (std::uint64_t{1} << n); ++mask) {
        EdgeSet es;
        for (std::size_t e = 0; e < n; ++e)
            if (mask >> e & 1u) es.push_back(e);
        if (subgraph_is_divergent(g, es, rule)) out.push_back(make_subgraph(g, es));
    }
    std::sort(out.begin(), out.end(), [](const Subgraph& a, const Subgraph& b) {
        return a.edges.size() != b.edges.size() ? a.edges.size() < b.edges.size() : a.edges < b.edges;
    });
    return out;
}

// Labeled serialization used as a Hopf generator key (legs ignored).
inline std::string canonical_key(const FeynmanGraph& g) {
    std::string k = "V[";
    for (std::size_t i = 0; i < g.vertices.size(); ++i) k += (i ? "," : "") + g.vertices[i];
    k += "]E[";
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        k += (i ? "," : "") + g.edges[i].id + ":" + g.edges[i].src + ">" + g.edges[i].tgt;
    return k + "]";
}

// Matrix-tree count: determinant of the reduced Laplacian.
inline mpz_class matrix_tree_count(const FeynmanGraph& g) {
    auto ep = edge_endpoints(g);
    std::size_t nv = g.n_vertices();
    if (nv <= 1) return 1;
    std::vector<std::vector<Q>> lap(nv - 1, std::vector<Q>(nv - 1, 0));
    for (auto [a, b] : ep) {
        if (a == b) continue;
        if (a < nv - 1) lap[a][a] += 1;
        if (b < nv - 1) lap[b][b] += 1;
        if (a < nv - 1 && b < nv - 1) {
            lap[a][b] -= 1;
            lap[b][a] -= 1;
        }
    }
    Q det = 1;
    std::size_t k = nv - 1;
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t p = c;
        while (p < k && lap[p][c] == 0) ++p;
        if (p == k) return 0;
        if (p != c) {
            std::swap(lap[p], lap[c]);
            det = -det;
        }
        det *= lap[c][c];
        for (std::size_t i = c + 1; i < k; ++i) {
            Q f = lap[i][c] / lap[c][c];
            for (std::size_t j = c; j < k; ++j) lap[i][j] -= f * lap[c][j];
        }
    }
    return det.get_num();
}

}  // namespace feynpar
