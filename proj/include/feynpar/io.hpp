#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "feynpar/graph.hpp"
#include "feynpar/graph_polynomials.hpp"
#include "feynpar/hopf.hpp"
#include "feynpar/laurent.hpp"
#include "feynpar/rational.hpp"
#include "feynpar/slicing.hpp"

namespace feynpar {

using json = nlohmann::ordered_json;

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(static_cast<bool>(in), ErrorKind::Parse, [&] { return "cannot open '" + path + "'"; });
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline json parse_json_text(const std::string& text, const std::string& origin) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::Parse, origin + ": " + e.what());
    }
}

inline json read_json_file(const std::string& path) { return parse_json_text(read_text_file(path), path); }

// FNV-1a over the concatenated inputs, length-prefixed so boundaries matter.
class InputHash {
public:
    void add(const std::string& bytes) {
        mix(std::to_string(bytes.size()) + ":");
        mix(bytes);
    }
    std::string hex() const {
        static const char* digits = "0123456789abcdef";
        std::string s(16, '0');
        for (int i = 0; i < 16; ++i) s[15 - i] = digits[(h_ >> (4 * i)) & 0xf];
        return s;
    }

private:
    void mix(const std::string& s) {
        for (unsigned char c : s) {
            h_ ^= c;
            h_ *= 0x100000001b3ULL;
        }
    }
    std::uint64_t h_ = 0xcbf29ce484222325ULL;
};

// ------------------------------------------------------------ scalars

inline Q rational_from_json(const json& j, const std::string& what = "rational") {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Q(j.get<long>());
    throw Error(ErrorKind::Parse, what + " must be a \"num/den\" string or an integer");
}

inline json rational_to_json(const Q& q) { return to_fraction_string(q); }

inline QMatrix matrix_from_json(const json& j, const std::string& what) {
    require(j.is_array(), ErrorKind::Parse, what + " must be an array of rows");
    QMatrix m;
    for (const auto& row : j) {
        require(row.is_array(), ErrorKind::Parse, what + " rows must be arrays");
        std::vector<Q> r;
        for (const auto& x : row) r.push_back(rational_from_json(x, what));
        m.push_back(std::move(r));
    }
    return m;
}

inline json matrix_to_json(const QMatrix& m) {
    json a = json::array();
    for (const auto& row : m) {
        json r = json::array();
        for (const auto& x : row) r.push_back(rational_to_json(x));
        a.push_back(r);
    }
    return a;
}

template <class T>
json series_to_json(const LaurentSeries<T>& s, int upto = kDefaultHigh) {
    json o = json::object();
    for (const auto& [k, v] : s.coefficients()) {
        if (k > upto) break;
        if constexpr (std::is_same_v<T, double>) o[std::to_string(k)] = v;
        else o[std::to_string(k)] = rational_to_json(v);
    }
    return o;
}

inline QSeries series_from_json(const json& j, int order) {
    require(j.is_object(), ErrorKind::Parse, "series must be an object {\"k\": \"num/den\"}");
    QSeries s(order);
    for (const auto& [k, v] : j.items()) {
        int e = 0;
        try {
            std::size_t used = 0;
            e = std::stoi(k, &used);
            require(used == k.size(), ErrorKind::Parse, "bad exponent '" + k + "'");
        } catch (const std::logic_error&) {
            throw Error(ErrorKind::Parse, "bad exponent '" + k + "'");
        }
        s.set(e, rational_from_json(v, "series coefficient"));
    }
    return s;
}

// ------------------------------------------------------------ graphs

struct GraphFile {
    FeynmanGraph graph;
    std::optional<Q> p2;  // kinematics block, overridden by --p2
    Q mass2 = 0;
};

inline std::string json_string(const json& j, const char* key, const std::string& ctx) {
    require(j.contains(key) && j[key].is_string(), ErrorKind::Parse,
            [&] { return ctx + ": missing string field '" + key + "'"; });
    return j[key].get<std::string>();
}

inline GraphFile graph_from_json(const json& j) {
    require(j.is_object(), ErrorKind::Parse, "graph JSON must be an object");
    GraphFile out;
    FeynmanGraph& g = out.graph;
    if (j.contains("name")) g.name = j["name"].get<std::string>();
    require(j.contains("vertices") && j["vertices"].is_array(), ErrorKind::Parse, "graph needs a vertices array");
    for (const auto& v : j["vertices"]) g.vertices.push_back(v.is_string() ? v.get<std::string>() : v.dump());
    require(j.contains("edges") && j["edges"].is_array(), ErrorKind::Parse, "graph needs an edges array");
    for (const auto& e : j["edges"])
        g.edges.push_back({json_string(e, "id", "edge"), json_string(e, "src", "edge"), json_string(e, "tgt", "edge")});
    if (j.contains("external"))
        for (const auto& l : j["external"]) {
            std::string mom = l.contains("momentum") ? l["momentum"].get<std::string>() : "";
            g.legs.push_back({json_string(l, "id", "external leg"), json_string(l, "vertex", "external leg"), mom});
        }
    if (j.contains("theory")) {
        const auto& t = j["theory"];
        if (t.contains("power")) g.theory_power = t["power"].get<int>();
        if (t.contains("dimension")) g.dimension = t["dimension"].get<int>();
    }
    if (j.contains("kinematics")) {
        const auto& k = j["kinematics"];
        if (k.contains("p2")) out.p2 = rational_from_json(k["p2"], "p2");
        if (k.contains("mass2")) out.mass2 = rational_from_json(k["mass2"], "mass2");
    }
    out.graph = validate(g);
    return out;
}

inline GraphFile read_graph_file(const std::string& path) {
    try {
        return graph_from_json(read_json_file(path));
    } catch (const json::exception& e) {
        throw Error(ErrorKind::Parse, path + ": " + e.what());
    }
}

inline json graph_to_json(const FeynmanGraph& g) {
    json j;
    j["name"] = g.name;
    j["vertices"] = g.vertices;
    json es = json::array();
    for (const auto& e : g.edges) es.push_back({{"id", e.id}, {"src", e.src}, {"tgt", e.tgt}});
    j["edges"] = es;
    json ls = json::array();
    for (const auto& l : g.legs) ls.push_back({{"id", l.id}, {"vertex", l.vertex}, {"momentum", l.momentum}});
    j["external"] = ls;
    j["theory"] = {{"power", g.theory_power}, {"dimension", g.dimension}};
    return j;
}

// {labels:[...], gram:[[num/den,...]], mass2?}
inline MomentumData gram_from_json(const json& j) {
    require(j.is_object() && j.contains("labels") && j.contains("gram"), ErrorKind::Parse,
            "Gram JSON needs labels and gram");
    auto labels = j["labels"].get<std::vector<std::string>>();
    QMatrix gram = matrix_from_json(j["gram"], "gram");
    require(gram.size() == labels.size(), ErrorKind::ArityMismatch, "Gram matrix size differs from label count");
    for (std::size_t i = 0; i < gram.size(); ++i) {
        require(gram[i].size() == labels.size(), ErrorKind::ArityMismatch, "Gram matrix is not square");
        for (std::size_t k = 0; k < i; ++k)
            require(gram[i][k] == gram[k][i], ErrorKind::Parse, "Gram matrix is not symmetric");
    }
    MomentumData m = MomentumData::from_gram(std::move(labels), std::move(gram));
    if (j.contains("mass2")) m.mass2 = rational_from_json(j["mass2"], "mass2");
    return m;
}

// ------------------------------------------------------------ slices

// {coords?, basis|normals: [[...]], seed?}; exact rows.
struct SliceFile {
    std::vector<std::string> coords;
    QMatrix rows;
    bool normals = false;
    std::uint64_t seed = 0;
};

inline SliceFile slice_file_from_json(const json& j) {
    require(j.is_object(), ErrorKind::Parse, "slice JSON must be an object");
    SliceFile s;
    if (j.contains("coords")) s.coords = j["coords"].get<std::vector<std::string>>();
    if (j.contains("seed")) s.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("normals")) {
        s.normals = true;
        s.rows = matrix_from_json(j["normals"], "normals");
    } else {
        require(j.contains("basis") || j.contains("rows"), ErrorKind::Parse, "slice needs basis or normals");
        s.rows = matrix_from_json(j.contains("basis") ? j["basis"] : j["rows"], "basis");
    }
    return s;
}

inline LinearSlice linear_slice_from_file(const SliceFile& f, std::size_t ambient) {
    for (const auto& r : f.rows)
        require(r.size() == ambient, ErrorKind::ArityMismatch, "slice row length differs from the ambient dimension");
    if (f.normals) return slice_from_normals(ambient, f.rows, f.seed);
    // basis given: normals are the kernel of the basis rows
    QMatrix b = f.rows;
    auto piv = row_reduce(b);
    b.resize(piv.size());
    QMatrix normals;
    for (std::size_t free = 0; free < ambient; ++free) {
        if (std::find(piv.begin(), piv.end(), free) != piv.end()) continue;
        std::vector<Q> v(ambient, Q(0));
        v[free] = 1;
        for (std::size_t r = 0; r < piv.size(); ++r) v[piv[r]] = -b[r][free] / b[r][piv[r]];
        normals.push_back(v);
    }
    return slice_from_normals(ambient, normals, f.seed);
}

inline json slice_to_json(const LinearSlice& s) {
    return {{"ambient", s.ambient}, {"dim", s.dim}, {"seed", s.seed},
            {"basis", matrix_to_json(s.basis)}, {"normals", matrix_to_json(s.normals)}};
}

// ------------------------------------------------------------ characters

struct ToySpec {
    std::string name;
    int grade = 1;
    int loops = -1;
    std::vector<std::tuple<Q, std::vector<std::string>, std::vector<std::string>>> reduced;
};

enum class MuRule { None, Loops };

// {order, log_mu?, mu_rule?: "loops"|"none", toys:[...], graphs:[paths],
//  values:{name:{"k":"num/den"}}}
struct CharacterSpec {
    int order = kDefaultHigh;
    Q log_mu = 0;
    MuRule mu_rule = MuRule::Loops;
    std::vector<ToySpec> toys;
    std::vector<std::string> graph_files;  // resolved against the character file's directory
    std::map<std::string, QSeries> values;
};

inline CharacterSpec character_spec_from_json(const json& j, const std::string& base_dir = ".") {
    require(j.is_object(), ErrorKind::Parse, "character spec must be an object");
    CharacterSpec c;
    if (j.contains("order")) c.order = j["order"].get<int>();
    if (j.contains("log_mu")) c.log_mu = rational_from_json(j["log_mu"], "log_mu");
    if (j.contains("mu_rule")) {
        std::string r = j["mu_rule"].get<std::string>();
        require(r == "loops" || r == "none", ErrorKind::Parse, "mu_rule must be \"loops\" or \"none\"");
        c.mu_rule = r == "loops" ? MuRule::Loops : MuRule::None;
    }
    if (j.contains("toys"))
        for (const auto& t : j["toys"]) {
            ToySpec ts;
            ts.name = json_string(t, "name", "toy");
            ts.grade = t.value("grade", 1);
            ts.loops = t.value("loops", -1);
            if (t.contains("reduced"))
                for (const auto& r : t["reduced"])
                    ts.reduced.emplace_back(rational_from_json(r.value("coef", json("1")), "coef"),
                                            r["left"].get<std::vector<std::string>>(),
                                            r["right"].get<std::vector<std::string>>());
            c.toys.push_back(std::move(ts));
        }
    if (j.contains("graphs"))
        for (const auto& g : j["graphs"]) {
            std::filesystem::path p(g.get<std::string>());
            if (p.is_relative()) p = std::filesystem::path(base_dir) / p;
            c.graph_files.push_back(p.string());
        }
    require(j.contains("values"), ErrorKind::Parse, "character spec needs values");
    for (const auto& [name, s] : j["values"].items()) c.values[name] = series_from_json(s, c.order);
    return c;
}

struct LoadedCharacter {
    HopfAlgebra algebra;
    Character<Q> phi;      // as given
    Character<Q> phi_mu;   // with the mass-scale prefactor applied
    std::vector<int> roots;
    std::vector<std::string> root_names;
    Q log_mu = 0;
};

// Builds the Hopf algebra spanned by the character file's toys and graphs. Every generator
// in the closure must receive a value.
inline LoadedCharacter load_character(const CharacterSpec& spec, DivergenceRule rule = {},
                                      DecorationRule drule = DecorationRule::RestrictedDimension) {
    LoadedCharacter out{HopfAlgebra(std::move(rule), drule), Character<Q>(spec.order), Character<Q>(spec.order), {}, {}};
    HopfAlgebra& h = out.algebra;
    for (const auto& t : spec.toys) out.roots.push_back(h.add_toy(t.name, t.grade, t.loops));
    auto lookup = [&](const std::string& n) {
        auto id = h.find_name(n);
        require(id.has_value(), ErrorKind::Parse, "unknown generator '" + n + "' in reduced coproduct");
        return *id;
    };
    for (std::size_t i = 0; i < spec.toys.size(); ++i) {
        std::vector<ReducedTerm> terms;
        for (const auto& [c, l, r] : spec.toys[i].reduced) {
            ReducedTerm t{c, {}, {}};
            for (const auto& n : l) t.left.push_back(lookup(n));
            for (const auto& n : r) t.right.push_back(lookup(n));
            std::sort(t.left.begin(), t.left.end());
            std::sort(t.right.begin(), t.right.end());
            terms.push_back(std::move(t));
        }
        h.set_reduced(out.roots[i], std::move(terms));
    }
    for (const auto& path : spec.graph_files) {
        auto gf = read_graph_file(path);
        auto id = h.add_graph(gf.graph);
        if (id) out.roots.push_back(*id);
    }
    for (int id : h.closure(out.roots)) {
        const std::string& name = h.generator(id).name;
        auto it = spec.values.find(name);
        require(it != spec.values.end(), ErrorKind::Parse, "character has no value for generator '" + name + "'");
        out.phi.set(id, it->second);
    }
    for (int id : out.roots) out.root_names.push_back(h.generator(id).name);
    out.log_mu = spec.log_mu;
    out.phi_mu = spec.mu_rule == MuRule::Loops ? mu_character(h, out.phi, spec.log_mu, spec.order) : out.phi;
    return out;
}

}  // namespace feynpar
