#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "feynpar/error.hpp"
#include "feynpar/rational.hpp"

namespace feynpar {

using Exponent = std::vector<int>;

inline int exponent_degree(const Exponent& e) {
    int d = 0;
    for (int x : e) d += x;
    return d;
}

// Ascending graded-lex; the leading term is the last one.
struct GrlexLess {
    bool operator()(const Exponent& a, const Exponent& b) const {
        int da = exponent_degree(a), db = exponent_degree(b);
        if (da != db) return da < db;
        return a < b;
    }
};

inline bool exponent_divides(const Exponent& a, const Exponent& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline Exponent exponent_lcm(const Exponent& a, const Exponent& b) {
    Exponent r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = std::max(a[i], b[i]);
    return r;
}

inline Exponent exponent_sub(const Exponent& a, const Exponent& b) {
    Exponent r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
    return r;
}

inline Exponent exponent_add(const Exponent& a, const Exponent& b) {
    Exponent r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
    return r;
}

struct Homogeneity {
    bool homogeneous = true;
    int degree = 0;
    std::vector<int> variable_degree;
};

class MultiPoly {
public:
    using TermMap = std::map<Exponent, Q, GrlexLess>;

    explicit MultiPoly(std::size_t arity = 0) : n_(arity) {}

    static MultiPoly constant(std::size_t arity, const Q& c) {
        MultiPoly p(arity);
        p.add_term(Exponent(arity, 0), c);
        return p;
    }
    static MultiPoly variable(std::size_t arity, std::size_t i) {
        require(i < arity, ErrorKind::ArityMismatch, "variable index out of range");
        Exponent e(arity, 0);
        e[i] = 1;
        MultiPoly p(arity);
        p.add_term(e, 1);
        return p;
    }
    static MultiPoly monomial(const Exponent& e, const Q& c) {
        MultiPoly p(e.size());
        p.add_term(e, c);
        return p;
    }

    std::size_t arity() const { return n_; }
    const TermMap& terms() const { return terms_; }
    std::size_t size() const { return terms_.size(); }
    bool is_zero() const { return terms_.empty(); }
    bool is_constant() const {
        return terms_.empty() || (terms_.size() == 1 && exponent_degree(terms_.begin()->first) == 0);
    }
    Q constant_term() const {
        auto it = terms_.find(Exponent(n_, 0));
        return it == terms_.end() ? Q(0) : it->second;
    }
    Q coefficient(const Exponent& e) const {
        auto it = terms_.find(e);
        return it == terms_.end() ? Q(0) : it->second;
    }

    void add_term(const Exponent& e, const Q& c) {
        require(e.size() == n_, ErrorKind::ArityMismatch, "exponent length differs from arity");
        if (c == 0) return;
        auto it = terms_.find(e);
        if (it == terms_.end()) {
            terms_.emplace(e, c);
        } else {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    const Exponent& leading_exponent() const {
        require(!is_zero(), ErrorKind::ZeroPolynomial, "leading term of zero polynomial");
        return terms_.rbegin()->first;
    }
    const Q& leading_coefficient() const {
        require(!is_zero(), ErrorKind::ZeroPolynomial, "leading term of zero polynomial");
        return terms_.rbegin()->second;
    }

    int total_degree() const {
        if (is_zero()) return -1;
        return exponent_degree(terms_.rbegin()->first);
    }
    int degree_in(std::size_t i) const {
        int d = is_zero() ? -1 : 0;
        for (const auto& [e, c] : terms_) d = std::max(d, e[i]);
        return d;
    }

    MultiPoly operator-() const {
        MultiPoly r(*this);
        for (auto& kv : r.terms_) kv.second = -kv.second;
        return r;
    }
    MultiPoly& operator+=(const MultiPoly& o) {
        check_arity(o);
        for (const auto& [e, c] : o.terms_) add_term(e, c);
        return *this;
    }
    MultiPoly& operator-=(const MultiPoly& o) {
        check_arity(o);
        for (const auto& [e, c] : o.terms_) add_term(e, -c);
        return *this;
    }
    MultiPoly& operator*=(const Q& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& kv : terms_) kv.second *= s;
        return *this;
    }
    friend MultiPoly operator+(MultiPoly a, const MultiPoly& b) { return a += b; }
    friend MultiPoly operator-(MultiPoly a, const MultiPoly& b) { return a -= b; }
    friend MultiPoly operator*(MultiPoly a, const Q& s) { return a *= s; }
    friend MultiPoly operator*(const Q& s, MultiPoly a) { return a *= s; }
    friend MultiPoly operator*(const MultiPoly& a, const MultiPoly& b) {
        a.check_arity(b);
        MultiPoly r(a.n_);
        for (const auto& [ea, ca] : a.terms_)
            for (const auto& [eb, cb] : b.terms_) r.add_term(exponent_add(ea, eb), ca * cb);
        return r;
    }
    MultiPoly& operator*=(const MultiPoly& o) { return *this = *this * o; }

    MultiPoly mul_term(const Exponent& e, const Q& c) const {
        MultiPoly r(n_);
        if (c == 0) return r;
        for (const auto& [ea, ca] : terms_) r.terms_.emplace(exponent_add(ea, e), ca * c);
        return r;
    }

    MultiPoly pow(unsigned k) const {
        MultiPoly r = constant(n_, 1);
        MultiPoly b = *this;
        while (k) {
            if (k & 1u) r *= b;
            k >>= 1;
            if (k) b *= b;
        }
        return r;
    }

    friend bool operator==(const MultiPoly& a, const MultiPoly& b) {
        return a.n_ == b.n_ && a.terms_ == b.terms_;
    }
    friend bool operator!=(const MultiPoly& a, const MultiPoly& b) { return !(a == b); }

    Q eval(const std::vector<Q>& x) const {
        require(x.size() == n_, ErrorKind::ArityMismatch, "evaluation point has wrong length");
        Q s = 0;
        for (const auto& [e, c] : terms_) {
            Q t = c;
            for (std::size_t i = 0; i < n_; ++i)
                if (e[i]) t *= q_pow(x[i], static_cast<unsigned>(e[i]));
            s += t;
        }
        return s;
    }

    MultiPoly derivative(std::size_t i) const {
        require(i < n_, ErrorKind::ArityMismatch, "derivative variable out of range");
        MultiPoly r(n_);
        for (const auto& [e, c] : terms_) {
            if (e[i] == 0) continue;
            Exponent f = e;
            f[i] -= 1;
            r.add_term(f, c * e[i]);
        }
        return r;
    }

    Homogeneity homogeneity() const {
        require(!is_zero(), ErrorKind::ZeroPolynomial, "homogeneity of the zero polynomial");
        Homogeneity h;
        h.degree = total_degree();
        h.variable_degree.assign(n_, 0);
        for (const auto& [e, c] : terms_) {
            if (exponent_degree(e) != h.degree) h.homogeneous = false;
            for (std::size_t i = 0; i < n_; ++i) h.variable_degree[i] = std::max(h.variable_degree[i], e[i]);
        }
        return h;
    }

    bool is_homogeneous() const { return is_zero() || homogeneity().homogeneous; }

    // Replace variable i by images[i]; all images share one arity.
    MultiPoly substitute(const std::vector<MultiPoly>& images) const {
        require(images.size() == n_, ErrorKind::ArityMismatch, "substitution needs one image per variable");
        std::size_t m = images.empty() ? 0 : images[0].arity();
        for (const auto& im : images) require(im.arity() == m, ErrorKind::ArityMismatch, "images differ in arity");
        std::vector<std::vector<MultiPoly>> powers(n_);
        MultiPoly r(m);
        for (const auto& [e, c] : terms_) {
            MultiPoly t = constant(m, c);
            for (std::size_t i = 0; i < n_; ++i) {
                if (!e[i]) continue;
                auto& pw = powers[i];
                if (pw.empty()) pw.push_back(constant(m, 1));
                while (static_cast<int>(pw.size()) <= e[i]) pw.push_back(pw.back() * images[i]);
                t *= pw[e[i]];
            }
            r += t;
        }
        return r;
    }

    // Same polynomial viewed in a larger ring; variable i goes to slot map[i].
    MultiPoly embed(std::size_t new_arity, const std::vector<std::size_t>& map) const {
        MultiPoly r(new_arity);
        for (const auto& [e, c] : terms_) {
            Exponent f(new_arity, 0);
            for (std::size_t i = 0; i < n_; ++i) f[map[i]] += e[i];
            r.add_term(f, c);
        }
        return r;
    }

    // Coefficients of powers of variable v; each coefficient is free of v.
    std::map<int, MultiPoly> coefficients_in(std::size_t v) const {
        std::map<int, MultiPoly> out;
        for (const auto& [e, c] : terms_) {
            Exponent f = e;
            int k = f[v];
            f[v] = 0;
            auto it = out.find(k);
            if (it == out.end()) it = out.emplace(k, MultiPoly(n_)).first;
            it->second.add_term(f, c);
        }
        return out;
    }

    MultiPoly monic() const {
        if (is_zero()) return *this;
        return *this * (Q(1) / leading_coefficient());
    }

    std::string to_string(const std::vector<std::string>& names = {}) const;
    std::string serialize() const;
    static MultiPoly parse_serialized(const std::string& text, std::size_t arity);

private:
    void check_arity(const MultiPoly& o) const {
        if (n_ != o.n_)
            throw Error(ErrorKind::ArityMismatch, "arity " + std::to_string(n_) + " vs " + std::to_string(o.n_));
    }

    std::size_t n_;
    TermMap terms_;
};

inline std::vector<std::string> default_names(std::size_t n, const std::string& stem = "t") {
    std::vector<std::string> v;
    for (std::size_t i = 0; i < n; ++i) v.push_back(stem + std::to_string(i + 1));
    return v;
}

inline std::string MultiPoly::to_string(const std::vector<std::string>& names_in) const {
    if (is_zero()) return "0";
    std::vector<std::string> names = names_in.empty() ? default_names(n_) : names_in;
    std::string out;
    bool first = true;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        const Exponent& e = it->first;
        Q c = it->second;
        bool neg = c < 0;
        if (neg) c = -c;
        if (neg)
            out += "-";
        else if (!first)
            out += "+";
        first = false;
        std::string mono;
        for (std::size_t i = 0; i < n_; ++i) {
            if (!e[i]) continue;
            if (!mono.empty()) mono += "*";
            mono += names[i];
            if (e[i] > 1) mono += "^" + std::to_string(e[i]);
        }
        if (mono.empty()) {
            out += c.get_str();
        } else {
            if (c != 1) out += c.get_str() + "*";
            out += mono;
        }
    }
    return out;
}

// One line per term: "coef num/den : e1 e2 ... en", leading term first.
inline std::string MultiPoly::serialize() const {
    std::string out;
    for (auto it = terms_.rbegin(); it != terms_.rend(); ++it) {
        out += "coef " + to_fraction_string(it->second) + " :";
        for (int x : it->first) out += " " + std::to_string(x);
        out += "\n";
    }
    return out;
}

inline MultiPoly MultiPoly::parse_serialized(const std::string& text, std::size_t arity) {
    MultiPoly p(arity);
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        std::istringstream ls(line);
        std::string tag, coef, colon;
        ls >> tag >> coef >> colon;
        if (tag != "coef" || colon != ":") throw Error(ErrorKind::Parse, "bad polynomial line '" + line + "'");
        Exponent e;
        int x;
        while (ls >> x) {
            if (x < 0) throw Error(ErrorKind::Parse, "negative exponent");
            e.push_back(x);
        }
        if (e.size() != arity) throw Error(ErrorKind::Parse, "exponent count differs from arity");
        p.add_term(e, parse_rational(coef));
    }
    return p;
}

// Exact division; nullopt when b does not divide a.
inline std::optional<MultiPoly> exact_divide(const MultiPoly& a, const MultiPoly& b) {
    require(!b.is_zero(), ErrorKind::ZeroPolynomial, "division by zero polynomial");
    require(a.arity() == b.arity(), ErrorKind::ArityMismatch, "division arity");
    MultiPoly r = a;
    MultiPoly q(a.arity());
    const Exponent& lb = b.leading_exponent();
    const Q& cb = b.leading_coefficient();
    while (!r.is_zero()) {
        const Exponent& lr = r.leading_exponent();
        if (!exponent_divides(lb, lr)) return std::nullopt;
        Exponent d = exponent_sub(lr, lb);
        Q c = r.leading_coefficient() / cb;
        q.add_term(d, c);
        r -= b.mul_term(d, c);
    }
    return q;
}

inline bool divides(const MultiPoly& a, const MultiPoly& b) {
    return exact_divide(b, a).has_value();
}

// Fast floating-point evaluator for quadrature inner loops.
class CompiledPoly {
public:
    CompiledPoly() = default;
    explicit CompiledPoly(const MultiPoly& p) : n_(p.arity()) {
        for (const auto& [e, c] : p.terms()) {
            coef_.push_back(c.get_d());
            exps_.insert(exps_.end(), e.begin(), e.end());
            for (int x : e) maxdeg_ = std::max(maxdeg_, x);
        }
    }
    std::size_t arity() const { return n_; }
    bool empty() const { return coef_.empty(); }

    double operator()(const double* x) const {
        if (coef_.empty()) return 0.0;
        thread_local std::vector<double> pw;
        std::size_t stride = static_cast<std::size_t>(maxdeg_) + 1;
        pw.resize(n_ * stride);
        for (std::size_t i = 0; i < n_; ++i) {
            double* row = &pw[i * stride];
            row[0] = 1.0;
            for (int k = 1; k <= maxdeg_; ++k) row[k] = row[k - 1] * x[i];
        }
        double s = 0.0;
        for (std::size_t t = 0; t < coef_.size(); ++t) {
            double v = coef_[t];
            const int* e = &exps_[t * n_];
            for (std::size_t i = 0; i < n_; ++i)
                if (e[i]) v *= pw[i * stride + static_cast<std::size_t>(e[i])];
            s += v;
        }
        return s;
    }
    double operator()(const std::vector<double>& x) const { return (*this)(x.data()); }

private:
    std::size_t n_ = 0;
    int maxdeg_ = 0;
    std::vector<double> coef_;
    std::vector<int> exps_;
};

}  // namespace feynpar
