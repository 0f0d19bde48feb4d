#pragma once

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <string>
#include <type_traits>

#include "feynpar/error.hpp"
#include "feynpar/rational.hpp"

namespace feynpar {

inline constexpr int kExactOrder = INT_MAX / 4;  // "known to all orders"
inline constexpr int kDefaultLow = -8;
inline constexpr int kDefaultHigh = 8;

namespace detail {
inline int add_order(int a, int b) {
    if (a >= kExactOrder || b >= kExactOrder) return kExactOrder;
    return a + b;
}
template <class T>
bool is_zero_coef(const T& x) {
    if constexpr (std::is_same_v<T, double>) return x == 0.0;
    else return x == 0;
}
}  // namespace detail

// Truncated Laurent series in z. Coefficients are exact for exponents <= order();
// beyond that nothing is known. Zero coefficients are not stored.
template <class T>
class LaurentSeries {
public:
    LaurentSeries() = default;
    explicit LaurentSeries(int order) : hi_(order) {}

    static LaurentSeries constant(const T& c, int order = kExactOrder) { return monomial(0, c, order); }
    static LaurentSeries monomial(int k, const T& c, int order = kExactOrder) {
        LaurentSeries s(order);
        s.set(k, c);
        return s;
    }

    int order() const { return hi_; }
    bool exact() const { return hi_ >= kExactOrder; }
    const std::map<int, T>& coefficients() const { return c_; }

    // Smallest exponent that may be nonzero.
    int low() const {
        if (!c_.empty()) return c_.begin()->first;
        return hi_ >= kExactOrder ? kExactOrder : hi_ + 1;
    }
    bool is_zero() const { return c_.empty(); }

    T operator[](int k) const {
        require(k <= hi_, ErrorKind::TruncationUnderflow,
                "coefficient z^" + std::to_string(k) + " beyond known order " + std::to_string(hi_));
        auto it = c_.find(k);
        return it == c_.end() ? T(0) : it->second;
    }
    void set(int k, const T& v) {
        if (k > hi_) return;
        if (detail::is_zero_coef(v)) c_.erase(k);
        else c_[k] = v;
    }

    LaurentSeries truncated(int order) const {
        LaurentSeries r(std::min(order, hi_));
        for (const auto& [k, v] : c_)
            if (k <= r.hi_) r.c_[k] = v;
        return r;
    }

    LaurentSeries& operator+=(const LaurentSeries& o) {
        int h = std::min(hi_, o.hi_);
        LaurentSeries r(h);
        for (const auto& [k, v] : c_)
            if (k <= h) r.c_[k] = v;
        for (const auto& [k, v] : o.c_)
            if (k <= h) r.set(k, r.get(k) + v);
        return *this = r;
    }
    LaurentSeries operator-() const {
        LaurentSeries r = *this;
        for (auto& kv : r.c_) kv.second = -kv.second;
        return r;
    }
    LaurentSeries& operator-=(const LaurentSeries& o) { return *this += -o; }
    LaurentSeries& operator*=(const T& s) {
        if (detail::is_zero_coef(s)) {
            c_.clear();
            return *this;
        }
        for (auto& kv : c_) kv.second *= s;
        return *this;
    }
    friend LaurentSeries operator+(LaurentSeries a, const LaurentSeries& b) { return a += b; }
    friend LaurentSeries operator-(LaurentSeries a, const LaurentSeries& b) { return a -= b; }
    friend LaurentSeries operator*(LaurentSeries a, const T& s) { return a *= s; }
    friend LaurentSeries operator*(const T& s, LaurentSeries a) { return a *= s; }

    friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
        int h = std::min(detail::add_order(a.hi_, b.low()), detail::add_order(b.hi_, a.low()));
        LaurentSeries r(h);
        for (const auto& [ka, va] : a.c_)
            for (const auto& [kb, vb] : b.c_) {
                int k = ka + kb;
                if (k > h) break;
                r.set(k, r.get(k) + va * vb);
            }
        return r;
    }
    LaurentSeries& operator*=(const LaurentSeries& o) { return *this = *this * o; }

    // Multiplicative inverse; needs a nonzero leading coefficient.
    LaurentSeries inverse(int window_high = kDefaultHigh) const {
        require(!c_.empty(), ErrorKind::Precondition, "inverse of a zero series");
        int k0 = c_.begin()->first;
        int rel = hi_ >= kExactOrder ? window_high + k0 : hi_ - k0;  // relative precision
        int h = hi_ >= kExactOrder ? window_high : rel - k0;
        LaurentSeries r(h);
        T a0 = c_.begin()->second;
        std::map<int, T> inv;
        for (int j = 0; j <= rel; ++j) {
            T s = j == 0 ? T(1) : T(0);
            for (int i = 1; i <= j; ++i) {
                auto it = c_.find(k0 + i);
                if (it != c_.end()) {
                    auto jt = inv.find(j - i);
                    if (jt != inv.end()) s -= it->second * jt->second;
                }
            }
            T v = s / a0;
            if (!detail::is_zero_coef(v)) inv[j] = v;
        }
        for (const auto& [j, v] : inv) r.set(j - k0, v);
        return r;
    }

    LaurentSeries derivative() const {
        LaurentSeries r(hi_ >= kExactOrder ? kExactOrder : hi_ - 1);
        for (const auto& [k, v] : c_)
            if (k != 0) r.set(k - 1, v * T(k));
        return r;
    }

    // Minimal subtraction: strictly polar part.
    LaurentSeries polar_part() const {
        require(hi_ >= -1, ErrorKind::TruncationUnderflow, "polar part needs coefficients up to z^-1");
        LaurentSeries r(kExactOrder);
        for (const auto& [k, v] : c_)
            if (k < 0) r.c_[k] = v;
        return r;
    }
    LaurentSeries regular_part() const { return *this - polar_part(); }

    bool has_poles() const { return !c_.empty() && c_.begin()->first < 0; }

    // Equality of all coefficients known to both series.
    friend bool window_equal(const LaurentSeries& a, const LaurentSeries& b) {
        int h = std::min(a.hi_, b.hi_);
        for (const auto& [k, v] : a.c_)
            if (k <= h && !(v == b.get(k))) return false;
        for (const auto& [k, v] : b.c_)
            if (k <= h && !(v == a.get(k))) return false;
        return true;
    }

    double max_abs(int upto) const {
        double m = 0;
        for (const auto& [k, v] : c_)
            if (k <= upto) m = std::max(m, std::fabs(to_double(v)));
        return m;
    }

    static double to_double(const T& v) {
        if constexpr (std::is_same_v<T, double>) return v;
        else return v.get_d();
    }

    std::string to_string(int upto = kDefaultHigh) const {
        std::string s;
        int h = std::min(hi_, upto);
        for (const auto& [k, v] : c_) {
            if (k > h) break;
            std::string cs;
            if constexpr (std::is_same_v<T, double>) cs = std::to_string(v);
            else cs = v.get_str();
            if (!s.empty()) s += " + ";
            s += "(" + cs + ")";
            if (k != 0) s += "*z^" + std::to_string(k);
        }
        if (s.empty()) s = "0";
        if (hi_ < kExactOrder) s += " + O(z^" + std::to_string(hi_ + 1) + ")";
        return s;
    }

private:
    T get(int k) const {
        auto it = c_.find(k);
        return it == c_.end() ? T(0) : it->second;
    }

    int hi_ = kExactOrder;
    std::map<int, T> c_;
};

using QSeries = LaurentSeries<Q>;
using DSeries = LaurentSeries<double>;

// exp(c z) with exact rational c, known up to z^order.
inline QSeries exp_linear(const Q& c, int order = kDefaultHigh) {
    QSeries s(order);
    Q term = 1;
    for (int k = 0; k <= order; ++k) {
        s.set(k, term);
        term = term * c / Q(k + 1);
    }
    return s;
}

inline DSeries exp_linear(double c, int order) {
    DSeries s(order);
    double term = 1;
    for (int k = 0; k <= order; ++k) {
        s.set(k, term);
        term = term * c / (k + 1);
    }
    return s;
}

}  // namespace feynpar
