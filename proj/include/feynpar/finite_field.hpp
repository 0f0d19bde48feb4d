#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "feynpar/poly.hpp"

namespace feynpar {

inline bool is_prime(std::uint64_t q) {
    if (q < 2) return false;
    for (std::uint64_t d = 2; d * d <= q; ++d)
        if (q % d == 0) return false;
    return true;
}

inline std::uint64_t mod_pow(std::uint64_t b, std::uint64_t e, std::uint64_t q) {
    std::uint64_t r = 1 % q;
    b %= q;
    while (e) {
        if (e & 1) r = r * b % q;
        b = b * b % q;
        e >>= 1;
    }
    return r;
}

inline std::uint64_t reduce_mod(const Q& c, std::uint64_t q) {
    mpz_class num = c.get_num(), den = c.get_den();
    mpz_class qq = static_cast<unsigned long>(q);
    mpz_class dm = den % qq;
    require(dm != 0, ErrorKind::Precondition, "coefficient denominator divisible by q");
    mpz_class nm = num % qq;
    if (nm < 0) nm += qq;
    std::uint64_t a = nm.get_ui();
    std::uint64_t inv = mod_pow(dm.get_ui(), q - 2, q);
    return a * inv % q;
}

struct FiniteFieldPoly {
    std::uint64_t q;
    std::size_t n;
    std::vector<std::uint64_t> coef;
    std::vector<int> exps;

    FiniteFieldPoly(const MultiPoly& p, std::uint64_t q_) : q(q_), n(p.arity()) {
        for (const auto& [e, c] : p.terms()) {
            std::uint64_t r = reduce_mod(c, q);
            if (!r) continue;
            coef.push_back(r);
            exps.insert(exps.end(), e.begin(), e.end());
        }
    }
    std::uint64_t eval(const std::vector<std::uint64_t>& x) const {
        std::uint64_t s = 0;
        for (std::size_t t = 0; t < coef.size(); ++t) {
            std::uint64_t v = coef[t];
            for (std::size_t i = 0; i < n; ++i) {
                int e = exps[t * n + i];
                if (e) v = v * mod_pow(x[i], static_cast<std::uint64_t>(e), q) % q;
            }
            s = (s + v) % q;
        }
        return s;
    }
};

// Brute-force zero count over F_q^n (affine) or P^{n-1}(F_q) (projective).
inline std::uint64_t finite_field_point_count(const MultiPoly& p, std::uint64_t q, bool projective) {
    require(!p.is_zero(), ErrorKind::ZeroPolynomial, "point count of the zero polynomial");
    require(is_prime(q), ErrorKind::Precondition, "q must be prime");
    require(q <= (1u << 20), ErrorKind::TooLarge, "q above 2^20");
    std::size_t n = p.arity();
    require(static_cast<double>(n) * std::log2(static_cast<double>(q)) <= 24.0 + 1e-12, ErrorKind::TooLarge,
            "enumeration bound arity*log2(q) <= 24 exceeded");
    if (projective) {
        require(p.is_homogeneous(), ErrorKind::Precondition, "projective count needs a homogeneous polynomial");
        require(n >= 1, ErrorKind::Precondition, "projective count needs arity >= 1");
    }
    FiniteFieldPoly f(p, q);
    std::uint64_t count = 0;
    std::vector<std::uint64_t> x(n, 0);
    if (!projective) {
        while (true) {
            if (f.eval(x) == 0) ++count;
            std::size_t i = 0;
            while (i < n && ++x[i] == q) x[i++] = 0;
            if (i == n) break;
        }
        return count;
    }
    // Representatives with first nonzero coordinate equal to 1.
    for (std::size_t lead = 0; lead < n; ++lead) {
        std::fill(x.begin(), x.end(), 0);
        x[lead] = 1;
        while (true) {
            if (f.eval(x) == 0) ++count;
            std::size_t i = lead + 1;
            while (i < n && ++x[i] == q) x[i++] = 0;
            if (i >= n) break;
        }
    }
    return count;
}

}  // namespace feynpar
