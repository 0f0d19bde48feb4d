#pragma once

#include <numeric>
#include <optional>
#include <string>

#include "feynpar/error.hpp"
#include "feynpar/poly.hpp"

namespace feynpar {

// Regimes by the signs of n - D(l+1)/2 and n - D l/2.
enum class Regime { PDominant, Mixed, PsiDominant };

inline const char* regime_name(Regime r) {
    switch (r) {
    case Regime::PDominant: return "n-D(l+1)/2>=0";
    case Regime::Mixed: return "n-D(l+1)/2<0<n-Dl/2";
    case Regime::PsiDominant: return "n-Dl/2<=0";
    }
    return "?";
}

struct CaseTableResult {
    Regime regime = Regime::PsiDominant;
    int f_exp_p = 0;    // f = P^f_exp_p * Psi^f_exp_psi
    int f_exp_psi = 0;
    int m = 0;
    int omega_exp_p = 0;  // polynomial factor multiplying the volume form (h in the sliced table)
    int omega_exp_psi = 0;
    int deg_f = 0;
    int c = 0;
    std::optional<int> r_max;  // sliced table only
};

namespace detail {

inline CaseTableResult case_table(int n, int dim, int loops) {
    require(dim > 0 && dim % 2 == 0, ErrorKind::OddDimension, "case tables need even positive D");
    require(n >= 1 && loops >= 1, ErrorKind::Precondition, "case tables need n >= 1 and l >= 1");
    int h = dim / 2;
    int a = n - h * loops;        // n - D l / 2
    int b = n - h * (loops + 1);  // n - D (l+1) / 2
    CaseTableResult r;
    if (b >= 0) {
        r.regime = Regime::PDominant;
        r.f_exp_p = 1;
        r.m = a;
        r.omega_exp_psi = b;
    } else if (a > 0) {
        r.regime = Regime::Mixed;
        r.m = std::gcd(a, h);
        r.f_exp_p = a / r.m;
        r.f_exp_psi = h / r.m;
        r.omega_exp_psi = a;
    } else {
        r.regime = Regime::PsiDominant;
        r.f_exp_psi = 1;
        r.m = -b;
        r.omega_exp_p = -a;
    }
    r.deg_f = r.f_exp_p * (loops + 1) + r.f_exp_psi * loops;
    r.c = r.m * r.deg_f;
    return r;
}

}  // namespace detail

inline CaseTableResult case_table_affine(int n, int dim, int loops) {
    CaseTableResult r = detail::case_table(n, dim, loops);
    int a = n - dim / 2 * loops, b = n - dim / 2 * (loops + 1);
    int table_c = r.regime == Regime::PDominant ? a * (loops + 1)
                  : r.regime == Regime::Mixed   ? a * loops + n
                                                : -b * loops;
    require(table_c == r.c, ErrorKind::Precondition, "C differs from m * deg f");
    return r;
}

inline CaseTableResult case_table_sliced(int k, int dim, int loops) {
    CaseTableResult r = detail::case_table(k, dim, loops);
    int h = dim / 2;
    if (r.regime == Regime::PDominant) r.r_max = h * loops;
    else if (r.regime == Regime::Mixed) r.r_max = k - r.m;
    else r.r_max = 2 * k - h * (loops + 1);
    return r;
}

inline MultiPoly case_f(const CaseTableResult& r, const MultiPoly& p, const MultiPoly& psi) {
    return p.pow(static_cast<unsigned>(r.f_exp_p)) * psi.pow(static_cast<unsigned>(r.f_exp_psi));
}

inline MultiPoly case_omega_factor(const CaseTableResult& r, const MultiPoly& p, const MultiPoly& psi) {
    return p.pow(static_cast<unsigned>(r.omega_exp_p)) * psi.pow(static_cast<unsigned>(r.omega_exp_psi));
}

inline std::string describe_power(const char* base, int e) {
    if (e == 0) return "";
    return e == 1 ? std::string(base) : std::string(base) + "^" + std::to_string(e);
}

inline std::string describe_product(int ep, int epsi) {
    std::string a = describe_power("P", ep), b = describe_power("Psi", epsi);
    if (a.empty() && b.empty()) return "1";
    if (a.empty()) return b;
    if (b.empty()) return a;
    return a + "*" + b;
}

}  // namespace feynpar
