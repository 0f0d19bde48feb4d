#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "feynpar/error.hpp"

namespace feynpar {

enum class QuadMethod { Adaptive, MonteCarlo };

inline const char* quad_method_name(QuadMethod m) { return m == QuadMethod::Adaptive ? "adaptive" : "monte-carlo"; }

struct QuadOptions {
    double rel_tol = 1e-8;
    double abs_tol = 1e-10;
    std::size_t max_evals = 4000000;
    QuadMethod method = QuadMethod::Adaptive;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    int rule_index = 3;  // Grundmann-Moeller s; degree 2s+1, error from the s-1 rule
};

struct QuadratureResult {
    double value = 0;
    double error = 0;
    std::size_t evals = 0;
    QuadMethod method = QuadMethod::Adaptive;
    std::uint64_t seed = 0;
    bool converged = true;
};

struct VectorQuadrature {
    std::vector<double> values;
    std::vector<double> errors;
    std::size_t evals = 0;
    QuadMethod method = QuadMethod::Adaptive;
    std::uint64_t seed = 0;
    bool converged = true;

    QuadratureResult component(std::size_t i) const { return {values[i], errors[i], evals, method, seed, converged}; }
};

inline void require_converged(const QuadratureResult& r, const std::string& what) {
    require(r.converged, ErrorKind::ToleranceNotReached, [&] {
        return what + ": best estimate " + std::to_string(r.value) + " +- " + std::to_string(r.error);
    });
}

// Integrand on the parameter simplex: point u (length d) -> out (length m).
using VectorIntegrand = std::function<void(const double* u, double* out)>;

namespace detail {

inline double factorial(int n) {
    double f = 1;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

// Grundmann-Moeller rule on the standard d-simplex, points stored by layer.
struct GMRule {
    int d = 0, s = 0;
    std::vector<std::vector<double>> bary;  // (d+1) barycentric coordinates per point
    std::vector<int> layer;
    std::vector<double> w_hi, w_lo;  // per-layer weights for rules s and s-1 (w_lo indexed by layer)
};

inline GMRule make_gm_rule(int d, int s) {
    GMRule r;
    r.d = d;
    r.s = s;
    auto weight = [&](int ss, int i) {
        double den = d + 2 * ss + 1 - 2 * i;
        double w = std::pow(2.0, -2 * ss) * std::pow(den, 2 * ss + 1) / (factorial(i) * factorial(d + 2 * ss + 1 - i));
        return (i % 2 ? -w : w);
    };
    r.w_hi.assign(static_cast<std::size_t>(s) + 1, 0);
    r.w_lo.assign(static_cast<std::size_t>(s) + 1, 0);
    for (int i = 0; i <= s; ++i) r.w_hi[static_cast<std::size_t>(i)] = weight(s, i);
    // Layer i of rule s uses the same points as layer i-1 of rule s-1.
    for (int i = 1; i <= s; ++i) r.w_lo[static_cast<std::size_t>(i)] = weight(s - 1, i - 1);
    for (int i = 0; i <= s; ++i) {
        int total = s - i;
        double den = d + 2 * s + 1 - 2 * i;
        std::vector<int> beta(static_cast<std::size_t>(d) + 1, 0);
        std::function<void(int, int)> rec = [&](int pos, int left) {
            if (pos == d) {
                beta[static_cast<std::size_t>(d)] = left;
                std::vector<double> b(static_cast<std::size_t>(d) + 1);
                for (int j = 0; j <= d; ++j) b[static_cast<std::size_t>(j)] = (2 * beta[static_cast<std::size_t>(j)] + 1) / den;
                r.bary.push_back(b);
                r.layer.push_back(i);
                return;
            }
            for (int k = 0; k <= left; ++k) {
                beta[static_cast<std::size_t>(pos)] = k;
                rec(pos + 1, left - k);
            }
        };
        rec(0, total);
    }
    return r;
}

struct Cell {
    std::vector<std::vector<double>> v;  // d+1 vertices in R^d
    std::vector<double> value, err;
    double max_err = 0;
};

inline double simplex_volume_factor(const std::vector<std::vector<double>>& v) {
    // |det(v_1 - v_0, ..., v_d - v_0)|, Gaussian elimination.
    std::size_t d = v.size() - 1;
    if (d == 0) return 1;
    std::vector<std::vector<double>> a(d, std::vector<double>(d));
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) a[i][j] = v[j + 1][i] - v[0][i];
    double det = 1;
    for (std::size_t c = 0; c < d; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < d; ++r)
            if (std::fabs(a[r][c]) > std::fabs(a[p][c])) p = r;
        if (a[p][c] == 0) return 0;
        if (p != c) {
            std::swap(a[p], a[c]);
            det = -det;
        }
        det *= a[c][c];
        for (std::size_t r = c + 1; r < d; ++r) {
            double f = a[r][c] / a[c][c];
            for (std::size_t j = c; j < d; ++j) a[r][j] -= f * a[c][j];
        }
    }
    return std::fabs(det);
}

}  // namespace detail

// Adaptive Grundmann-Moeller integration over the standard d-simplex
// {u >= 0, sum u <= 1} of a vector-valued integrand; bisection of the longest edge.
inline VectorQuadrature integrate_parameter_simplex(const VectorIntegrand& fn, std::size_t d, std::size_t m,
                                                    const QuadOptions& opt = {}) {
    VectorQuadrature out;
    out.values.assign(m, 0);
    out.errors.assign(m, 0);
    out.method = QuadMethod::Adaptive;
    out.seed = opt.seed;
    if (d == 0) {
        fn(nullptr, out.values.data());
        out.evals = 1;
        for (double v : out.values)
            if (!std::isfinite(v)) out.converged = false;
        return out;
    }
    detail::GMRule rule = detail::make_gm_rule(static_cast<int>(d), std::max(opt.rule_index, 1));
    std::vector<double> x(d), buf(m);
    bool nonfinite = false;
    auto eval_cell = [&](detail::Cell& c) {
        double vol = detail::simplex_volume_factor(c.v);
        c.value.assign(m, 0);
        std::vector<double> lo(m, 0);
        for (std::size_t p = 0; p < rule.bary.size(); ++p) {
            std::fill(x.begin(), x.end(), 0.0);
            for (std::size_t j = 0; j <= d; ++j)
                for (std::size_t i = 0; i < d; ++i) x[i] += rule.bary[p][j] * c.v[j][i];
            fn(x.data(), buf.data());
            auto L = static_cast<std::size_t>(rule.layer[p]);
            for (std::size_t k = 0; k < m; ++k) {
                if (!std::isfinite(buf[k])) nonfinite = true;
                c.value[k] += rule.w_hi[L] * buf[k];
                lo[k] += rule.w_lo[L] * buf[k];
            }
        }
        c.err.assign(m, 0);
        c.max_err = 0;
        for (std::size_t k = 0; k < m; ++k) {
            c.value[k] *= vol;
            lo[k] *= vol;
            c.err[k] = std::fabs(c.value[k] - lo[k]);
            if (!std::isfinite(c.err[k])) c.err[k] = std::numeric_limits<double>::infinity();
            c.max_err = std::max(c.max_err, c.err[k]);
        }
        out.evals += rule.bary.size();
    };
    // Cells live in a pool; the heap orders indices by error.
    std::vector<detail::Cell> pool(1);
    pool[0].v.assign(d + 1, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i) pool[0].v[i + 1][i] = 1;
    eval_cell(pool[0]);
    using Entry = std::pair<double, std::size_t>;
    std::priority_queue<Entry> heap;
    heap.push({pool[0].max_err, 0});
    auto totals = [&](std::vector<double>& val, std::vector<double>& err) {
        val.assign(m, 0);
        err.assign(m, 0);
        for (const auto& c : pool)
            for (std::size_t k = 0; k < m; ++k) {
                val[k] += c.value[k];
                err[k] += c.err[k];
            }
    };
    std::vector<double> val = pool[0].value, err = pool[0].err;
    auto done = [&] {
        for (std::size_t k = 0; k < m; ++k)
            if (!(err[k] <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(val[k])))) return false;
        return true;
    };
    std::size_t since_resum = 0;
    while (!done()) {
        if (out.evals + 2 * rule.bary.size() > opt.max_evals || nonfinite) break;
        std::size_t idx = heap.top().second;
        heap.pop();
        detail::Cell c = pool[idx];
        std::size_t a = 0, b = 1;
        double best = -1;
        for (std::size_t i = 0; i <= d; ++i)
            for (std::size_t j = i + 1; j <= d; ++j) {
                double l = 0;
                for (std::size_t k = 0; k < d; ++k) l += (c.v[i][k] - c.v[j][k]) * (c.v[i][k] - c.v[j][k]);
                if (l > best) {
                    best = l;
                    a = i;
                    b = j;
                }
            }
        std::vector<double> mid(d);
        for (std::size_t k = 0; k < d; ++k) mid[k] = 0.5 * (c.v[a][k] + c.v[b][k]);
        detail::Cell c1, c2;
        c1.v = c.v;
        c1.v[a] = mid;
        c2.v = c.v;
        c2.v[b] = mid;
        eval_cell(c1);
        eval_cell(c2);
        for (std::size_t k = 0; k < m; ++k) {
            val[k] += c1.value[k] + c2.value[k] - c.value[k];
            err[k] += c1.err[k] + c2.err[k] - c.err[k];
        }
        pool[idx] = std::move(c1);
        heap.push({pool[idx].max_err, idx});
        pool.push_back(std::move(c2));
        heap.push({pool.back().max_err, pool.size() - 1});
        // Periodic exact resummation keeps round-off in the running totals bounded.
        if (++since_resum == 1024) {
            totals(val, err);
            since_resum = 0;
        }
    }
    totals(val, err);
    out.values = val;
    out.errors = err;
    out.converged = !nonfinite && done();
    return out;
}

// Integration over the standard simplex {t >= 0, sum t = 1} in R^n with the
// coordinate-projection measure dt_1...dt_{n-1} (t_n eliminated, Jacobian 1).
using SimplexIntegrand = std::function<void(const double* t, double* out)>;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace detail

// Monte Carlo with Dirichlet(1,...,1) samples. Batches carry their own seeds and
// are reduced in batch order, so the result does not depend on the thread count.
inline VectorQuadrature monte_carlo_simplex(const SimplexIntegrand& fn, std::size_t n, std::size_t m,
                                            const QuadOptions& opt) {
    require(n >= 1, ErrorKind::Precondition, "simplex dimension must be positive");
    const std::size_t batch = 4096;
    std::size_t nb = std::max<std::size_t>(1, opt.max_evals / batch);
    std::vector<std::vector<double>> sums(nb, std::vector<double>(2 * m, 0.0));
    std::vector<char> bad(nb, 0);
    auto work = [&](std::size_t b0, std::size_t b1) {
        std::vector<double> t(n), buf(m);
        for (std::size_t b = b0; b < b1; ++b) {
            std::mt19937_64 rng(detail::splitmix64(opt.seed * 0x100000001b3ULL + b));
            std::exponential_distribution<double> ex(1.0);
            for (std::size_t s = 0; s < batch; ++s) {
                double tot = 0;
                for (auto& x : t) tot += (x = ex(rng));
                for (auto& x : t) x /= tot;
                fn(t.data(), buf.data());
                for (std::size_t k = 0; k < m; ++k) {
                    if (!std::isfinite(buf[k])) bad[b] = 1;
                    sums[b][k] += buf[k];
                    sums[b][m + k] += buf[k] * buf[k];
                }
            }
        }
    };
    unsigned th = std::max(1u, opt.threads);
    if (th == 1) {
        work(0, nb);
    } else {
        std::vector<std::thread> pool;
        std::size_t per = (nb + th - 1) / th;
        for (unsigned i = 0; i < th; ++i) {
            std::size_t b0 = i * per, b1 = std::min(nb, b0 + per);
            if (b0 < b1) pool.emplace_back(work, b0, b1);
        }
        for (auto& p : pool) p.join();
    }
    double vol = 1.0 / detail::factorial(static_cast<int>(n) - 1);
    double N = static_cast<double>(nb * batch);
    VectorQuadrature out;
    out.method = QuadMethod::MonteCarlo;
    out.seed = opt.seed;
    out.evals = nb * batch;
    out.values.assign(m, 0);
    out.errors.assign(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
        double s = 0, s2 = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            s += sums[b][k];
            s2 += sums[b][m + k];
        }
        double mean = s / N, var = std::max(0.0, s2 / N - mean * mean);
        out.values[k] = vol * mean;
        out.errors[k] = vol * std::sqrt(var / N);
        if (!(out.errors[k] <= std::max(opt.abs_tol, opt.rel_tol * std::fabs(out.values[k])))) out.converged = false;
    }
    for (char c : bad)
        if (c) out.converged = false;
    return out;
}

inline VectorQuadrature integrate_simplex_vector(const SimplexIntegrand& fn, std::size_t n, std::size_t m,
                                                 const QuadOptions& opt = {}) {
    require(n >= 1, ErrorKind::Precondition, "simplex dimension must be positive");
    if (opt.method == QuadMethod::MonteCarlo) return monte_carlo_simplex(fn, n, m, opt);
    std::vector<double> t(n);
    auto wrapped = [&](const double* u, double* out) {
        double s = 0;
        for (std::size_t i = 0; i + 1 < n; ++i) s += (t[i] = u[i]);
        t[n - 1] = 1 - s;
        fn(t.data(), out);
    };
    return integrate_parameter_simplex(wrapped, n - 1, m, opt);
}

inline QuadratureResult integrate_simplex(const std::function<double(const double*)>& fn, std::size_t n,
                                          const QuadOptions& opt = {}) {
    auto r = integrate_simplex_vector([&](const double* t, double* out) { out[0] = fn(t); }, n, 1, opt);
    return r.component(0);
}

// Adaptive Gauss-Kronrod on [a, b].
inline QuadratureResult integrate_interval(const std::function<double(double)>& fn, double a, double b,
                                           double tol = 1e-10, unsigned max_depth = 18) {
    QuadratureResult r;
    if (a == b) return r;
    double err = 0, l1 = 0;
    r.value = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(fn, a, b, max_depth, tol, &err, &l1);
    r.error = err;
    r.converged = std::isfinite(r.value) && err <= std::max(tol * std::fabs(l1), 1e-14);
    return r;
}

}  // namespace feynpar
