#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "feynpar/gelfand_leray.hpp"

namespace feynpar {

// J(s) ~ a s^lambda log(s)^r near 0.
struct AsymptoticFit {
    double lambda = 0;
    int r = 0;
    double a = 0;
    double residual = 0;
    std::vector<double> residual_by_r;  // one entry per tried log power
    double pole() const { return -(lambda + 1); }
    int pole_order() const { return r + 1; }
    // coefficient of (z + lambda + 1)^{-(r+1)} in the Mellin transform
    double pole_coefficient() const {
        double f = 1;
        for (int i = 2; i <= r; ++i) f *= i;
        return (r % 2 ? -1.0 : 1.0) * f * a;
    }
};

struct FitOptions {
    int max_log_power = 2;
    double threshold = 0.05;  // RMS residual in log space
    std::size_t min_samples = 8;
};

// Least squares on log|J| - r log|log s| = c + lambda log s, best r wins.
inline AsymptoticFit asymptotic_fit(const std::vector<GLSample>& samples, const FitOptions& opt = {}) {
    require(samples.size() >= opt.min_samples, ErrorKind::Precondition,
            [&] { return "asymptotic fit needs at least " + std::to_string(opt.min_samples) + " samples"; });
    int sign = 0;
    bool below_one = true;
    for (const auto& p : samples) {
        require(p.s > 0, ErrorKind::Precondition, "samples must lie in (0, s0]");
        int sg = p.value > 0 ? 1 : p.value < 0 ? -1 : 0;
        require(sg != 0 && (sign == 0 || sg == sign), ErrorKind::FitUnstable, "samples are not sign-definite");
        sign = sg;
        if (p.s >= 1) below_one = false;
    }
    int rmax = below_one ? std::clamp(opt.max_log_power, 0, 2) : 0;
    AsymptoticFit best;
    best.residual = INFINITY;
    std::size_t N = samples.size();
    for (int r = 0; r <= rmax; ++r) {
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        std::vector<double> xs, ys;
        for (const auto& p : samples) {
            double x = std::log(p.s);
            double y = std::log(std::fabs(p.value)) - r * std::log(std::fabs(x));
            xs.push_back(x);
            ys.push_back(y);
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        double det = N * sxx - sx * sx;
        require(det > 0, ErrorKind::FitUnstable, "samples need distinct levels");
        double lambda = (N * sxy - sx * sy) / det;
        double c = (sy - lambda * sx) / N;
        double ss = 0;
        for (std::size_t i = 0; i < N; ++i) ss += std::pow(ys[i] - c - lambda * xs[i], 2);
        double res = std::sqrt(ss / N);
        best.residual_by_r.push_back(res);
        if (res < best.residual) {
            best.residual = res;
            best.lambda = lambda;
            best.r = r;
            best.a = sign * (r % 2 ? -1.0 : 1.0) * std::exp(c);
        }
    }
    require(best.residual <= opt.threshold, ErrorKind::FitUnstable,
            [&] { return "best fit residual " + std::to_string(best.residual) + " exceeds threshold"; });
    return best;
}

// Leading-term fit from the smallest samples of a grid.
inline AsymptoticFit fit_small_levels(const std::vector<GLSample>& samples, std::size_t count = 12,
                                      const FitOptions& opt = {}) {
    std::vector<GLSample> head(samples.begin(), samples.begin() + static_cast<std::ptrdiff_t>(std::min(count, samples.size())));
    return asymptotic_fit(head, opt);
}

struct MellinValue {
    double z = 0;
    double value = 0;
    double error = 0;
    double tail = 0;  // contribution of (0, s_min] from the fitted leading term
};

namespace detail {

// integral of s^{p-1} log(s)^r over (0, s0], p > 0
inline double power_log_tail(double p, int r, double s0) {
    double L = std::log(s0), sum = 0, fall = 1;
    for (int i = 0; i <= r; ++i) {
        sum += (i % 2 ? -1.0 : 1.0) * fall * std::pow(L, r - i) / std::pow(p, i + 1);
        fall *= r - i;
    }
    return std::pow(s0, p) * sum;
}

// integral of s^z (alpha + beta s) over [a, b]
inline double power_linear(double z, double alpha, double beta, double a, double b) {
    auto prim = [&](double s, double q) {
        if (std::fabs(q) < 1e-14) return std::log(s);
        return std::pow(s, q) / q;
    };
    return alpha * (prim(b, z + 1) - prim(a, z + 1)) + beta * (prim(b, z + 2) - prim(a, z + 2));
}

inline double mellin_linear(const std::vector<GLSample>& J, double z, std::size_t stride) {
    double total = 0;
    std::size_t i = 0;
    while (i + 1 < J.size()) {
        std::size_t j = std::min(i + stride, J.size() - 1);
        double a = J[i].s, b = J[j].s;
        double beta = (J[j].value - J[i].value) / (b - a), alpha = J[i].value - beta * a;
        total += power_linear(z, alpha, beta, a, b);
        i = j;
    }
    return total;
}

}  // namespace detail

// F(z) = integral over (0, s_max] of s^z J(s) ds: exact on the piecewise-linear
// interpolant of the samples, plus the fitted leading term below the first sample.
inline std::vector<MellinValue> mellin_transform(const std::vector<GLSample>& J, const std::vector<double>& zs,
                                                 const std::optional<AsymptoticFit>& fit_in = std::nullopt) {
    require(J.size() >= 2, ErrorKind::Precondition, "Mellin transform needs at least two samples");
    for (std::size_t i = 1; i < J.size(); ++i)
        require(J[i].s > J[i - 1].s, ErrorKind::Precondition, "samples must be increasing in s");
    AsymptoticFit fit = fit_in ? *fit_in : fit_small_levels(J);
    std::vector<MellinValue> out;
    for (double z : zs) {
        double p = z + fit.lambda + 1;
        require(p > 1e-12, ErrorKind::ConvergenceDomain, [&] {
            return "Re z = " + std::to_string(z) + " is not above the fitted bound " + std::to_string(fit.pole());
        });
        MellinValue v;
        v.z = z;
        v.tail = fit.a * detail::power_log_tail(p, fit.r, J.front().s);
        double fine = detail::mellin_linear(J, z, 1);
        v.value = fine + v.tail;
        double samples_err = 0;
        for (std::size_t i = 0; i + 1 < J.size(); ++i) {
            double a = J[i].s, b = J[i + 1].s;
            samples_err += 0.5 * (J[i].error + J[i + 1].error) * std::fabs(detail::power_linear(z, 1, 0, a, b));
        }
        double coarse = J.size() >= 3 ? detail::mellin_linear(J, z, 2) : fine;
        v.error = samples_err + std::fabs(fine - coarse) / 3 + fit.residual * std::fabs(v.tail);
        out.push_back(v);
    }
    return out;
}

}  // namespace feynpar
