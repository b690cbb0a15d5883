#pragma once

/**
 * @file quadrature.hpp
 * @brief Gauss-Legendre rules and an adaptive composite integrator.
 */

#include "lhom/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <string>
#include <vector>

namespace lhom {

/// Nodes and weights on the reference interval [-1, 1].
struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    [[nodiscard]] std::size_t size() const noexcept { return nodes.size(); }
};

/// Gauss-Legendre rule with `order` points (Newton iteration on P_n).
inline GaussRule gauss_legendre(int order)
{
    if (order < 1) {
        throw ParameterError("gauss_legendre: order must be >= 1");
    }
    const auto n = static_cast<std::size_t>(order);
    GaussRule rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t i = 0; i < (n + 1) / 2; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (std::size_t k = 1; k <= n; ++k) {
                const double p2 = p1;
                p1 = p0;
                const auto kk = static_cast<double>(k);
                p0 = ((2.0 * kk - 1.0) * z * p1 - (kk - 1.0) * p2) / kk;
            }
            dp = static_cast<double>(n) * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.nodes[i] = -z;
        rule.nodes[n - 1 - i] = z;
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    return rule;
}

/// Shared 6-point rule used for element integrals.
inline const GaussRule& gauss6()
{
    static const GaussRule rule = gauss_legendre(6);
    return rule;
}

/// Integral of f over [a, b] with a fixed number of equal panels.
template <typename F>
double composite_gauss(const F& f, double a, double b, std::size_t panels, const GaussRule& rule = gauss6())
{
    const double width = (b - a) / static_cast<double>(panels);
    double total = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double left = a + width * static_cast<double>(p);
        const double mid = left + 0.5 * width;
        double sum = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            sum += rule.weights[q] * f(mid + 0.5 * width * rule.nodes[q]);
        }
        total += 0.5 * width * sum;
    }
    return total;
}

struct AdaptiveOptions {
    double rel_tol = 1e-12;
    std::size_t initial_panels = 8;
    std::size_t max_panels = std::size_t{1} << 20;
};

/**
 * Composite Gauss-Legendre with panel doubling until two successive values
 * differ by less than rel_tol, measured against max(|I|, integral of |f|) so
 * that integrals which vanish by symmetry still terminate.
 */
template <typename F>
double integrate(const F& f, double a, double b, const AdaptiveOptions& opts = {})
{
    if (!(b > a)) {
        if (a == b) {
            return 0.0;
        }
        throw ParameterError("integrate: empty or reversed interval");
    }
    std::size_t panels = opts.initial_panels;
    double prev = composite_gauss(f, a, b, panels);
    while (panels < opts.max_panels) {
        panels *= 2;
        const double cur = composite_gauss(f, a, b, panels);
        const double scale = composite_gauss([&](double x) { return std::abs(f(x)); }, a, b, panels);
        if (!std::isfinite(cur)) {
            throw QuadratureError("integrate: non-finite integrand");
        }
        if (std::abs(cur - prev) <= opts.rel_tol * std::max({std::abs(cur), scale, 1e-300})) {
            return cur;
        }
        prev = cur;
    }
    throw QuadratureError("integrate: no convergence with " + std::to_string(panels) + " panels");
}

} // namespace lhom
