#pragma once

/**
 * @file cell.hpp
 * @brief Closed-form 1D periodic cell problem and effective coefficients.
 *
 * In one dimension the corrector solving
 *   -sigma Phi'' + Phi' p' = -p',  Phi periodic,  int Phi mu = 0
 * is
 *   Phi(y) = C_Phi - y + (L / C_mu_hat) int_0^y exp(p(z)/sigma) dz,
 * and the effective coefficient reduces to K = L^2 / (C_mu C_mu_hat).
 */

#include "lhom/errors.hpp"
#include "lhom/model.hpp"
#include "lhom/quadrature.hpp"

#include <cmath>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

namespace lhom {

namespace detail {

/// Cumulative integral of exp(p/sigma) over [0, L] on a fixed panel table.
/// Off-table points add a Gauss integral over the partial panel.
class CumulativeExpTable {
public:
    static constexpr std::size_t kPanels = 4096;

    explicit CumulativeExpTable(const ModelSpec& model)
        : p_(model.p), sigma_(model.sigma), L_(model.L), width_(model.L / static_cast<double>(kPanels))
    {
        cumulative_.resize(kPanels + 1, 0.0);
        for (std::size_t k = 0; k < kPanels; ++k) {
            const double a = width_ * static_cast<double>(k);
            cumulative_[k + 1] = cumulative_[k] + panel(a, a + width_);
        }
    }

    [[nodiscard]] double total() const noexcept { return cumulative_.back(); }

    /// int_0^y exp(p/sigma) for y in [0, L].
    [[nodiscard]] double operator()(double y) const
    {
        if (y <= 0.0) {
            return 0.0;
        }
        if (y >= L_) {
            return total();
        }
        auto k = static_cast<std::size_t>(y / width_);
        if (k >= kPanels) {
            k = kPanels - 1;
        }
        const double a = width_ * static_cast<double>(k);
        return cumulative_[k] + panel(a, y);
    }

private:
    [[nodiscard]] double panel(double a, double b) const
    {
        const GaussRule& rule = gauss6();
        const double mid = 0.5 * (a + b);
        const double half = 0.5 * (b - a);
        double s = 0.0;
        for (std::size_t q = 0; q < rule.size(); ++q) {
            s += rule.weights[q] * std::exp(p_(mid + half * rule.nodes[q]) / sigma_);
        }
        return half * s;
    }

    ScalarField p_;
    double sigma_;
    double L_;
    double width_;
    std::vector<double> cumulative_;
};

} // namespace detail

/// Effective coefficients of the homogenized generator, plus the corrector.
struct EffectiveCoefficients {
    double K = 1.0;
    double Sigma = 1.0;   ///< K * sigma
    double C_mu = 1.0;    ///< int_0^L exp(-p/sigma)
    double C_mu_hat = 1.0;  ///< int_0^L exp(+p/sigma)
    double C_Phi = 0.0;
    double sigma = 1.0;
    double L = 1.0;

    /// K from the closed form and from the two integral expressions.
    double K_closed_form = 1.0;
    double K_mean_gradient = 1.0;   ///< int (1 + Phi') mu
    double K_energy = 1.0;          ///< int (1 + Phi')^2 mu
    double K_residual = 0.0;        ///< max pairwise disagreement

    std::shared_ptr<const detail::CumulativeExpTable> table;
    ScalarField p;
    ScalarField dp;

    /// Periodic corrector Phi(y).
    [[nodiscard]] double Phi(double y) const
    {
        const double r = reduce(y);
        return C_Phi - r + (L / C_mu_hat) * (*table)(r);
    }
    [[nodiscard]] double dPhi(double y) const
    {
        return -1.0 + (L / C_mu_hat) * std::exp(p(y) / sigma);
    }
    [[nodiscard]] double ddPhi(double y) const
    {
        return (L / C_mu_hat) * (dp(y) / sigma) * std::exp(p(y) / sigma);
    }
    /// Cell density mu(y) = exp(-p(y)/sigma) / C_mu.
    [[nodiscard]] double mu(double y) const { return std::exp(-p(y) / sigma) / C_mu; }

private:
    [[nodiscard]] double reduce(double y) const
    {
        double r = std::fmod(y, L);
        if (r < 0.0) {
            r += L;
        }
        return r;
    }
};

struct CellOptions {
    double consistency_tol = 1e-8;
    AdaptiveOptions quadrature{};
};

/// Solve the cell problem; throws ConsistencyError if the three K values
/// disagree beyond `consistency_tol`.
inline EffectiveCoefficients solve_cell(const ModelSpec& model, const CellOptions& opts = {})
{
    validate(model);
    const double s = model.sigma;
    const double L = model.L;
    const auto& p = model.p;

    EffectiveCoefficients c;
    c.sigma = s;
    c.L = L;
    c.p = model.p;
    c.dp = model.dp;
    c.table = std::make_shared<const detail::CumulativeExpTable>(model);

    c.C_mu = integrate([&](double y) { return std::exp(-p(y) / s); }, 0.0, L, opts.quadrature);
    c.C_mu_hat = integrate([&](double y) { return std::exp(p(y) / s); }, 0.0, L, opts.quadrature);

    const auto& table = *c.table;
    const double first_moment = integrate([&](double y) { return y * std::exp(-p(y) / s); }, 0.0, L, opts.quadrature);
    const double nested = integrate([&](double y) { return table(y) * std::exp(-p(y) / s); }, 0.0, L, opts.quadrature);
    c.C_Phi = first_moment / c.C_mu - L / (c.C_mu * c.C_mu_hat) * nested;

    c.K_closed_form = L * L / (c.C_mu_hat * c.C_mu);
    c.K_mean_gradient = integrate([&](double y) { return (1.0 + c.dPhi(y)) * c.mu(y); }, 0.0, L, opts.quadrature);
    c.K_energy = integrate(
        [&](double y) {
            const double g = 1.0 + c.dPhi(y);
            return g * g * c.mu(y);
        },
        0.0, L, opts.quadrature);
    c.K_residual = std::max({std::abs(c.K_closed_form - c.K_mean_gradient), std::abs(c.K_closed_form - c.K_energy),
                             std::abs(c.K_mean_gradient - c.K_energy)});
    if (c.K_residual > opts.consistency_tol) {
        throw ConsistencyError("solve_cell: effective coefficient formulas disagree by " + std::to_string(c.K_residual));
    }
    c.K = c.K_closed_form;
    c.Sigma = c.K * s;
    return c;
}

/// Standalone cell density; integrates the normalization on every call.
inline double mu(const ModelSpec& model, double y)
{
    const double c = integrate([&](double z) { return std::exp(-model.p(z) / model.sigma); }, 0.0, model.L);
    return std::exp(-model.p(y) / model.sigma) / c;
}

} // namespace lhom
