#pragma once

/**
 * @file poisson.hpp
 * @brief Reaction-Poisson problems -L u + eta u = f for the multiscale and the
 *        homogenized generator, and the first-order corrector expansion.
 */

#include "lhom/cell.hpp"
#include "lhom/discretization.hpp"
#include "lhom/errors.hpp"
#include "lhom/model.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace lhom {

/// Weighted operators of both problems on one grid, all with coefficient 1.
struct OperatorSet {
    GridPtr grid;
    WeightedOperator mass_ms;
    WeightedOperator stiffness_ms;
    WeightedOperator mass_hom;
    WeightedOperator stiffness_hom;
};

inline OperatorSet build_operators(const GridPtr& grid, const DensityPair& rho)
{
    const auto ms = [&rho](double x) { return rho.rho_ms(x); };
    const auto hom = [&rho](double x) { return rho.rho_hom(x); };
    return {grid,
            assemble(grid, ms, OperatorKind::mass, 1.0, WeightId::multiscale),
            assemble(grid, ms, OperatorKind::stiffness, 1.0, WeightId::multiscale),
            assemble(grid, hom, OperatorKind::mass, 1.0, WeightId::homogenized),
            assemble(grid, hom, OperatorKind::stiffness, 1.0, WeightId::homogenized)};
}

struct PoissonProblem {
    double eta = 1.0;
    ScalarField f;
    std::optional<double> epsilon;  ///< unset for the homogenized problem
    GridPtr grid;
};

struct PoissonSolution {
    GridFunction u;
    /// Normwise backward error ||B u - F|| / (||B|| ||u|| + ||F||), inf-norms, B = dA + eta M.
    /// Plain ||r|| / ||F|| bottoms out near 4 u_round / h^2 on fine meshes.
    double residual = 0.0;
    double stability_ratio = 0.0;  ///< ||u||_{H1_rho} / ||f||_{L2_rho}
    double stability_bound = 0.0;  ///< 1 / min{diffusion, eta}
    std::vector<std::string> warnings;
};

namespace detail {

template <typename Weight>
PoissonSolution solve_weighted(const GridPtr& grid, const WeightedOperator& mass, const WeightedOperator& stiffness,
                               double diffusion, double eta, const ScalarField& f, const Weight& weight)
{
    if (!(eta > 0.0)) {
        throw ParameterError("poisson: eta must be positive");
    }
    if (!f) {
        throw ParameterError("poisson: right-hand side is not set");
    }
    const SymTridiagonal system = combine(diffusion, stiffness.matrix, eta, mass.matrix);
    const std::vector<double> F = load_vector(*grid, f, weight);
    std::vector<double> u = solve_tridiagonal_spd(system, F);

    PoissonSolution sol;
    double b_inf = 0.0;
    for (std::size_t i = 0; i < system.size(); ++i) {
        double row = std::abs(system.diag[i]);
        row += i > 0 ? std::abs(system.off[i - 1]) : 0.0;
        row += i < system.off.size() ? std::abs(system.off[i]) : 0.0;
        b_inf = std::max(b_inf, row);
    }
    const double scale = b_inf * norm_inf(u) + norm_inf(F);
    sol.residual = scale > 0.0 ? residual_inf(system, u, F) / scale : 0.0;
    sol.u = GridFunction(grid, std::move(u));
    const double f_norm = weighted_l2_norm(*grid, f, weight);
    const WeightedNorms n = weighted_norms(sol.u, mass, stiffness);
    sol.stability_ratio = f_norm > 0.0 ? n.h1 / f_norm : 0.0;
    sol.stability_bound = 1.0 / std::min(diffusion, eta);
    return sol;
}

} // namespace detail

/// Solves (sigma A^eps + eta M^eps) u = F^eps with weight rho^eps.
inline PoissonSolution solve_multiscale(const PoissonProblem& problem, const DensityPair& rho,
                                        const OperatorSet* ops = nullptr)
{
    if (!problem.grid) {
        throw ParameterError("solve_multiscale: grid is not set");
    }
    const double eps = problem.epsilon.value_or(rho.epsilon());
    if (eps != rho.epsilon()) {
        throw ParameterError("solve_multiscale: problem and density disagree on epsilon");
    }
    std::optional<OperatorSet> local;
    if (ops == nullptr) {
        local = build_operators(problem.grid, rho);
        ops = &*local;
    }
    const auto weight = [&rho](double x) { return rho.rho_ms(x); };
    PoissonSolution sol = detail::solve_weighted(problem.grid, ops->mass_ms, ops->stiffness_ms, rho.model().sigma,
                                                 problem.eta, problem.f, weight);
    if (problem.grid->h > eps * eps * (1.0 + 1e-12)) {
        sol.warnings.push_back("mesh width " + std::to_string(problem.grid->h) + " exceeds epsilon^2");
    }
    return sol;
}

/// Solves (Sigma A^0 + eta M^0) u = F^0 with weight rho^0.
inline PoissonSolution solve_homogenized(const PoissonProblem& problem, const EffectiveCoefficients& coeffs,
                                         const DensityPair& rho, const OperatorSet* ops = nullptr)
{
    if (!problem.grid) {
        throw ParameterError("solve_homogenized: grid is not set");
    }
    std::optional<OperatorSet> local;
    if (ops == nullptr) {
        local = build_operators(problem.grid, rho);
        ops = &*local;
    }
    const auto weight = [&rho](double x) { return rho.rho_hom(x); };
    return detail::solve_weighted(problem.grid, ops->mass_hom, ops->stiffness_hom, coeffs.Sigma, problem.eta,
                                  problem.f, weight);
}

/// Nodal derivative: mean of adjacent element slopes, one-sided at the ends.
inline std::vector<double> nodal_derivative(const GridFunction& u)
{
    const Grid& g = *u.grid;
    const std::size_t n = u.size();
    std::vector<double> d(n, 0.0);
    if (n < 2) {
        return d;
    }
    std::vector<double> slope(n - 1);
    for (std::size_t e = 0; e + 1 < n; ++e) {
        slope[e] = (u.values[e + 1] - u.values[e]) / g.h;
    }
    d[0] = slope.front();
    d[n - 1] = slope.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        d[i] = 0.5 * (slope[i - 1] + slope[i]);
    }
    return d;
}

/// u0(x) + eps (u0)'(x) Phi(x / eps) at the nodes.
inline GridFunction corrector_expansion(const GridFunction& u0, const EffectiveCoefficients& coeffs, double epsilon)
{
    if (epsilon < 0.0) {
        throw ParameterError("corrector_expansion: epsilon must be non-negative");
    }
    if (epsilon == 0.0) {
        return u0;
    }
    const std::vector<double> du = nodal_derivative(u0);
    std::vector<double> v(u0.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = u0.grid->nodes[i];
        v[i] = u0.values[i] + epsilon * du[i] * coeffs.Phi(x / epsilon);
    }
    return {u0.grid, std::move(v)};
}

/// Right-hand sides selectable by name.
inline ScalarField make_rhs(const std::string& name)
{
    if (name == "linear") {
        return [](double x) { return x; };
    }
    if (name == "constant") {
        return [](double) { return 1.0; };
    }
    if (name == "quadratic") {
        return [](double x) { return x * x; };
    }
    if (name == "sine") {
        return [](double x) { return std::sin(x); };
    }
    throw ParameterError("unknown right-hand side '" + name + "'");
}

} // namespace lhom
