#pragma once

/**
 * @file eigen.hpp
 * @brief Low spectrum of -L from the weighted pencil (d A, M).
 *
 * Eigenpairs are computed by shift-invert subspace iteration on
 * (d A + eta M)^{-1} M with Rayleigh-Ritz extraction. The shifted operator
 * is the reaction-Poisson matrix, so every step is one tridiagonal solve per
 * block column.
 */

#include "lhom/cell.hpp"
#include "lhom/discretization.hpp"
#include "lhom/errors.hpp"
#include "lhom/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

namespace lhom {

struct EigenPair {
    double lambda = 0.0;
    GridFunction phi;  ///< unit norm in the pencil's weighted L2
    int index = 0;
    double residual = 0.0;  ///< ||d A phi - lambda M phi||_inf
};

struct SubspaceOptions {
    double shift = 1.0;  ///< eta in (d A + eta M)^{-1} M
    int max_iterations = 500;
    double ritz_tol = 1e-10;
    double residual_tol = 1e-8;
};

namespace detail {

using Block = std::vector<std::vector<double>>;

inline void m_orthonormalize(Block& X, const SymTridiagonal& M)
{
    for (std::size_t k = 0; k < X.size(); ++k) {
        for (int pass = 0; pass < 2; ++pass) {
            const auto Mx = M * X[k];
            for (std::size_t j = 0; j < k; ++j) {
                double c = 0.0;
                for (std::size_t i = 0; i < Mx.size(); ++i) {
                    c += X[j][i] * Mx[i];
                }
                for (std::size_t i = 0; i < Mx.size(); ++i) {
                    X[k][i] -= c * X[j][i];
                }
            }
        }
        const double nrm = std::sqrt(M.bilinear(X[k], X[k]));
        if (!(nrm > 0.0)) {
            throw ConvergenceError("subspace iteration: start block is rank deficient");
        }
        for (double& v : X[k]) {
            v /= nrm;
        }
    }
}

/// phi(R) > 0, falling back to the largest-magnitude entry when phi(R) ~ 0.
inline void fix_sign(std::vector<double>& v)
{
    double ref = v.back();
    const double scale = norm_inf(v);
    if (std::abs(ref) <= 1e-8 * scale) {
        ref = *std::max_element(v.begin(), v.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    }
    if (ref < 0.0) {
        for (double& x : v) {
            x = -x;
        }
    }
}

} // namespace detail

/**
 * First n_pairs eigenpairs of d A x = lambda M x, in increasing order.
 * Block size n_pairs + 2 (capped by the node count); the start block holds
 * Chebyshev polynomials in x / R. Stops when every wanted Ritz value moved
 * by less than ritz_tol (relative) and every residual is below residual_tol.
 */
inline std::vector<EigenPair> solve_spectrum(const WeightedOperator& stiffness, const WeightedOperator& mass,
                                             double diffusion, int n_pairs, const SubspaceOptions& opts = {})
{
    require_same_grid(*stiffness.grid, *mass.grid, "solve_spectrum");
    const GridPtr& grid = mass.grid;
    const std::size_t n = grid->n_nodes();
    if (n_pairs < 1 || static_cast<std::size_t>(n_pairs) > n) {
        throw ParameterError("solve_spectrum: need 1 <= n_pairs <= node count");
    }
    if (!(diffusion > 0.0) || !(opts.shift > 0.0)) {
        throw ParameterError("solve_spectrum: diffusion and shift must be positive");
    }
    const SymTridiagonal& A = stiffness.matrix;
    const SymTridiagonal& M = mass.matrix;
    const auto want = static_cast<std::size_t>(n_pairs);
    const std::size_t b = std::min(want + 2, n);

    const TridiagonalLdlt shifted(combine(diffusion, A, opts.shift, M));

    detail::Block X(b, std::vector<double>(n));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = grid->nodes[i] / grid->R;
        double t0 = 1.0;
        double t1 = t;
        for (std::size_t k = 0; k < b; ++k) {
            if (k == 0) {
                X[k][i] = 1.0;
            } else if (k == 1) {
                X[k][i] = t;
            } else {
                const double t2 = 2.0 * t * t1 - t0;
                t0 = t1;
                t1 = t2;
                X[k][i] = t2;
            }
        }
    }
    detail::m_orthonormalize(X, M);

    std::vector<double> theta_prev(want, std::numeric_limits<double>::infinity());
    detail::Block Y(b, std::vector<double>(n));
    detail::Block AY(b, std::vector<double>(n));
    detail::Block MY(b, std::vector<double>(n));
    Eigen::MatrixXd Ahat(b, b);
    Eigen::MatrixXd Mhat(b, b);
    std::vector<double> residuals(want, 0.0);

    for (int it = 0; it < opts.max_iterations; ++it) {
        for (std::size_t k = 0; k < b; ++k) {
            M.apply(X[k], Y[k]);
            shifted.solve_in_place(Y[k]);
            A.apply(Y[k], AY[k]);
            M.apply(Y[k], MY[k]);
        }
        for (std::size_t j = 0; j < b; ++j) {
            for (std::size_t k = j; k < b; ++k) {
                double a = 0.0;
                double m = 0.0;
                for (std::size_t i = 0; i < n; ++i) {
                    a += Y[j][i] * AY[k][i];
                    m += Y[j][i] * MY[k][i];
                }
                Ahat(j, k) = Ahat(k, j) = diffusion * a;
                Mhat(j, k) = Mhat(k, j) = m;
            }
        }
        const Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ritz(Ahat, Mhat);
        if (ritz.info() != Eigen::Success) {
            throw ConvergenceError("solve_spectrum: Rayleigh-Ritz step failed");
        }
        const Eigen::VectorXd& theta = ritz.eigenvalues();
        const Eigen::MatrixXd& Q = ritz.eigenvectors();
        for (std::size_t k = 0; k < b; ++k) {
            std::fill(X[k].begin(), X[k].end(), 0.0);
            for (std::size_t j = 0; j < b; ++j) {
                const double q = Q(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k));
                for (std::size_t i = 0; i < n; ++i) {
                    X[k][i] += q * Y[j][i];
                }
            }
        }

        bool stable = true;
        double worst_residual = 0.0;
        std::vector<double> ax(n);
        std::vector<double> mx(n);
        for (std::size_t k = 0; k < want; ++k) {
            const double th = theta(static_cast<Eigen::Index>(k));
            if (std::abs(th - theta_prev[k]) > opts.ritz_tol * std::max(std::abs(th), opts.shift)) {
                stable = false;
            }
            theta_prev[k] = th;
            A.apply(X[k], ax);
            M.apply(X[k], mx);
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                r = std::max(r, std::abs(diffusion * ax[i] - th * mx[i]));
            }
            residuals[k] = r;
            worst_residual = std::max(worst_residual, r);
        }
        if (stable && worst_residual <= opts.residual_tol) {
            std::vector<EigenPair> pairs;
            pairs.reserve(want);
            for (std::size_t k = 0; k < want; ++k) {
                std::vector<double> v = X[k];
                const double nrm = std::sqrt(M.bilinear(v, v));
                for (double& x : v) {
                    x /= nrm;
                }
                detail::fix_sign(v);
                pairs.push_back({theta_prev[k], GridFunction(grid, std::move(v)), static_cast<int>(k), residuals[k]});
            }
            return pairs;
        }
    }
    std::string msg = "solve_spectrum: no convergence after " + std::to_string(opts.max_iterations) +
                      " iterations; residuals:";
    for (double r : residuals) {
        msg += " " + std::to_string(r);
    }
    throw ConvergenceError(msg);
}

/// Assembles the pencil for `weight` on `grid` and solves it.
template <typename Weight>
std::vector<EigenPair> solve_spectrum(const GridPtr& grid, const Weight& weight, double diffusion, int n_pairs,
                                      const SubspaceOptions& opts = {})
{
    const auto M = assemble(grid, weight, OperatorKind::mass, 1.0);
    const auto A = assemble(grid, weight, OperatorKind::stiffness, 1.0);
    return solve_spectrum(A, M, diffusion, n_pairs, opts);
}

/// coefficient * (psi^T A psi) / (psi^T M psi)
inline double rayleigh_quotient(const GridFunction& psi, const WeightedOperator& stiffness,
                                const WeightedOperator& mass, double coefficient)
{
    require_same_grid(*psi.grid, *mass.grid, "rayleigh_quotient");
    require_same_grid(*psi.grid, *stiffness.grid, "rayleigh_quotient");
    const double den = mass.matrix.bilinear(psi.values, psi.values);
    if (!(den > 0.0)) {
        throw DomainError("rayleigh_quotient: zero vector");
    }
    return coefficient * stiffness.matrix.bilinear(psi.values, psi.values) / den;
}

/// Probabilists' Hermite polynomial He_n(z) by the three-term recurrence.
inline double hermite_he(int n, double z)
{
    if (n == 0) {
        return 1.0;
    }
    double h0 = 1.0;
    double h1 = z;
    for (int k = 1; k < n; ++k) {
        const double h2 = z * h1 - k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

inline constexpr int kMaxHermiteIndex = 10;

/// He_n(sqrt(K / Sigma) x) / sqrt(n!): the homogenized eigenfunctions of the
/// Ornstein-Uhlenbeck model.
inline GridFunction hermite_reference(const EffectiveCoefficients& coeffs, const GridPtr& grid, int n)
{
    if (n < 0 || n > kMaxHermiteIndex) {
        throw ParameterError("hermite_reference: index must lie in [0, 10]");
    }
    const double scale = std::sqrt(coeffs.K / coeffs.Sigma);
    double fact = 1.0;
    for (int k = 2; k <= n; ++k) {
        fact *= k;
    }
    const double norm = 1.0 / std::sqrt(fact);
    return GridFunction::interpolate(grid, [&](double x) { return norm * hermite_he(n, scale * x); });
}

struct SpectrumRow {
    int n = 0;
    double lambda_eps = 0.0;
    double lambda_hom = 0.0;
    double gap = 0.0;
    double err_l2 = 0.0;  ///< || phi_eps - phi_0 ||_{L2_rho0} after alignment
    double err_h1 = 0.0;
    int aligned_sign = 1;
    bool ambiguous = false;  ///< |<phi_eps, phi_0>| < 1e-6, sign kept as is
};

struct SpectrumComparison {
    std::vector<SpectrumRow> rows;
};

inline constexpr double kAlignmentThreshold = 1e-6;

/// Aligns signs so that <phi_eps_n, phi_0_n>_{L2_rho0} > 0 and measures the
/// eigenfunction distance in the homogenized norms.
inline SpectrumComparison compare_spectra(const std::vector<EigenPair>& ms, const std::vector<EigenPair>& hom,
                                          const WeightedOperator& mass_hom, const WeightedOperator& stiffness_hom)
{
    if (ms.size() != hom.size()) {
        throw ShapeError("compare_spectra: spectra have different lengths");
    }
    SpectrumComparison out;
    out.rows.reserve(ms.size());
    for (std::size_t k = 0; k < ms.size(); ++k) {
        require_same_grid(*ms[k].phi.grid, *hom[k].phi.grid, "compare_spectra");
        SpectrumRow row;
        row.n = static_cast<int>(k);
        row.lambda_eps = ms[k].lambda;
        row.lambda_hom = hom[k].lambda;
        row.gap = std::abs(row.lambda_eps - row.lambda_hom);
        const double ip = mass_hom.matrix.bilinear(ms[k].phi.values, hom[k].phi.values);
        row.ambiguous = std::abs(ip) < kAlignmentThreshold;
        row.aligned_sign = (!row.ambiguous && ip < 0.0) ? -1 : 1;
        GridFunction aligned = ms[k].phi;
        if (row.aligned_sign < 0) {
            for (double& v : aligned.values) {
                v = -v;
            }
        }
        const WeightedNorms e = weighted_norms(aligned - hom[k].phi, mass_hom, stiffness_hom);
        row.err_l2 = e.l2;
        row.err_h1 = e.h1;
        out.rows.push_back(row);
    }
    return out;
}

struct SandwichRow {
    int n = 0;
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;
    bool holds = true;
};

struct SandwichReport {
    std::vector<SandwichRow> rows;
    [[nodiscard]] bool all_hold() const
    {
        return std::all_of(rows.begin(), rows.end(), [](const SandwichRow& r) { return r.holds; });
    }
};

/// C_low^2 / (K C_up^2) lambda0_n <= lambda_eps_n <= C_up^2 / (K C_low^2) lambda0_n
/// (1D, so the extreme eigenvalues of K coincide). `slack` absorbs the
/// round-off of the zero eigenvalue.
inline SandwichReport minimax_sandwich_check(const std::vector<EigenPair>& ms, const std::vector<EigenPair>& hom,
                                             const EffectiveCoefficients& coeffs, const NormEquivalence& c,
                                             double slack = 1e-8)
{
    if (ms.size() != hom.size()) {
        throw ShapeError("minimax_sandwich_check: spectra have different lengths");
    }
    const double r = c.c_low * c.c_low / (c.c_up * c.c_up);
    SandwichReport rep;
    for (std::size_t k = 0; k < ms.size(); ++k) {
        SandwichRow row;
        row.n = static_cast<int>(k);
        row.lower = r / coeffs.K * hom[k].lambda;
        row.upper = hom[k].lambda / (r * coeffs.K);
        row.value = ms[k].lambda;
        row.holds = row.value >= row.lower - slack && row.value <= row.upper + slack;
        rep.rows.push_back(row);
    }
    return rep;
}

/// Worst deviations of the discrete spectral identities.
struct SpectralInvariants {
    double orthonormality = 0.0;  ///< max |phi_i^T M phi_j - delta_ij|
    double rayleigh = 0.0;        ///< max |R(phi_n) - lambda_n| / max(lambda_n, 1)
    double h1_identity = 0.0;     ///< max | ||phi_n||_H1^2 - (1 + lambda_n / d) |
    double lambda0 = 0.0;         ///< |lambda_0|
    double min_gap = std::numeric_limits<double>::infinity();
};

inline SpectralInvariants spectral_invariants(const std::vector<EigenPair>& pairs, const WeightedOperator& stiffness,
                                              const WeightedOperator& mass, double diffusion)
{
    SpectralInvariants s;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        for (std::size_t j = 0; j < pairs.size(); ++j) {
            const double g = mass.matrix.bilinear(pairs[i].phi.values, pairs[j].phi.values);
            s.orthonormality = std::max(s.orthonormality, std::abs(g - (i == j ? 1.0 : 0.0)));
        }
        const double lam = pairs[i].lambda;
        const double rq = rayleigh_quotient(pairs[i].phi, stiffness, mass, diffusion);
        s.rayleigh = std::max(s.rayleigh, std::abs(rq - lam) / std::max(std::abs(lam), 1.0));
        const WeightedNorms nn = weighted_norms(pairs[i].phi, mass, stiffness);
        s.h1_identity = std::max(s.h1_identity, std::abs(nn.h1 * nn.h1 - (1.0 + lam / diffusion)));
        if (i + 1 < pairs.size()) {
            s.min_gap = std::min(s.min_gap, pairs[i + 1].lambda - lam);
        }
    }
    if (!pairs.empty()) {
        s.lambda0 = std::abs(pairs.front().lambda);
    }
    return s;
}

} // namespace lhom
