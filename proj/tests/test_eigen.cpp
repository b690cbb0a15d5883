#include "lhom/eigen.hpp"
#include "lhom/poisson.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

struct Setup {
    lhom::ModelSpec model = lhom::make_ou_cosine_model(1.0);
    lhom::EffectiveCoefficients coeffs = lhom::solve_cell(model);
};

const Setup& setup()
{
    static const Setup s;
    return s;
}

oracle::Dense dense(const lhom::SymTridiagonal& T, double scale = 1.0)
{
    const std::size_t n = T.size();
    oracle::Dense D(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        D[i][i] = scale * T.diag[i];
        if (i + 1 < n) {
            D[i][i + 1] = D[i + 1][i] = scale * T.off[i];
        }
    }
    return D;
}

struct Pencil {
    lhom::GridPtr grid;
    lhom::WeightedOperator M;
    lhom::WeightedOperator A;
};

template <typename W>
Pencil pencil(double R, double h, const W& w)
{
    const auto g = lhom::build_grid(R, h);
    return {g, lhom::assemble(g, w, lhom::OperatorKind::mass, 1.0),
            lhom::assemble(g, w, lhom::OperatorKind::stiffness, 1.0)};
}

} // namespace

TEST(Spectrum, FiveNodeToyMatchesDenseSolve)
{
    const auto p = pencil(1.0, 0.5, [](double) { return 1.0; });
    ASSERT_EQ(p.grid->n_nodes(), 5u);
    const auto pairs = lhom::solve_spectrum(p.A, p.M, 1.0, 3);
    const auto ref = oracle::pencil_eigenvalues(dense(p.A.matrix), dense(p.M.matrix));
    ASSERT_EQ(pairs.size(), 3u);
    for (std::size_t k = 0; k < pairs.size(); ++k) {
        EXPECT_NEAR(pairs[k].lambda, ref[k], 1e-10 * std::max(1.0, ref[k]));
    }
}

TEST(Spectrum, SmallWeightedPencilsMatchDenseSolve)
{
    const auto model = setup().model;
    for (int nodes = 4; nodes <= 12; ++nodes) {
        const double R = 2.0;
        const double h = 2.0 * R / (nodes - 1);
        const auto w = [](double x) { return std::exp(-(0.5 * x * x + std::cos(x / 0.3))); };
        const auto p = pencil(R, h * (1 + 1e-9), w);
        ASSERT_EQ(p.grid->n_nodes(), static_cast<std::size_t>(nodes));
        const int want = nodes - 2;
        const auto pairs = lhom::solve_spectrum(p.A, p.M, 0.7, want);
        const auto ref = oracle::pencil_eigenvalues(dense(p.A.matrix, 0.7), dense(p.M.matrix));
        for (int k = 0; k < want; ++k) {
            EXPECT_NEAR(pairs[k].lambda, ref[k], 1e-10 * std::max(1.0, ref[k])) << nodes << " nodes, k = " << k;
        }
    }
}

TEST(Spectrum, HomogenizedOrnsteinUhlenbeckEigenvalues)
{
    const auto& c = setup().coeffs;
    const auto rho = lhom::eval_rho(setup().model, 0.1, 7.5);
    const auto g = lhom::build_grid(7.5, 1e-3);
    const auto pairs = lhom::solve_spectrum(g, rho.hom(), c.Sigma, 5);
    for (int n = 0; n < 5; ++n) {
        EXPECT_NEAR(pairs[n].lambda, c.K * n, std::max(1e-6, 1e-3 * c.K * n));
        EXPECT_EQ(pairs[n].index, n);
        EXPECT_LT(pairs[n].residual, 1e-8);
    }
    // lambda_0 = 0 with a constant, unit-norm eigenfunction
    EXPECT_LT(std::abs(pairs[0].lambda), 1e-8);
    for (double v : pairs[0].phi.values) {
        EXPECT_NEAR(v, 1.0, 1e-8);
    }
}

TEST(Spectrum, NonConvergenceRaises)
{
    const auto rho = lhom::eval_rho(setup().model, 0.1, 7.5);
    const auto p = pencil(7.5, 0.05, rho.ms());
    lhom::SubspaceOptions opts;
    opts.max_iterations = 1;
    EXPECT_THROW(lhom::solve_spectrum(p.A, p.M, 1.0, 5, opts), lhom::ConvergenceError);
}

TEST(Rayleigh, IdentitiesAndStationarity)
{
    const auto rho = lhom::eval_rho(setup().model, 0.2, 7.5);
    const auto p = pencil(7.5, 0.02, rho.ms());
    const auto pairs = lhom::solve_spectrum(p.A, p.M, 1.0, 3);
    for (const auto& e : pairs) {
        EXPECT_NEAR(lhom::rayleigh_quotient(e.phi, p.A, p.M, 1.0), e.lambda, 1e-8 * std::max(1.0, e.lambda));
    }
    const auto ones = lhom::GridFunction::interpolate(p.grid, [](double) { return 1.0; });
    EXPECT_NEAR(lhom::rayleigh_quotient(ones, p.A, p.M, 1.0), 0.0, 1e-10);
    const auto zero = lhom::GridFunction::interpolate(p.grid, [](double) { return 0.0; });
    EXPECT_THROW(lhom::rayleigh_quotient(zero, p.A, p.M, 1.0), lhom::DomainError);

    // R(phi_1 + t d) - lambda_1 = O(t^2)
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n01;
    std::vector<double> d(p.grid->n_nodes());
    for (auto& v : d) {
        v = n01(rng);
    }
    const double dn = std::sqrt(p.M.matrix.bilinear(d, d));
    double prev = 0.0;
    for (double t : {1e-2, 1e-3}) {
        auto psi = pairs[1].phi;
        for (std::size_t i = 0; i < d.size(); ++i) {
            psi.values[i] += t * d[i] / dn;
        }
        const double dev = std::abs(lhom::rayleigh_quotient(psi, p.A, p.M, 1.0) - pairs[1].lambda);
        if (prev > 0.0) {
            EXPECT_NEAR(prev / dev, 100.0, 5.0);
        }
        prev = dev;
    }
}

TEST(Hermite, ReferenceValues)
{
    for (int n = 0; n <= 4; ++n) {
        for (double z : {-1.5, 0.0, 0.3, 2.0}) {
            EXPECT_NEAR(lhom::hermite_he(n, z), oracle::hermite_explicit(n, z), 1e-12);
        }
    }
    const auto& c = setup().coeffs;
    const auto g = lhom::build_grid(2.0, 0.5);
    const auto h0 = lhom::hermite_reference(c, g, 0);
    const auto h1 = lhom::hermite_reference(c, g, 1);
    const auto h3 = lhom::hermite_reference(c, g, 3);
    for (std::size_t i = 0; i < g->n_nodes(); ++i) {
        EXPECT_DOUBLE_EQ(h0.values[i], 1.0);
        EXPECT_NEAR(h1.values[i], g->nodes[i], 1e-14);
    }
    EXPECT_NEAR(h3.values.back(), 2.0 / std::sqrt(6.0), 1e-12);
    EXPECT_THROW(lhom::hermite_reference(c, g, 11), lhom::ParameterError);
    EXPECT_THROW(lhom::hermite_reference(c, g, -1), lhom::ParameterError);
}

TEST(Compare, IdenticalAndNegatedSpectra)
{
    const auto rho = lhom::eval_rho(setup().model, 0.2, 7.5);
    const auto g = lhom::build_grid(7.5, 0.04);
    const auto ops = lhom::build_operators(g, rho);
    const auto hom = lhom::solve_spectrum(ops.stiffness_hom, ops.mass_hom, setup().coeffs.Sigma, 4);
    const auto same = lhom::compare_spectra(hom, hom, ops.mass_hom, ops.stiffness_hom);
    for (const auto& r : same.rows) {
        EXPECT_EQ(r.gap, 0.0);
        EXPECT_EQ(r.err_l2, 0.0);
        EXPECT_EQ(r.aligned_sign, 1);
    }
    auto flipped = hom;
    for (double& v : flipped[2].phi.values) {
        v = -v;
    }
    const auto cmp = lhom::compare_spectra(flipped, hom, ops.mass_hom, ops.stiffness_hom);
    EXPECT_EQ(cmp.rows[2].aligned_sign, -1);
    EXPECT_LT(cmp.rows[2].err_l2, 1e-14);
    EXPECT_LT(cmp.rows[2].err_h1, 1e-14);
    auto shorter = hom;
    shorter.pop_back();
    EXPECT_THROW(lhom::compare_spectra(shorter, hom, ops.mass_hom, ops.stiffness_hom), lhom::ShapeError);
}

TEST(Compare, MismatchGrowsWithIndexAtEpsilonTenth)
{
    const double eps = 0.1;
    lhom::DensityOptions opts;
    opts.tail_tolerance = lhom::kExperimentTailTolerance;
    const auto rho = lhom::eval_rho(setup().model, eps, 5.0, opts);
    const auto g = lhom::build_grid(5.0, eps * eps);
    const auto ops = lhom::build_operators(g, rho);
    const auto ms = lhom::solve_spectrum(ops.stiffness_ms, ops.mass_ms, 1.0, 5);
    const auto hom = lhom::solve_spectrum(ops.stiffness_hom, ops.mass_hom, setup().coeffs.Sigma, 5);
    const auto cmp = lhom::compare_spectra(ms, hom, ops.mass_hom, ops.stiffness_hom);
    for (int n = 2; n <= 4; ++n) {
        EXPECT_GT(cmp.rows[n].gap, cmp.rows[n - 1].gap);
    }
    const auto sw = lhom::minimax_sandwich_check(ms, hom, setup().coeffs, lhom::norm_equivalence(setup().model));
    EXPECT_TRUE(sw.all_hold());
    const auto inv = lhom::spectral_invariants(ms, ops.stiffness_ms, ops.mass_ms, 1.0);
    EXPECT_LT(inv.orthonormality, 1e-8);
    EXPECT_LT(inv.rayleigh, 1e-8);
    EXPECT_LT(inv.h1_identity, 1e-6);
    EXPECT_LT(inv.lambda0, 1e-8);
    EXPECT_GT(inv.min_gap, 0.0);
}

TEST(Sandwich, ViolationDetected)
{
    const auto g = lhom::build_grid(1.0, 0.5);
    auto pairs = std::vector<lhom::EigenPair>(2);
    for (auto& p : pairs) {
        p.phi = lhom::GridFunction::interpolate(g, [](double) { return 1.0; });
    }
    auto ms = pairs;
    pairs[1].lambda = setup().coeffs.K;
    ms[1].lambda = 1000.0;
    const auto rep = lhom::minimax_sandwich_check(ms, pairs, setup().coeffs, lhom::norm_equivalence(setup().model));
    EXPECT_TRUE(rep.rows[0].holds);
    EXPECT_FALSE(rep.rows[1].holds);
    EXPECT_FALSE(rep.all_hold());
}
