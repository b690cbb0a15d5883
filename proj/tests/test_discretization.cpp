#include "lhom/discretization.hpp"
#include "lhom/model.hpp"
#include "oracles.hpp"

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

namespace {

const auto unit = [](double) { return 1.0; };

lhom::DensityPair ou_density(double eps, double R = 7.5)
{
    return lhom::eval_rho(lhom::make_ou_cosine_model(1.0), eps, R);
}

} // namespace

TEST(Grid, ElementCounts)
{
    EXPECT_EQ(lhom::build_grid(5.0, 0.01)->n_elems, 1000u);
    EXPECT_EQ(lhom::build_grid(5.0, 0.04)->n_elems, 250u);
    EXPECT_EQ(lhom::build_grid(5.0, 0.03)->n_elems, 334u);
    const auto g = lhom::build_grid(5.0, 0.03);
    EXPECT_LE(g->h, 0.03);
    EXPECT_DOUBLE_EQ(g->nodes.front(), -5.0);
    EXPECT_DOUBLE_EQ(g->nodes.back(), 5.0);
    EXPECT_THROW(lhom::build_grid(5.0, 0.0), lhom::ParameterError);
    EXPECT_THROW(lhom::build_grid(5.0, 10.0), lhom::ParameterError);
    EXPECT_THROW(lhom::build_grid(-1.0, 0.1), lhom::ParameterError);
}

TEST(Assembly, UnitWeightEntries)
{
    const auto g = lhom::build_grid(1.0, 0.1);
    const double h = g->h;
    const auto M = lhom::assemble(g, unit, lhom::OperatorKind::mass, 1.0, lhom::WeightId::custom);
    const auto A = lhom::assemble(g, unit, lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::custom);
    for (std::size_t i = 1; i + 1 < g->n_nodes(); ++i) {
        EXPECT_NEAR(M.matrix.diag[i], 2.0 * h / 3.0, 1e-14);
        EXPECT_NEAR(A.matrix.diag[i], 2.0 / h, 1e-12);
    }
    EXPECT_NEAR(M.matrix.diag.front(), h / 3.0, 1e-14);
    EXPECT_NEAR(A.matrix.diag.back(), 1.0 / h, 1e-12);
    for (double o : M.matrix.off) {
        EXPECT_NEAR(o, h / 6.0, 1e-14);
    }
    for (double o : A.matrix.off) {
        EXPECT_NEAR(o, -1.0 / h, 1e-12);
    }
}

TEST(Assembly, StiffnessAnnihilatesConstants)
{
    const auto rho = ou_density(0.1);
    const auto g = lhom::build_grid(7.5, 0.01);
    const auto A = lhom::assemble(g, rho.ms(), lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::multiscale);
    const std::vector<double> ones(g->n_nodes(), 1.0);
    EXPECT_LT(lhom::norm_inf(A.matrix * ones), 1e-10);
}

TEST(Assembly, NonPositiveWeightRejected)
{
    const auto g = lhom::build_grid(1.0, 0.1);
    EXPECT_THROW(lhom::assemble(g, [](double x) { return x; }, lhom::OperatorKind::mass, 1.0,
                                lhom::WeightId::custom),
                 lhom::WeightError);
}

TEST(Norms, WeightedNormsOfSmoothFunction)
{
    // ||x||^2 = int x^2 rho^0 = 1 and ||x'||^2 = 1 for the standard Gaussian.
    const auto rho = ou_density(0.1, 10.0);
    const auto g = lhom::build_grid(10.0, 0.001);
    const auto M = lhom::assemble(g, rho.hom(), lhom::OperatorKind::mass, 1.0, lhom::WeightId::homogenized);
    const auto A = lhom::assemble(g, rho.hom(), lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::homogenized);
    const auto u = lhom::GridFunction::interpolate(g, [](double x) { return x; });
    const auto n = lhom::weighted_norms(u, M, A);
    EXPECT_NEAR(n.l2, 1.0, 1e-10);
    EXPECT_NEAR(n.h1, std::sqrt(2.0), 1e-10);
    EXPECT_NEAR(lhom::weighted_l2_norm(*g, [](double x) { return x; }, rho.hom()), 1.0, 1e-10);
}

TEST(GridFunction, ShapeAndGridChecks)
{
    const auto g = lhom::build_grid(1.0, 0.5);
    EXPECT_THROW(lhom::GridFunction(g, std::vector<double>(3)), lhom::ShapeError);
    const auto a = lhom::GridFunction::interpolate(g, [](double x) { return x; });
    const auto b = lhom::GridFunction::interpolate(lhom::build_grid(1.0, 0.25), [](double x) { return x; });
    EXPECT_THROW((void)(a - b), lhom::ShapeError);
}

TEST(Tridiagonal, HandSolvedThreeByThree)
{
    lhom::SymTridiagonal T;
    T.diag = {4.0, 4.0, 4.0};
    T.off = {1.0, 1.0};
    const std::vector<double> b = {5.0, 6.0, 5.0};  // x = (1, 1, 1)
    const auto x = lhom::solve_tridiagonal_spd(T, b);
    for (double v : x) {
        EXPECT_NEAR(v, 1.0, 1e-15);
    }
    T.diag = {1.0, -1.0, 1.0};
    EXPECT_THROW(lhom::solve_tridiagonal_spd(T, b), lhom::NotSpdError);
}

TEST(Tridiagonal, RandomSpdResiduals)
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t n = 50 + 10 * static_cast<std::size_t>(trial);
        lhom::SymTridiagonal T;
        T.off.resize(n - 1);
        T.diag.resize(n);
        for (auto& o : T.off) {
            o = u(rng);
        }
        for (std::size_t i = 0; i < n; ++i) {
            T.diag[i] = 2.0 + std::abs(u(rng));  // diagonally dominant
        }
        std::vector<double> b(n);
        for (auto& v : b) {
            v = u(rng);
        }
        const auto x = lhom::solve_tridiagonal_spd(T, b);
        EXPECT_LT(lhom::residual_inf(T, x, b), 1e-12);
    }
}

TEST(Coercivity, ReactionOperatorIsPositiveDefinite)
{
    const auto rho = ou_density(0.2);
    const auto g = lhom::build_grid(7.5, 0.05);
    const auto M = lhom::assemble(g, rho.ms(), lhom::OperatorKind::mass, 1.0, lhom::WeightId::multiscale);
    const auto A = lhom::assemble(g, rho.ms(), lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::multiscale);
    const auto B = lhom::combine(1.0, A.matrix, 1.0, M.matrix);
    const auto n = static_cast<Eigen::Index>(B.size());
    Eigen::MatrixXd dB = Eigen::MatrixXd::Zero(n, n);
    Eigen::MatrixXd dM = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        dB(i, i) = B.diag[static_cast<std::size_t>(i)];
        dM(i, i) = M.matrix.diag[static_cast<std::size_t>(i)];
        if (i + 1 < n) {
            dB(i, i + 1) = dB(i + 1, i) = B.off[static_cast<std::size_t>(i)];
            dM(i, i + 1) = dM(i + 1, i) = M.matrix.off[static_cast<std::size_t>(i)];
        }
    }
    // (A + M) >= min(1, 1) M, so the pencil eigenvalues are >= 1.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(dB, dM);
    EXPECT_GE(es.eigenvalues().minCoeff(), 1.0 - 1e-10);
}

TEST(NormEquivalence, DiscreteNormsBracketed)
{
    const auto model = lhom::make_ou_cosine_model(1.0);
    const auto ne = lhom::norm_equivalence(model);
    const auto rho = lhom::eval_rho(model, 0.1, 7.5);
    const auto g = lhom::build_grid(7.5, 0.01);
    const auto Mms = lhom::assemble(g, rho.ms(), lhom::OperatorKind::mass, 1.0, lhom::WeightId::multiscale);
    const auto Ams = lhom::assemble(g, rho.ms(), lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::multiscale);
    const auto Mh = lhom::assemble(g, rho.hom(), lhom::OperatorKind::mass, 1.0, lhom::WeightId::homogenized);
    const auto Ah = lhom::assemble(g, rho.hom(), lhom::OperatorKind::stiffness, 1.0, lhom::WeightId::homogenized);
    std::mt19937_64 rng(11);
    // rho^eps / rho^0 lies in [C_low^2, C_up^2], so the norms differ by at most a factor C_up.
    for (int k = 0; k < 50; ++k) {
        const auto f = oracle::RandomSmoothFunction::draw(rng);
        const auto u = lhom::GridFunction::interpolate(g, f);
        const auto a = lhom::weighted_norms(u, Mms, Ams);
        const auto b = lhom::weighted_norms(u, Mh, Ah);
        EXPECT_GE(a.l2, ne.c_low * b.l2 * (1 - 1e-10));
        EXPECT_LE(a.l2, ne.c_up * b.l2 * (1 + 1e-10));
        EXPECT_GE(a.h1, ne.c_low * b.h1 * (1 - 1e-10));
        EXPECT_LE(a.h1, ne.c_up * b.h1 * (1 + 1e-10));
    }
}
