#include "lhom/cell.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

namespace {

constexpr double kPi = std::numbers::pi;

const lhom::EffectiveCoefficients& ou_cell()
{
    static const auto c = lhom::solve_cell(lhom::make_ou_cosine_model(1.0));
    return c;
}

} // namespace

TEST(Cell, CoefficientMatchesBesselClosedForm)
{
    const auto& c = ou_cell();
    const double i0 = oracle::bessel_i0(1.0);
    EXPECT_NEAR(i0, std::cyl_bessel_i(0.0, 1.0), 1e-15);
    EXPECT_NEAR(c.K, 1.0 / (i0 * i0), 1e-10);
    EXPECT_NEAR(c.K, 0.62386036, 1e-8);
    EXPECT_NEAR(c.Sigma, c.K, 1e-15);
    EXPECT_NEAR(c.C_mu, 2.0 * kPi * i0, 1e-10);
    EXPECT_NEAR(c.C_mu_hat, 2.0 * kPi * i0, 1e-10);
    EXPECT_LT(c.K_residual, 1e-10);
}

TEST(Cell, CellDensityValueAtPi)
{
    const auto& c = ou_cell();
    EXPECT_NEAR(c.mu(kPi), std::exp(1.0) / (2.0 * kPi * oracle::bessel_i0(1.0)), 1e-12);
    EXPECT_NEAR(lhom::mu(lhom::make_ou_cosine_model(1.0), kPi), c.mu(kPi), 1e-12);
}

TEST(Cell, CorrectorHasZeroMeanAndIsPeriodic)
{
    const auto& c = ou_cell();
    const double mean = oracle::simpson([&](double y) { return c.Phi(y) * c.mu(y); }, 0.0, c.L, 4000);
    EXPECT_LT(std::abs(mean), 1e-10);
    EXPECT_NEAR(c.C_Phi, 0.0, 1e-10);
    for (double y : {-3.0, 0.0, 0.3, 1.7, 4.4}) {
        EXPECT_NEAR(c.Phi(y), c.Phi(y + c.L), 1e-12);
        EXPECT_NEAR(c.Phi(y), c.Phi(y - 3.0 * c.L), 1e-12);
    }
}

TEST(Cell, CorrectorSolvesCellEquation)
{
    // (exp(-p/sigma) (1 + Phi'))' = 0, i.e. Phi'' - (p'/sigma)(1 + Phi') = 0
    const auto& c = ou_cell();
    const double d = 1e-4;
    double worst_ode = 0.0;
    double worst_fd = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double y = c.L * (i + 0.5) / 1000.0;
        worst_ode = std::max(worst_ode, std::abs(c.ddPhi(y) - c.dp(y) * (1.0 + c.dPhi(y)) / c.sigma));
        const double fd = (c.Phi(y + d) - c.Phi(y - d)) / (2 * d);
        worst_fd = std::max(worst_fd, std::abs(fd - c.dPhi(y)));
    }
    EXPECT_LT(worst_ode, 1e-10);
    EXPECT_LT(worst_fd, 1e-6);
}

TEST(Cell, FlatPotentialGivesUnitCoefficient)
{
    const auto c = lhom::solve_cell(lhom::make_ou_flat_model(1.0));
    EXPECT_NEAR(c.K, 1.0, 1e-12);
    for (double y : {0.1, 2.0, 5.0}) {
        EXPECT_NEAR(c.Phi(y), 0.0, 1e-10);
    }
}

TEST(Cell, SigmaScalingFollowsBessel)
{
    for (double sigma : {0.5, 2.0}) {
        const auto c = lhom::solve_cell(lhom::make_ou_cosine_model(sigma));
        const double i0 = oracle::bessel_i0(1.0 / sigma);
        EXPECT_NEAR(c.K, 1.0 / (i0 * i0), 1e-9);
        EXPECT_NEAR(c.Sigma, sigma * c.K, 1e-12);
    }
}
