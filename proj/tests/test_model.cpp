#include "gpav/model.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

using namespace gpav;

namespace {

constexpr double pi = std::numbers::pi;

const GridSpec square2{20, 20, 2.0, 2.0};

PhysicalParams unit_params()
{
    PhysicalParams p;
    p.m0 = 1.0;
    p.beta = 1.0;
    p.lambda = 0.0;
    p.well_amp = 1.0;
    p.c0 = 1.0;
    return p;
}

double cc(double x, double y) { return std::cos(pi * x) * std::cos(pi * y); }

RealField random_smooth(const GridSpec& g, std::mt19937& rng, int modes)
{
    std::uniform_int_distribution<int> k(-4, 4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    RealField f(g);
    for (int m = 0; m < modes; ++m) {
        const double kx = 2.0 * pi * k(rng) / g.lx, ky = 2.0 * pi * k(rng) / g.ly;
        const double amp = 0.5 * u(rng), phase = pi * u(rng);
        f += RealField::from_function(g, [&](double x, double y) { return amp * std::cos(kx * x + ky * y + phase); });
    }
    return f;
}

} // namespace

TEST(PhysicalParams, Validation)
{
    EXPECT_NO_THROW(unit_params().validate());
    auto bad = unit_params();
    bad.m0 = 0.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = unit_params();
    bad.beta = -1.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = unit_params();
    bad.lambda = -0.1;
    EXPECT_THROW(bad.validate(), InvalidArgument);
    bad = unit_params();
    bad.eta = 0.0;
    EXPECT_THROW(bad.validate(), InvalidArgument);
}

TEST(PhysicalParams, SurfaceTensionConversion)
{
    EXPECT_NEAR(sigma_to_beta(151.15, 0.01), 3.0 / (2.0 * std::sqrt(2.0)) * 151.15 * 0.01, 1e-14);
    const auto p = applied_params(1e-6, 151.15, 0.01);
    EXPECT_DOUBLE_EQ(p.well_amp, p.beta / 1e-4);
    EXPECT_DOUBLE_EQ(p.c0, 1.0);
    EXPECT_DOUBLE_EQ(p.lambda, 0.0);
}

TEST(PotentialH, WellMinimaAndZero)
{
    const auto p = unit_params();
    EXPECT_EQ(potential_h(RealField(square2, 0.0), p).max_abs(), 0.0);
    EXPECT_EQ(potential_h(RealField(square2, 1.0), p).max_abs(), 0.0);
    EXPECT_EQ(potential_h(RealField(square2, -1.0), p).max_abs(), 0.0);
}

TEST(PotentialH, ValueAtTwo)
{
    const auto h = potential_h(RealField(square2, 2.0), unit_params());
    for (double v : h.values()) {
        EXPECT_DOUBLE_EQ(v, 6.0);
    }
}

TEST(Energy, WellMinimumGivesShift)
{
    auto p = unit_params();
    p.c0 = 2.5;
    EXPECT_NEAR(energy_total(RealField(square2, 1.0), p), 2.5, 1e-14);
}

TEST(Energy, ZeroFieldOnSquare)
{
    auto p = unit_params();
    p.c0 = 0.7;
    EXPECT_NEAR(energy_total(RealField(square2), p), 1.0 + 0.7, 1e-14);
}

TEST(Energy, ProductOfCosinesAnalytic)
{
    // pi^2 from the gradient, int (phi^2 - 1)^2 / 4 = (9/16 - 2 + 4) / 4.
    const auto phi = RealField::from_function(square2, cc);
    EXPECT_NEAR(energy_total(phi, unit_params()), pi * pi + 41.0 / 64.0 + 1.0, 1e-12);
}

TEST(Energy, ProductOfCosinesMatchesFineQuadrature)
{
    // Brute-force oracle: analytic integrand (including the analytic gradient) summed on 256^2.
    const GridSpec fine{256, 256, 2.0, 2.0};
    const auto integrand = RealField::from_function(fine, [](double x, double y) {
        const double phi = cc(x, y);
        const double gx = -pi * std::sin(pi * x) * std::cos(pi * y);
        const double gy = -pi * std::cos(pi * x) * std::sin(pi * y);
        return 0.5 * (gx * gx + gy * gy) + 0.25 * std::pow(phi * phi - 1.0, 2);
    });
    const double oracle = integrate(integrand) + 1.0;
    const auto phi = RealField::from_function(square2, cc);
    EXPECT_NEAR(energy_total(phi, unit_params()), oracle, 1e-12);
}

TEST(Energy, NonPositiveThrows)
{
    auto p = unit_params();
    p.c0 = -5.0;
    EXPECT_THROW(energy_total(RealField(square2), p), NonPositiveEnergy);
    EXPECT_NEAR(energy_unchecked(RealField(square2), p), -4.0, 1e-14);
}

TEST(Energy, ShiftedEnergyBoundedBelowByShift)
{
    std::mt19937 rng(21);
    auto p = unit_params();
    p.lambda = 0.3;
    for (int trial = 0; trial < 20; ++trial) {
        EXPECT_GE(energy_total(random_smooth(square2, rng, 5), p) - p.c0, 0.0);
    }
}

TEST(Dissipation, ConstantIsZero)
{
    EXPECT_NEAR(dissipation(RealField(square2, 3.0), unit_params()), 0.0, 1e-13);
}

TEST(Dissipation, ProductOfCosines)
{
    EXPECT_NEAR(dissipation(RealField::from_function(square2, cc), unit_params()), 2.0 * pi * pi, 1e-12);
}

TEST(Dissipation, LinearInMobility)
{
    std::mt19937 rng(2);
    const auto mu = random_smooth(square2, rng, 4);
    auto p = unit_params();
    const double d1 = dissipation(mu, p);
    p.m0 = 2.0;
    EXPECT_NEAR(dissipation(mu, p), 2.0 * d1, 1e-13 * d1);
    EXPECT_GE(d1, 0.0);
}

TEST(ChemicalPotential, EquilibriaAreZero)
{
    const auto p = unit_params();
    EXPECT_EQ(chemical_potential_exact(RealField(square2), p).max_abs(), 0.0);
    EXPECT_LT(chemical_potential_exact(RealField(square2, 1.0), p).max_abs(), 1e-14);
}

TEST(ChemicalPotential, ProductOfCosinesPointwise)
{
    const auto phi = RealField::from_function(square2, cc);
    const auto mu = chemical_potential_exact(phi, unit_params());
    const auto expected = RealField::from_function(square2, [](double x, double y) {
        const double v = cc(x, y);
        return 2.0 * pi * pi * v + v * v * v - v;
    });
    EXPECT_LT((mu - expected).max_abs(), 1e-12);
}

TEST(ChemicalPotential, IsTheVariationalDerivativeOfTheEnergy)
{
    // E[phi + eps v] is quartic in eps, so the central difference error is c3 eps^2 and
    // halving eps divides it by 4.
    std::mt19937 rng(42);
    auto p = unit_params();
    p.beta = 0.05;
    p.lambda = 0.2;
    p.well_amp = 2.0;
    const GridSpec g{32, 32, 2.0, 2.0};
    for (int trial = 0; trial < 5; ++trial) {
        const auto phi = random_smooth(g, rng, 6);
        const auto v = random_smooth(g, rng, 6);
        const double exact = integrate(multiply(chemical_potential_exact(phi, p), v));
        auto fd = [&](double eps) {
            return (energy_total(combine(1.0, phi, eps, v), p) - energy_total(combine(1.0, phi, -eps, v), p)) /
                   (2.0 * eps);
        };
        const double err1 = std::abs(fd(1e-3) - exact);
        const double err2 = std::abs(fd(5e-4) - exact);
        EXPECT_LT(err1, 1e-4 * std::max(1.0, std::abs(exact)));
        EXPECT_NEAR(err1 / err2, 4.0, 0.2);
    }
}
