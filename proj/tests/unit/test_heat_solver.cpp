#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "frel/heat_solver.hpp"

using namespace frel;

TEST(HeatSolver, OrderOneKernelIsDampedGaussian) {
    const Grid g{40.0, 2048};
    const double m = 0.8;
    for (double t : {0.25, 1.0}) {
        const auto K = fundamental_solution(t, {1.0, m, 1}, g);
        const auto exact = GridFunction::sample(g, [&](double x) {
            return std::exp(-m * m * t) * std::exp(-x * x / (4.0 * t)) / std::sqrt(4.0 * std::numbers::pi * t);
        });
        EXPECT_LE(relative_sup_error(K, exact, 10.0), 1e-12) << t;
    }
}

TEST(HeatSolver, HalfOrderKernelMatchesClosedForm) {
    const Grid g{40.0, 4096};
    for (double t : {0.5, 1.0}) {
        const auto r = explicit_kernel_check(t, {0.5, 1.0, 1}, g, 10.0, 1e-4);
        EXPECT_TRUE(r.pass) << "t=" << t << " err " << r.measured;
    }
}

TEST(HeatSolver, KernelMassDecaysExactly) {
    const Grid g{40.0, 4096};
    for (double s : {0.3, 0.5, 0.7}) {
        const auto K = fundamental_solution(1.0, {s, 1.0, 1}, g);
        EXPECT_NEAR(integrate(K), std::exp(-1.0), 1e-12) << s;
        EXPECT_TRUE(kernel_mass_check(1.0, {s, 1.0, 1}, g).pass);
    }
}

TEST(HeatSolver, WeightedKernelMassNeedsTheTiltedContour) {
    const Grid g{240.0, 16384};
    for (double lam : {0.0, 0.5, 0.9}) {
        const auto r = weighted_l1_kernel(1.0, lam, {0.5, 1.0, 1}, g, 1e-3);
        EXPECT_TRUE(r.pass) << "lambda=" << lam << " err " << r.measured;
    }
}

TEST(HeatSolver, SemigroupProperty) {
    const Grid g{40.0, 1024};
    Rng rng(split_seed(3, "unit", "semigroup"));
    const auto u0 = random_band_limited(g, rng);
    const OperatorParams p{0.6, 1.1, 1};
    const auto a = evolve_free(evolve_free(u0, 0.3, p).u, 0.45, p).u;
    const auto b = evolve_free(u0, 0.75, p).u;
    EXPECT_LE(relative_sup_error(a, b, 15.0), 1e-13);
}

TEST(HeatSolver, EnergyIdentity) {
    const Grid g{40.0, 4096};
    const auto u0 = GridFunction::sample(g, [](double x) { return std::exp(-0.5 * x * x); });
    for (double s : {0.3, 0.5, 0.7}) {
        const auto r = energy_identity_check(u0, {s, 1.0, 1}, 1.0, 100, 1e-4);
        EXPECT_TRUE(r.pass) << s << " err " << r.measured;
    }
}

TEST(HeatSolver, WeightedDecayHasNonnegativeSlackUpToM) {
    const Grid g{80.0, 8192};
    const auto u0 = gaussian(g);
    for (double lam : {0.0, 0.5, 1.0}) {
        const auto r = weighted_decay_check(u0, lam, {0.5, 1.0, 1}, uniform_times(21));
        EXPECT_TRUE(r.pass) << lam << " slack " << -r.measured;
    }
    EXPECT_THROW(weighted_decay_check(u0, 2.5, {0.5, 1.0, 1}, uniform_times(21)), std::domain_error);
}

TEST(HeatSolver, LogConvexityOnRandomData) {
    const Grid g{80.0, 8192};
    for (int i = 0; i < 10; ++i) {
        Rng rng(split_seed(11, "unit", "log_convexity", static_cast<std::uint64_t>(i)));
        const auto u0 = random_band_limited(g, rng);
        for (double lam : {0.0, 0.5}) {
            const auto r = log_convexity_check(u0, lam, {0.5, 1.0, 1}, uniform_times(21), 1e-6);
            EXPECT_TRUE(r.pass) << i << " lambda " << lam << " excess " << r.measured;
        }
    }
}

TEST(HeatSolver, ConstantPotentialShiftsTheDecayRate) {
    const Grid g{40.0, 4096};
    PicardConfig cfg;
    cfg.dt = 0.01;
    for (double c : {-1.0, 0.5, 1.0}) {
        const auto r = constant_potential_check(gaussian(g), c, {0.5, 1.0, 1}, 1.0, cfg, 1e-5);
        EXPECT_TRUE(r.pass) << c << " err " << r.measured;
    }
}

TEST(HeatSolver, PicardContractsAtRateVdt) {
    const Grid g{40.0, 4096};
    PicardConfig cfg;
    cfg.dt = 0.01;
    for (int i = 0; i < 5; ++i) {
        Rng rng(split_seed(5, "unit", "picard", static_cast<std::uint64_t>(i)));
        const auto V = random_potential(rng, 1.0);
        const auto u0 = random_band_limited(g, rng);
        const auto r = picard_contraction_check(u0, V, {0.5, 1.0, 1}, 1.0, cfg);
        EXPECT_TRUE(r.pass) << i << " ratio " << r.measured << " bound " << r.tolerance;
    }
}

TEST(HeatSolver, ZeroPotentialMildSolutionIsFreeFlow) {
    const Grid g{40.0, 1024};
    const auto u0 = gaussian(g);
    const OperatorParams p{0.5, 1.0, 1};
    const auto sol = evolve_with_potential(u0, PotentialField::zero(), 1.0, p);
    EXPECT_LE(relative_sup_error(sol.states.back().u, evolve_free(u0, 1.0, p).u, 15.0), 1e-12);
}

TEST(HeatSolver, RejectsNonpositiveTime) {
    const Grid g{40.0, 256};
    EXPECT_THROW(fundamental_solution(0.0, {0.5, 1.0, 1}, g), std::domain_error);
    EXPECT_THROW(evolve_free(gaussian(g), -1.0, {0.5, 1.0, 1}), std::domain_error);
}
