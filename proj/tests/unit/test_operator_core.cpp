#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "frel/operator_core.hpp"
#include "frel/rng.hpp"

using namespace frel;

namespace {

double rel_sup(const GridFunction& a, const GridFunction& b, double radius) { return relative_sup_error(a, b, radius); }

}  // namespace

TEST(OperatorCore, SpectralActsOnFourierModesByTheSymbol) {
    const Grid g{40.0, 512};
    for (double s : {0.3, 0.5, 1.0})
        for (int k : {1, 5, 17}) {
            const OperatorParams p{s, 1.3, 1};
            const auto f = mode(g, k);
            const double xi = 2.0 * std::numbers::pi * k / g.length;
            const double lam = std::pow(xi * xi + p.m * p.m, s);
            const auto Lf = apply_spectral(f, p);
            for (std::size_t j = 0; j < g.n; j += 37) EXPECT_NEAR(Lf[j], lam * f[j], 1e-11 * lam);
        }
}

TEST(OperatorCore, SpectralAtOrderOneIsMinusLaplacianPlusMass) {
    const Grid g{40.0, 2048};
    const double m = 0.7;
    const auto f = GridFunction::sample(g, [](double x) { return std::exp(-x * x); });
    const auto exact = GridFunction::sample(g, [&](double x) {
        return (2.0 - 4.0 * x * x + m * m) * std::exp(-x * x);
    });
    EXPECT_LE(rel_sup(apply_spectral(f, {1.0, m, 1}), exact, 10.0), 1e-12);
}

TEST(OperatorCore, ThreeDefinitionsAgreeOnGaussian) {
    const Grid g{40.0, 1024};
    const auto f = gaussian(g);
    for (double s : {0.3, 0.7}) {
        const OperatorParams p{s, 1.0, 1};
        const auto a = apply_spectral(f, p), b = apply_singular_integral(f, p), c = apply_subordination(f, p);
        EXPECT_LE(rel_sup(b, a, 10.0), 1e-3) << s;
        EXPECT_LE(rel_sup(c, a, 10.0), 1e-3) << s;
    }
}

// f_c(x) = f(3x): L_m^s f_c (x) = 3^{2s} (L_{m/3}^s f)(3x). Sampling f_c on a
// box of length L and f on a box of length 3L puts both on the same indices.
TEST(OperatorCore, DilationByThreeRescalesMassAndOrder) {
    const double c = 3.0;
    const Grid g{40.0, 2048}, g3{c * 40.0, 2048};
    const auto fc = GridFunction::sample(g, [&](double x) { return std::exp(-c * c * x * x / 4.0) * std::cos(c * x); });
    const auto f = GridFunction::sample(g3, [](double y) { return std::exp(-y * y / 4.0) * std::cos(y); });
    for (double s : {0.3, 0.5, 0.7}) {
        const OperatorParams p{s, 1.2, 1}, q{s, 1.2 / c, 1};
        const auto lhs = apply_spectral(fc, p);
        // index j of g3 sits at c times the point j of g
        auto rhs = GridFunction(g, apply_spectral(f, q).values);
        rhs = std::pow(c, 2.0 * s) * rhs;
        EXPECT_LE(rel_sup(lhs, rhs, 10.0), 1e-12) << s;

        const auto lhs_si = apply_singular_integral(fc, p);
        EXPECT_LE(rel_sup(lhs_si, rhs, 5.0), 1e-3) << s;
    }
}

TEST(OperatorCore, SpectralIsSymmetricAndBoundedBelow) {
    const Grid g{40.0, 1024};
    Rng rng(split_seed(7, "unit", "operator_symmetry"));
    for (int trial = 0; trial < 5; ++trial) {
        const auto f = random_band_limited(g, rng), h = random_band_limited(g, rng);
        const OperatorParams p{rng.uniform(0.1, 1.0), rng.uniform(0.2, 2.0), 1};
        const double a = inner(apply_spectral(f, p), h), b = inner(f, apply_spectral(h, p));
        EXPECT_NEAR(a, b, 1e-12 * (std::abs(a) + 1.0));
        EXPECT_GE(inner(apply_spectral(f, p), f), std::pow(p.m, 2.0 * p.s) * norm2_sq(f) * (1.0 - 1e-12));
    }
}

TEST(OperatorCore, CarreDuChampIsNonpositiveOnDiagonal) {
    const Grid g{40.0, 1024};
    Rng rng(split_seed(7, "unit", "carre"));
    for (int trial = 0; trial < 4; ++trial) {
        const auto f = random_band_limited(g, rng);
        const double s = rng.uniform(0.2, 0.8), m = rng.uniform(0.3, 2.0);
        const auto H = carre_du_champ(f, f, {s, m, 1});
        for (std::size_t j = 0; j < g.n; ++j) EXPECT_LE(H[j], 1e-12) << j;
        const auto Hs = carre_du_champ_spectral(f, f, m, s);
        EXPECT_LE(rel_sup(H, Hs, 8.0), 2e-3);
    }
}

TEST(OperatorCore, BesselIdentityInterior) {
    for (double s : {0.3, 0.5, 0.7})
        for (double lam : {0.0, 0.3, 0.6, 0.9}) {
            const auto r = bessel_identity_check(lam, 1, s, 1e-5);
            EXPECT_TRUE(r.pass) << "s=" << s << " lambda=" << lam << " err " << r.measured;
        }
}

TEST(OperatorCore, BesselIdentityEndpointIsMinusOne) {
    const auto r = bessel_identity_check(1.0, 1, 0.5, 1e-4);
    EXPECT_TRUE(r.pass) << r.measured;
    EXPECT_NEAR(std::pow(1.0 - 1.0, 0.5) - 1.0, -1.0, 0.0);
}

TEST(OperatorCore, WindowedExponentialIsEigenfunction) {
    const Grid g{80.0, 8192};
    const auto window = smooth_window(g);
    for (double s : {0.3, 0.5}) {
        const auto r = eigenfunction_residual(0.5, {s, 1.0, 1}, window, 1e-3);
        EXPECT_TRUE(r.pass) << "s=" << s << " residual " << r.measured;
    }
}

TEST(OperatorCore, KernelFormRejectsMasslessAndLocalCases) {
    const Grid g{40.0, 256};
    const auto f = gaussian(g);
    EXPECT_THROW(apply_singular_integral(f, {0.5, 0.0, 1}), std::invalid_argument);
    EXPECT_THROW(apply_singular_integral(f, {1.0, 1.0, 1}), std::invalid_argument);
    EXPECT_THROW(apply_spectral(f, {1.5, 1.0, 1}), std::invalid_argument);
}
