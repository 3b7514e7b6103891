#include <gtest/gtest.h>

#include <cmath>

#include "frel/suites.hpp"

using namespace frel;

TEST(SymbolCalculus, BracketMatchesFiniteDifferences) {
    int used = 0;
    for (int i = 0; i < 200; ++i) {
        Rng r(split_seed(5, "unit", "bracket", static_cast<std::uint64_t>(i)));
        const auto b = random_bracket_sample(r);
        if (detail::z_polar(b.pt.xi, b.p.m, b.w.jet(b.pt.t, b.pt.x).x).rho < 1e-6) continue;
        ++used;
        const double cf = poisson_bracket(b.pt, b.w, b.p).value, fd = fd_poisson_bracket(b.pt, b.w, b.p);
        EXPECT_NEAR(cf, fd, 1e-5 * std::abs(cf)) << i;
    }
    EXPECT_GT(used, 150);
}

TEST(SymbolCalculus, BracketIsEvenInXi) {
    for (int i = 0; i < 50; ++i) {
        Rng r(split_seed(5, "unit", "even", static_cast<std::uint64_t>(i)));
        auto b = random_bracket_sample(r);
        const double a = poisson_bracket(b.pt, b.w, b.p).value;
        b.pt.xi = -b.pt.xi;
        EXPECT_NEAR(poisson_bracket(b.pt, b.w, b.p).value, a, 1e-12 * std::abs(a)) << i;
    }
}

// Massless, constant psi: the symbol is homogeneous of degree 2s in (xi, phi_x)
// and the bracket carries one phi_xx = 2 alpha / R^2, so
// {a,b}(c alpha, c xi) = c^{4s-1} {a,b}(alpha, xi).
TEST(SymbolCalculus, BracketHomogeneityExponent) {
    for (double s : {0.6, 0.75, 0.9})
        for (double c : {2.0, 3.0}) {
            const OperatorParams p{s, 0.0, 1};
            const QuadraticWeight w{1.3, 1.0, PsiProfile::constant(2.5), 1.0};
            QuadraticWeight wc = w;
            wc.alpha *= c;
            const SymbolPoint pt{0.3, 0.0, 0.7, 0.0};
            SymbolPoint ptc = pt;
            ptc.xi *= c;
            const double a = poisson_bracket(pt, w, p).value, b = poisson_bracket(ptc, wc, p).value;
            EXPECT_NEAR(std::log(b / a) / std::log(c), 4.0 * s - 1.0, 1e-10) << s << ' ' << c;
        }
}

TEST(SymbolCalculus, ParabolicTermsMatchFiniteDifferences) {
    for (int i = 0; i < 100; ++i) {
        Rng r(split_seed(5, "unit", "parabolic", static_cast<std::uint64_t>(i)));
        const auto b = random_bracket_sample(r);
        if (detail::z_polar(b.pt.xi, b.p.m, b.w.jet(b.pt.t, b.pt.x).x).rho < 1e-6) continue;
        const auto T = parabolic_bracket_terms(b.pt, b.w, b.p);
        const auto F = fd_parabolic_terms(b.pt, b.w, b.p);
        const double sc = std::abs(T.I) + std::abs(T.II) + std::abs(T.III) + std::abs(T.IVa) + std::abs(T.IVb) +
                          std::abs(T.V);
        EXPECT_NEAR(T.total, F.total, 1e-5 * sc) << i;
    }
}

TEST(SymbolCalculus, OrderOneCommutator) {
    const auto w = commutator_weight();
    const auto g = commutator_grid();
    const auto tests = gaussian_tests(g, 17, "commutator", 5);
    for (double m : {0.0, 0.5}) {
        const auto r = s1_commutator_check(w, m, g, tests, 1e-8);
        EXPECT_TRUE(r.pass) << m << " err " << r.measured;
    }
}

TEST(SymbolCalculus, SymmetricAntisymmetricSplit) {
    const auto w = commutator_weight();
    const auto g = commutator_grid();
    const auto tests = gaussian_tests(g, 17, "decomposition", 4);
    for (double s : {1.0, 0.75}) {
        const auto r = decomposition_identity_check(conjugated_operator_matrix(w, {s, 0.5, 1}, g), tests, 1e-8);
        EXPECT_TRUE(r.pass) << s << " err " << r.measured;
    }
}

TEST(SymbolCalculus, MatrixConjugationIdentity) {
    Rng r(split_seed(5, "unit", "appendix"));
    for (double s : {-0.5, 0.3, 0.5, 1.0}) {
        std::vector<double> phi(64);
        for (auto& v : phi) v = 0.5 * r.normal();
        const auto rep = appendix_conjugation_check(64, s, phi, 1.0, 1e-10);
        EXPECT_TRUE(rep.pass) << s << " err " << rep.measured;
    }
}

TEST(SymbolCalculus, PositivityFailsForAnInadmissibleWeight) {
    const QuadraticWeight w{1.0, 1.0, PsiProfile::oscillating(2.5, 0.5, 1.0), 1.0};
    PositivitySweepSpec spec;
    spec.c_cal = 1.2;
    try {
        positivity_sweep(w, {0.75, 2.0, 1}, spec);
        FAIL() << "expected ConstraintViolation";
    } catch (const ConstraintViolation& e) {
        EXPECT_LT(e.report.get("min_ratio"), 0.0);
        EXPECT_TRUE(e.report.has_witness());
    }
}

TEST(SymbolCalculus, PositivityHoldsAboveTheThreshold) {
    PositivitySweepSpec spec;
    spec.c_cal = 1.2;
    const QuadraticWeight w{alpha_for_ratio(1.8, positivity_templates()[0]), 1.0, PsiProfile::reciprocal(3.0), 1.0};
    const auto r = positivity_sweep(w, {0.75, 0.0, 1}, spec);
    EXPECT_GT(r.get("min_ratio"), 0.0);
}

// Refining the xi grid moves the minimum ratio by well under a percent.
TEST(SymbolCalculus, PositivityArgminIsStableUnderRefinement) {
    const QuadraticWeight w{60.0, 1.0, PsiProfile::oscillating(2.5, 0.5, 1.0), 1.0};
    const OperatorParams p{0.75, 120.0, 1};
    PositivitySweepSpec a, b;
    b.nxi = 2 * a.nxi;
    b.nx = 2 * a.nx - 1;
    b.ndense = 2 * a.ndense;
    const double ra = positivity_sweep(w, p, a).get("min_ratio"), rb = positivity_sweep(w, p, b).get("min_ratio");
    EXPECT_NEAR(ra, rb, 1e-2 * std::abs(rb));
}

// Doubling alpha multiplies the derivative maxima by 2^{4s-1}: each x
// derivative brings phi_xx = 2 alpha / R^2.
TEST(SymbolCalculus, GardingDerivativeScalingUnderAlphaDoubling) {
    const double s = 0.75;
    const OperatorParams p{s, 0.0, 1};
    GardingSpec spec;
    spec.max_order = 5;
    const auto lo = garding_hypothesis_check({64.0, 1.0, PsiProfile::constant(2.5), 1.0}, p, spec);
    const auto hi = garding_hypothesis_check({128.0, 1.0, PsiProfile::constant(2.5), 1.0}, p, spec);
    for (const char* k : {"max_order_4", "max_order_5"}) {
        const double e = std::log2(hi.get(k) / lo.get(k));
        EXPECT_NEAR(e, 4.0 * s - 1.0, 0.1) << k;
    }
}

TEST(SymbolCalculus, CarlemanPreconditions) {
    const QuadraticWeight w{1.0, 0.15, PsiProfile::oscillating(2.5, 0.5, 1.0), 1.0};
    const OperatorParams p{0.75, 0.0, 1};
    const double C = 0.9 * std::pow(w.alpha, 4.0 * p.s - 1.0) / std::pow(w.R, 4.0 * p.s);
    EXPECT_NO_THROW(check_carleman_preconditions(w, p, CarlemanMode::parabolic, C, 1.2));
    EXPECT_THROW(check_carleman_preconditions(w, p, CarlemanMode::parabolic, C, 1e6), std::domain_error);
    EXPECT_THROW(check_carleman_preconditions(w, p, CarlemanMode::parabolic, 2.0 * C, 1.2), std::domain_error);
    EXPECT_THROW(check_carleman_preconditions(w, {0.75, 100.0, 1}, CarlemanMode::parabolic, C, 1.2), std::domain_error);
    EXPECT_THROW(check_carleman_preconditions(w, p, CarlemanMode::elliptic, C), std::domain_error);
}

TEST(SymbolCalculus, AnnulusFamilyStaysInsideTheRegion) {
    const QuadraticWeight w{1.0, 1.0, PsiProfile::constant(3.0), 1.0};
    const auto g = quadratic_grid(w, 256);
    const auto fam = annulus_family(g, w, CarlemanMode::elliptic, 3, "unit", 5, 8);
    for (const auto& T : family_terms(fam, w, {0.5, 0.0, 1}, CarlemanMode::elliptic, 1)) {
        EXPECT_LE(T.leak, 1e-12);
        EXPECT_GT(T.rhs, 0.0);
    }
}

TEST(SymbolCalculus, QuadraticCheckFailsWhenConstantsAreInflated) {
    const QuadraticWeight w{1.0, 1.0, PsiProfile::constant(3.0), 1.0};
    const OperatorParams p{0.5, 0.0, 1};
    const auto g = quadratic_grid(w, 256);
    const auto fam = annulus_family(g, w, CarlemanMode::elliptic, 3, "unit", 10, 8);
    const auto [c1, c2] = fit_carleman_constants(family_terms(fam, w, p, CarlemanMode::elliptic, 1));
    EXPECT_TRUE(carleman_quadratic_check(fam, w, p, CarlemanMode::elliptic, c1, c2, 1.0).pass);
    EXPECT_FALSE(carleman_quadratic_check(fam, w, p, CarlemanMode::elliptic, 4.0 * c1, 4.0 * c2, 1.0).pass);
}

// The span infimum bounds every member from below, and its argmin attains it.
TEST(SymbolCalculus, SpanMinimumBoundsRandomMembers) {
    const QuadraticWeight w{1.0, 1.0, PsiProfile::constant(3.0), 1.0};
    const OperatorParams p{0.5, 2.0, 1};
    const auto g = quadratic_grid(w, 256);
    const auto S = annulus_span_minimum(g, w, w, p, CarlemanMode::elliptic, 8, 1);
    EXPECT_EQ(annulus_span_indices(CarlemanMode::elliptic).size(), 9u);
    const auto Ta = quadratic_carleman_terms(annulus_function(g, w, CarlemanMode::elliptic, S.grad_argmin, 8), w, p,
                                             CarlemanMode::elliptic);
    EXPECT_NEAR(Ta.rhs / Ta.grad, S.grad_ratio, 1e-6 * S.grad_ratio);
    const auto fam = annulus_family(g, w, CarlemanMode::elliptic, 3, "unit", 200, 8);
    for (const auto& T : family_terms(fam, w, p, CarlemanMode::elliptic, 1)) {
        EXPECT_GE(T.rhs / T.grad, S.grad_ratio * (1.0 - 1e-9));
        EXPECT_GE(T.rhs / T.mass, S.mass_ratio * (1.0 - 1e-9));
    }
    EXPECT_TRUE(carleman_quadratic_check(fam, w, p, CarlemanMode::elliptic, 0.5 * S.grad_ratio, 0.5 * S.mass_ratio,
                                         1.0)
                    .pass);
}

TEST(SymbolCalculus, SpanMinimumParabolicDimension) {
    const QuadraticWeight w{1.0, 0.15, PsiProfile::oscillating(2.5, 0.5, 1.0), 1.0};
    const auto g = quadratic_grid(w, 128);
    const auto S = annulus_span_minimum(g, w, w, {0.75, 0.0, 1}, CarlemanMode::parabolic, 16, 1);
    EXPECT_EQ(S.grad_argmin.size(), 20u);
    EXPECT_EQ(S.grad_argmin[1], 0.0);
    EXPECT_EQ(S.grad_argmin[11], 0.0);
    EXPECT_GT(S.grad_ratio, 0.0);
    EXPECT_GT(S.mass_ratio, 0.0);
}

// (alpha, R) -> (2 alpha, 2 R) at fixed (x/R, xi), m = 0, against the factor
// 2^{2s-1}. phi_x is unchanged and phi_xx halves, so the bracket halves.
TEST(SymbolCalculus, BracketScalingUnderJointDilation) {
    for (double s : {0.6, 0.75, 0.9}) {
        const OperatorParams p{s, 0.0, 1};
        const QuadraticWeight w{1.3, 1.0, PsiProfile::constant(2.5), 1.0};
        QuadraticWeight w2 = w;
        w2.alpha *= 2.0;
        w2.R *= 2.0;
        double lo = INFINITY, hi = -INFINITY;
        for (double y : {-1.2, 0.4, 1.1})
            for (double xi : {0.3, 2.0, 9.0}) {
                const SymbolPoint pt{y * w.R, 0.0, xi, 0.0}, pt2{y * w2.R, 0.0, xi, 0.0};
                const double r = poisson_bracket(pt2, w2, p).value / poisson_bracket(pt, w, p).value;
                lo = std::min(lo, r);
                hi = std::max(hi, r);
            }
        const double want = std::pow(2.0, 2.0 * s - 1.0);
        EXPECT_LE(std::max(std::abs(lo - want), std::abs(hi - want)), 1e-8)
            << "s=" << s << " observed ratios in [" << lo << ", " << hi << "], expected " << want;
    }
}

// Doubling alpha against the tightening factor 2^{2(2s-3)} on the
// envelope-normalized derivative maxima.
TEST(SymbolCalculus, GardingBoundUnderAlphaDoublingAgainstEnvelopeFactor) {
    const double s = 0.75;
    const OperatorParams p{s, 0.0, 1};
    const QuadraticWeight lo_w{64.0, 1.0, PsiProfile::constant(2.5), 1.0}, hi_w{128.0, 1.0, PsiProfile::constant(2.5), 1.0};
    const auto lo = garding_hypothesis_check(lo_w, p), hi = garding_hypothesis_check(hi_w, p);
    EXPECT_NEAR(hi.measured / lo.measured, std::pow(2.0, 2.0 * (2.0 * s - 3.0)), 0.1 * std::pow(2.0, 2.0 * (2.0 * s - 3.0)));
}
