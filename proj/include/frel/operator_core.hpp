#pragma once

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <tuple>
#include <vector>

#include "frel/check_report.hpp"
#include "frel/grid.hpp"
#include "frel/quadrature.hpp"
#include "frel/special_functions.hpp"
#include "frel/spectral.hpp"

namespace frel {

struct OperatorParams {
    double s = 0.5;
    double m = 1.0;
    int dim = 1;

    void validate() const {
        if (!(s > 0.0 && s <= 1.0)) throw std::invalid_argument("operator: s must lie in (0, 1]");
        if (!(m >= 0.0)) throw std::invalid_argument("operator: m must be nonnegative");
        if (dim != 1) throw std::invalid_argument("operator: only dim = 1 is implemented");
    }
    void validate_kernel_form() const {
        validate();
        if (!(m > 0.0)) throw std::invalid_argument("singular integral form needs m > 0");
        if (!(s < 1.0)) throw std::invalid_argument("singular integral form needs s < 1");
    }
};

struct SingularQuadConfig {
    double far_cutoff = 40.0;  // kernel truncated at far_cutoff / m
    bool pv_pairing = true;
    double rel_tol = 1e-10;

    void validate() const {
        if (!(far_cutoff >= 10.0)) throw std::invalid_argument("far_cutoff must be at least 10");
        if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be positive");
    }
};

struct SubordinationQuad {
    double u_min = -50.0;  // t = e^u
    double u_max = 80.0;
    double du = 0.05;
    double rel_tol = 1e-8;
};

// ---- spectral path -----------------------------------------------------

// (xi^2 + m^2)^power per mode; a zero symbol raised to a nonpositive power is
// mapped to 0 (pseudo-inverse on the kernel).
inline GridFunction apply_power(const GridFunction& f, double m, double power) {
    return apply_multiplier(f, [&](double xi) {
        const double g = xi * xi + m * m;
        if (g == 0.0) return power > 0.0 ? 0.0 : (power == 0.0 ? 1.0 : 0.0);
        return std::pow(g, power);
    });
}

inline GridFunction apply_spectral(const GridFunction& f, const OperatorParams& p) {
    p.validate();
    return apply_power(f, p.m, p.s);
}

// ---- singular-integral path -------------------------------------------

// Translation-invariant quadrature weights for
//   int_0^inf g(z) k(z) dz,  k(z) = C m^nu z^-nu K_nu(m z),  nu = (1+2s)/2,
// applied to even samples g(jh) with g(0) = 0. On [0, 2h] g is fitted by
// a z^2 + b z^4 through g(h), g(2h); beyond, piecewise quadratics on panels of
// two cells, integrated exactly against k.
struct SingularKernel {
    double s = 0.0, m = 0.0, h = 0.0;
    bool paired = true;
    std::vector<double> weights;  // weights[j-1] multiplies g(jh), j = 1..J
    double tail_mass = 0.0;       // int_{Zmax}^inf k

    std::size_t reach() const { return weights.size(); }
};

namespace detail {

inline double kernel_value(double s, double m, double z) {
    const double nu = 0.5 + s;
    const double C = frac_power_constant(1, s);
    return C * std::pow(m, nu) * std::pow(z, -nu) * std::exp(-m * z) * macdonald_k_scaled(nu, m * z);
}

// int_0^b z^p k(z) dz over dyadic panels, plus the leading-order remainder
// below the smallest panel.
inline double kernel_moment_near(double s, double m, double b, int p) {
    const double nu = 0.5 + s;
    double sum = 0.0;
    double hi = b;
    for (int k = 0; k < 60; ++k) {
        const double lo = 0.5 * hi;
        sum += gauss20([&](double z) { return std::pow(z, p) * kernel_value(s, m, z); }, lo, hi);
        hi = lo;
    }
    const double lead = frac_power_constant(1, s) * std::tgamma(nu) * std::pow(2.0, nu - 1.0);
    sum += lead * std::pow(hi, p - 2.0 * s) / (p - 2.0 * s);
    return sum;
}

inline SingularKernel build_kernel(double s, double m, double h, const SingularQuadConfig& q) {
    SingularKernel K;
    K.s = s;
    K.m = m;
    K.h = h;
    K.paired = q.pv_pairing;
    std::size_t J = static_cast<std::size_t>(std::ceil(q.far_cutoff / m / h));
    if (J % 2) ++J;
    J = std::max<std::size_t>(J, 4);
    K.weights.assign(J, 0.0);
    auto k = [&](double z) { return kernel_value(s, m, z); };

    if (q.pv_pairing) {
        const double M2 = kernel_moment_near(s, m, 2.0 * h, 2);
        const double M4 = kernel_moment_near(s, m, 2.0 * h, 4);
        const double h2 = h * h, h4 = h2 * h2;
        K.weights[0] += 16.0 * M2 / (12.0 * h2) - 4.0 * M4 / (12.0 * h4);
        K.weights[1] += -M2 / (12.0 * h2) + M4 / (12.0 * h4);
        for (std::size_t j0 = 2; j0 + 2 <= J; j0 += 2) {
            const double zc = (j0 + 1) * h;
            auto moment = [&](auto basis) {
                return h * gauss20([&](double u) { return basis(u) * k(zc + u * h); }, -1.0, 1.0);
            };
            K.weights[j0 - 1] += moment([](double u) { return 0.5 * u * (u - 1.0); });
            K.weights[j0] += moment([](double u) { return 1.0 - u * u; });
            K.weights[j0 + 1] += moment([](double u) { return 0.5 * u * (u + 1.0); });
        }
    } else {
        // Plain cell integrals, no correction for the singular cell.
        for (std::size_t j = 1; j <= J; ++j)
            K.weights[j - 1] = gauss20(k, (j - 0.5) * h, (j + 0.5) * h);
    }
    const double Z = J * h;
    K.tail_mass = k(Z) / m;
    return K;
}

}  // namespace detail

// Kernel weights are cached per (s, m, h, cutoff, pairing).
inline std::shared_ptr<const SingularKernel> singular_kernel(const OperatorParams& p, double h,
                                                             const SingularQuadConfig& q = {}) {
    p.validate_kernel_form();
    q.validate();
    using Key = std::tuple<double, double, double, double, bool>;
    static std::mutex mu;
    static std::map<Key, std::shared_ptr<const SingularKernel>> cache;
    const Key key{p.s, p.m, h, q.far_cutoff, q.pv_pairing};
    {
        std::lock_guard<std::mutex> lock(mu);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
    }
    auto K = std::make_shared<const SingularKernel>(detail::build_kernel(p.s, p.m, h, q));
    std::lock_guard<std::mutex> lock(mu);
    cache.emplace(key, K);
    return K;
}

namespace detail {

inline std::size_t wrap(std::ptrdiff_t i, std::size_t n) {
    const std::ptrdiff_t nn = static_cast<std::ptrdiff_t>(n);
    std::ptrdiff_t r = i % nn;
    return static_cast<std::size_t>(r < 0 ? r + nn : r);
}

inline double singular_at(const GridFunction& f, const SingularKernel& K, std::size_t i, double m2s) {
    const std::size_t n = f.size();
    const double fi = f[i];
    double acc = 0.0;
    for (std::size_t j = 1; j <= K.reach(); ++j) {
        const double g = f[wrap(static_cast<std::ptrdiff_t>(i + j), n)] +
                         f[wrap(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j), n)] - 2.0 * fi;
        acc += K.weights[j - 1] * g;
    }
    return m2s * fi - acc;
}

}  // namespace detail

inline GridFunction apply_singular_integral(const GridFunction& f, const OperatorParams& p,
                                            const SingularQuadConfig& q = {}) {
    auto K = singular_kernel(p, f.grid.h(), q);
    const double m2s = std::pow(p.m, 2.0 * p.s);
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = detail::singular_at(f, *K, i, m2s);
    return out;
}

// Same operator evaluated only at the listed nodes (others left at 0).
inline GridFunction apply_singular_integral_at(const GridFunction& f, const OperatorParams& p,
                                               const std::vector<std::size_t>& nodes,
                                               const SingularQuadConfig& q = {}) {
    auto K = singular_kernel(p, f.grid.h(), q);
    const double m2s = std::pow(p.m, 2.0 * p.s);
    GridFunction out(f.grid);
    for (std::size_t i : nodes) out[i] = detail::singular_at(f, *K, i, m2s);
    return out;
}

// Bound on the far-field truncation error of apply_singular_integral for f.
inline double singular_truncation_bound(const GridFunction& f, const OperatorParams& p,
                                        const SingularQuadConfig& q = {}) {
    auto K = singular_kernel(p, f.grid.h(), q);
    return 4.0 * max_abs(f) * K->tail_mass;
}

inline std::vector<std::size_t> nodes_within(const Grid& g, double radius) {
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < g.n; ++j)
        if (std::abs(g.x(j)) <= radius) out.push_back(j);
    return out;
}

// ---- subordination path ------------------------------------------------

namespace detail {

// (1/Gamma(-s)) int (e^{-t g} - 1) t^{-1-s} dt per mode, as the sum over a
// shared u = log t grid with spacing stride*du. Tails beyond the grid are
// added from their leading terms.
inline std::vector<double> subordination_multipliers(const Grid& g, double s, double m,
                                                     const SubordinationQuad& tq, int stride) {
    const std::size_t nk = g.n / 2 + 1;
    const double du = tq.du * stride;
    const int nodes = static_cast<int>(std::floor((tq.u_max - tq.u_min) / tq.du)) / stride;
    const double umax = tq.u_min + nodes * du;
    std::vector<double> mult(nk, 0.0);
    for (std::size_t k = 0; k < nk; ++k) {
        const double xi = g.xi(k);
        const double gam = xi * xi + m * m;
        double acc = 0.0;
        for (int i = 0; i <= nodes; ++i) {
            const double u = tq.u_min + i * du;
            const double t = std::exp(u);
            const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
            acc += w * std::expm1(-t * gam) * std::exp(-s * u);
        }
        acc *= du;
        acc += -std::exp(-s * umax) / s;
        acc += -gam * std::exp((1.0 - s) * tq.u_min) / (1.0 - s);
        mult[k] = acc / std::tgamma(-s);
    }
    return mult;
}

}  // namespace detail

inline GridFunction apply_subordination(const GridFunction& f, const OperatorParams& p,
                                        const SubordinationQuad& tq = {}) {
    p.validate();
    if (p.s >= 1.0) throw std::invalid_argument("subordination form needs s < 1");
    const auto fine = detail::subordination_multipliers(f.grid, p.s, p.m, tq, 1);
    const auto coarse = detail::subordination_multipliers(f.grid, p.s, p.m, tq, 2);
    double worst = 0.0;
    for (std::size_t k = 0; k < fine.size(); ++k)
        worst = std::max(worst, std::abs(fine[k] - coarse[k]) / std::abs(fine[k]));
    if (worst > tq.rel_tol)
        throw QuadratureFailure("apply_subordination: graded grid not converged (rel " + std::to_string(worst) + ")");
    auto c = forward_dft(f);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= fine[k];
    return inverse_dft(f.grid, c);
}

// ---- carre du champ ----------------------------------------------------

inline GridFunction carre_du_champ(const GridFunction& f, const GridFunction& g, const OperatorParams& p,
                                   const SingularQuadConfig& q = {}) {
    require_same_grid(f, g);
    auto K = singular_kernel(p, f.grid.h(), q);
    const double m2s = std::pow(p.m, 2.0 * p.s);
    const std::size_t n = f.size();
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (std::size_t j = 1; j <= K->reach(); ++j) {
            const std::size_t a = detail::wrap(static_cast<std::ptrdiff_t>(i + j), n);
            const std::size_t b = detail::wrap(static_cast<std::ptrdiff_t>(i) - static_cast<std::ptrdiff_t>(j), n);
            acc += K->weights[j - 1] * ((f[i] - f[a]) * (g[i] - g[a]) + (f[i] - f[b]) * (g[i] - g[b]));
        }
        out[i] = -acc - m2s * f[i] * g[i];
    }
    return out;
}

// Same remainder from the spectral operator: L(fg) - f L g - g L f.
inline GridFunction carre_du_champ_spectral(const GridFunction& f, const GridFunction& g, double m, double s) {
    const auto Lfg = apply_power(f * g, m, s);
    const auto Lf = apply_power(f, m, s);
    const auto Lg = apply_power(g, m, s);
    GridFunction out(f.grid);
    for (std::size_t i = 0; i < f.size(); ++i) out[i] = Lfg[i] - f[i] * Lg[i] - g[i] * Lf[i];
    return out;
}

// ---- identities --------------------------------------------------------

// C_{1,s} int_R (1 - e^{lambda z}) |z|^{-nu} K_nu(|z|) dz against its closed form.
inline CheckReport bessel_identity_check(double lambda_abs, int N, double s, double tol = 1e-5) {
    Stopwatch sw;
    if (!(lambda_abs >= 0.0 && lambda_abs <= 1.0)) throw std::domain_error("bessel identity: |lambda| must lie in [0,1]");
    if (!(s > 0.0 && s < 1.0)) throw std::domain_error("bessel identity: s must lie in (0,1)");
    if (N != 1) throw std::invalid_argument("bessel identity: only N = 1 is implemented");
    if (lambda_abs == 1.0 && !(N - 2.0 * s < 1.0))
        throw std::domain_error("bessel identity: divergent at |lambda| = 1 unless N - 2s < 1");

    const double nu = 0.5 * N + s;
    const double lam = lambda_abs;
    // (1 - cosh(lam z)) z^-nu K_nu(z), written to avoid cancellation and overflow
    auto integrand = [&](double z) {
        const double ks = macdonald_k_scaled(nu, z);
        const double zn = std::pow(z, -nu);
        if (lam * z < 1.0) {
            const double sh = std::sinh(0.5 * lam * z);
            return -2.0 * sh * sh * zn * std::exp(-z) * ks;
        }
        return zn * ks * (std::exp(-z) - 0.5 * (std::exp((lam - 1.0) * z) + std::exp(-(lam + 1.0) * z)));
    };

    double sum = 0.0;
    double lo = std::ldexp(1.0, -60);
    // below lo: -(lam^2/2) z^2 * Gamma(nu) 2^{nu-1} z^{-2nu}
    sum += -0.5 * lam * lam * std::tgamma(nu) * std::pow(2.0, nu - 1.0) * std::pow(lo, 3.0 - 2.0 * nu) /
           (3.0 - 2.0 * nu);
    const double zend = lam < 1.0 ? 50.0 + 46.0 / (1.0 - lam) : 4096.0;
    while (lo < zend) {
        const double hi = std::min(zend, lo + std::min(lo, 4.0));
        sum += gauss20(integrand, lo, hi);
        lo = hi;
    }
    double tail = 0.0;
    if (lam == 1.0) {
        // -(1/2) e^z K_nu(z) z^-nu ~ -(1/2) sqrt(pi/2) sum_k a_k z^{-nu-1/2-k}
        const double mu4 = 4.0 * nu * nu;
        double a = 1.0;
        for (int k = 0; k < 10; ++k) {
            if (k > 0) {
                const double odd = 2.0 * k - 1.0;
                a *= (mu4 - odd * odd) / (8.0 * k);
            }
            const double e = nu - 0.5 + k;
            tail += a * std::pow(zend, -e) / e;
        }
        tail *= -0.5 * std::sqrt(0.5 * std::numbers::pi);
    }
    sum += tail;
    const double C = frac_power_constant(N, s);
    const double value = 2.0 * C * sum;
    const double expected = lam == 1.0 ? -1.0 : std::pow(1.0 - lam * lam, s) - 1.0;

    CheckReport r;
    r.name = "bessel_identity";
    r.inputs = {{"lambda", lambda_abs}, {"N", N}, {"s", s}};
    r.set("quadrature", value).set("closed_form", expected).set("tail_contribution", 2.0 * C * tail);
    r.measured = std::abs(value - expected);
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    r.witness = {{"lambda", lambda_abs}, {"s", s}, {"quadrature", value}, {"closed_form", expected}};
    r.wall_time = sw.seconds();
    return r;
}

// Applies the singular-integral operator to window * e^{lambda x} and reports
// the largest relative deviation from (m^2 - lambda^2)^s e^{lambda x} on
// |x| <= length/16.
inline CheckReport eigenfunction_residual(double lambda, const OperatorParams& p, const GridFunction& window,
                                          double tol = 1e-3, const SingularQuadConfig& q = {}) {
    Stopwatch sw;
    p.validate_kernel_form();
    if (!(std::abs(lambda) < p.m))
        throw std::domain_error("eigenfunction_residual: |lambda| must be below m");
    const Grid& g = window.grid;
    GridFunction f(g);
    for (std::size_t j = 0; j < g.n; ++j) f[j] = window[j] * std::exp(lambda * g.x(j));
    const auto core = nodes_within(g, g.length / 16.0);
    const auto Lf = apply_singular_integral_at(f, p, core, q);
    const double mu = std::pow(p.m * p.m - lambda * lambda, p.s);
    double worst = 0.0;
    std::size_t arg = core.front();
    for (std::size_t j : core) {
        const double target = mu * std::exp(lambda * g.x(j));
        const double rel = std::abs(Lf[j] - target) / target;
        if (rel > worst) {
            worst = rel;
            arg = j;
        }
    }
    CheckReport r;
    r.name = "eigenfunction_residual";
    r.inputs = {{"lambda", lambda}, {"s", p.s}, {"m", p.m}, {"L", g.length}, {"n", g.n}};
    r.set("eigenvalue", mu).set("max_rel_residual", worst).set("truncation_bound", singular_truncation_bound(f, p, q));
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"x", g.x(arg)}, {"value", Lf[arg]}, {"target", mu * std::exp(lambda * g.x(arg))}};
    r.wall_time = sw.seconds();
    return r;
}

// Relative sup deviation of two applications of the operator on |x| <= radius.
inline CheckReport compare_applications(const std::string& name, const GridFunction& a, const GridFunction& b,
                                        const OperatorParams& p, double radius, double tol = 1e-3) {
    std::size_t arg = 0;
    const double err = relative_sup_error(a, b, radius, &arg);
    CheckReport r;
    r.name = name;
    r.inputs = {{"s", p.s}, {"m", p.m}, {"L", a.grid.length}, {"n", a.grid.n}, {"radius", radius}};
    r.measured = err;
    r.tolerance = tol;
    r.pass = err <= tol;
    r.witness = {{"x", a.grid.x(arg)}, {"a", a[arg]}, {"b", b[arg]}};
    return r;
}

}  // namespace frel
