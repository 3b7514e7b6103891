#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace frel {

struct BesselEvalConfig {
    double series_cutoff_z = 1.0;   // ascending series below, quadrature above
    double asymptotic_z = 30.0;     // Hankel expansion at and beyond
    double quad_rel_tol = 1e-13;
    int max_quad_nodes = 4096;

    void validate() const {
        if (!(series_cutoff_z > 0.0))
            throw std::invalid_argument("series_cutoff_z must be positive");
        if (!(quad_rel_tol > 0.0 && quad_rel_tol <= 1e-2))
            throw std::invalid_argument("quad_rel_tol must lie in (0, 1e-2]");
        if (max_quad_nodes < 64)
            throw std::invalid_argument("max_quad_nodes must be at least 64");
        if (!(asymptotic_z > series_cutoff_z))
            throw std::invalid_argument("asymptotic_z must exceed series_cutoff_z");
    }
};

class QuadratureFailure : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline bool is_nonpositive_integer(double x) {
    return x <= 0.0 && x == std::nearbyint(x);
}

inline double gamma(double x) {
    if (is_nonpositive_integer(x))
        throw std::domain_error("gamma: pole at x = " + std::to_string(x));
    return std::tgamma(x);
}

namespace detail {

// I_mu(z) by the ascending series, each term evaluated directly so that terms
// adjacent to a pole of 1/Gamma do not pollute the ones after it.
inline double bessel_i_series(double mu, double z) {
    const double half = 0.5 * z;
    double sum = 0.0;
    for (int k = 0; k < 160; ++k) {
        const double g = k + mu + 1.0;
        const double term = is_nonpositive_integer(g)
                                ? 0.0
                                : std::pow(half, mu + 2.0 * k) / (std::tgamma(k + 1.0) * std::tgamma(g));
        sum += term;
        if (k > 2 && k > -mu && std::abs(term) <= 1e-18 * std::abs(sum)) break;
    }
    return sum;
}

inline double k_series_noninteger(double nu, double z) {
    const double n = std::nearbyint(nu);
    const double frac = nu - n;
    const double sign = (static_cast<long>(n) % 2 == 0) ? 1.0 : -1.0;
    const double sin_nu_pi = sign * std::sin(std::numbers::pi * frac);
    return 0.5 * std::numbers::pi * (bessel_i_series(-nu, z) - bessel_i_series(nu, z)) / sin_nu_pi;
}

constexpr double integer_order_eps = 1e-6;

inline double k_series(double nu, double z) {
    const double n = std::nearbyint(nu);
    if (std::abs(nu - n) >= integer_order_eps) return k_series_noninteger(nu, z);
    // Near-integer order: interpolate between n - eps and n + eps. At nu = n
    // this is the plain average of the two one-sided values.
    const double lo = k_series_noninteger(n - integer_order_eps, z);
    const double hi = k_series_noninteger(n + integer_order_eps, z);
    const double w = (nu - (n - integer_order_eps)) / (2.0 * integer_order_eps);
    return lo + w * (hi - lo);
}

// e^z K_nu(z) from int_0^inf exp(-z(cosh u - 1)) cosh(nu u) du, trapezoid in u
// with step halving. The integrand is even and entire, so convergence is
// geometric in 1/h.
inline double k_quadrature_scaled(double nu, double z, const BesselEvalConfig& cfg) {
    auto logf = [&](double u) { return -z * (std::cosh(u) - 1.0); };
    auto f = [&](double u) {
        const double e = logf(u);
        return 0.5 * (std::exp(e + nu * u) + std::exp(e - nu * u));
    };
    const double upeak = std::asinh(nu / z);
    const double gpeak = logf(upeak) + nu * upeak;
    double U = upeak + 0.25;
    while (logf(U) + nu * U > gpeak - 46.0) U += 0.25;

    double h = 0.5;
    int nodes = static_cast<int>(std::ceil(U / h));
    double sum = 0.5 * f(0.0);
    for (int k = 1; k <= nodes; ++k) sum += f(k * h);
    double prev = h * sum;
    while (true) {
        const int next_nodes = 2 * nodes;
        if (next_nodes > cfg.max_quad_nodes)
            throw QuadratureFailure("macdonald_k: quadrature did not converge for nu=" +
                                    std::to_string(nu) + " z=" + std::to_string(z));
        h *= 0.5;
        for (int k = 1; k <= next_nodes; k += 2) sum += f(k * h);
        nodes = next_nodes;
        const double cur = h * sum;
        if (std::abs(cur - prev) <= cfg.quad_rel_tol * std::abs(cur)) return cur;
        prev = cur;
    }
}

// e^z K_nu(z) by the Hankel expansion; returns NaN when the smallest term is
// not below tol relative to the sum.
inline double k_asymptotic_scaled(double nu, double z, double tol) {
    const double mu = 4.0 * nu * nu;
    double term = 1.0, sum = 1.0;
    for (int k = 1; k < 200; ++k) {
        const double odd = 2.0 * k - 1.0;
        const double next = term * (mu - odd * odd) / (8.0 * k * z);
        if (std::abs(next) >= std::abs(term) && k > 1) break;
        term = next;
        sum += term;
        if (std::abs(term) <= 1e-17 * std::abs(sum)) break;
    }
    if (std::abs(term) > tol * std::abs(sum)) return std::numeric_limits<double>::quiet_NaN();
    return std::sqrt(std::numbers::pi / (2.0 * z)) * sum;
}

}  // namespace detail

enum class BesselBranch { series, quadrature, asymptotic };

inline BesselBranch macdonald_branch(double z, const BesselEvalConfig& cfg) {
    if (z < cfg.series_cutoff_z) return BesselBranch::series;
    if (z >= cfg.asymptotic_z) return BesselBranch::asymptotic;
    return BesselBranch::quadrature;
}

// e^z K_nu(z). Usable where K_nu itself underflows.
inline double macdonald_k_scaled(double nu, double z, const BesselEvalConfig& cfg = {}) {
    if (!(z > 0.0)) throw std::domain_error("macdonald_k: z must be positive");
    if (!(nu >= 0.0)) throw std::domain_error("macdonald_k: nu must be nonnegative");
    switch (macdonald_branch(z, cfg)) {
        case BesselBranch::series:
            return std::exp(z) * detail::k_series(nu, z);
        case BesselBranch::asymptotic: {
            const double v = detail::k_asymptotic_scaled(nu, z, cfg.quad_rel_tol);
            if (!std::isnan(v)) return v;
            return detail::k_quadrature_scaled(nu, z, cfg);
        }
        case BesselBranch::quadrature:
        default:
            return detail::k_quadrature_scaled(nu, z, cfg);
    }
}

inline double macdonald_k(double nu, double z, const BesselEvalConfig& cfg = {}) {
    if (!(z > 0.0)) throw std::domain_error("macdonald_k: z must be positive");
    if (!(nu >= 0.0)) throw std::domain_error("macdonald_k: nu must be nonnegative");
    if (macdonald_branch(z, cfg) == BesselBranch::series) return detail::k_series(nu, z);
    return std::exp(-z) * macdonald_k_scaled(nu, z, cfg);
}

// Branch-forced evaluations, exposed for consistency checks between paths.
inline double macdonald_k_by_series(double nu, double z) { return detail::k_series(nu, z); }
inline double macdonald_k_by_quadrature(double nu, double z, const BesselEvalConfig& cfg = {}) {
    return std::exp(-z) * detail::k_quadrature_scaled(nu, z, cfg);
}

inline double frac_power_constant(int N, double s) {
    if (N < 1) throw std::domain_error("frac_power_constant: N must be positive");
    if (!(s > 0.0 && s < 1.0)) throw std::domain_error("frac_power_constant: s must lie in (0,1)");
    return -std::pow(2.0, 1.0 + s - 0.5 * N) /
           (std::pow(std::numbers::pi, 0.5 * N) * gamma(-s));
}

// Closed-form s = 1/2 kernel with the (2 pi)^{N/2} (2/pi)^{1/2} prefactor.
// Under the unnormalized transform this equals (2 pi)^N times the probability
// density of the semigroup; see half_kernel_density.
inline double half_kernel_explicit(double t, double x, double m, int N) {
    if (!(t > 0.0)) throw std::domain_error("half_kernel_explicit: t must be positive");
    if (!(m > 0.0)) throw std::domain_error("half_kernel_explicit: m must be positive");
    if (N < 1) throw std::domain_error("half_kernel_explicit: N must be positive");
    const double r = std::sqrt(x * x + t * t);
    const double nu = 0.5 * (N + 1);
    const double pre = std::pow(2.0 * std::numbers::pi, 0.5 * N) * std::sqrt(2.0 / std::numbers::pi) *
                       std::pow(m, nu) * t;
    // r^{-nu} K_nu(m r), computed as r^{-nu} e^{-m r} (e^{m r} K_nu) to stay finite
    return pre * std::pow(r, -nu) * std::exp(-m * r) * macdonald_k_scaled(nu, m * r);
}

inline double explicit_kernel_fourier_factor(int N) {
    return std::pow(2.0 * std::numbers::pi, N);
}

// Density of the s = 1/2 semigroup: integrates to e^{-m t}.
inline double half_kernel_density(double t, double x, double m, int N) {
    return half_kernel_explicit(t, x, m, N) / explicit_kernel_fourier_factor(N);
}

}  // namespace frel
