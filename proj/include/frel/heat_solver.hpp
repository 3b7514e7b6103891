#pragma once

#include <complex>
#include <cmath>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "frel/check_report.hpp"
#include "frel/grid.hpp"
#include "frel/operator_core.hpp"
#include "frel/rng.hpp"
#include "frel/spectral.hpp"

namespace frel {

struct HeatState {
    double t = 0.0;
    GridFunction u;
};

struct PotentialField {
    std::function<double(double, double)> eval;  // (t, x) -> V
    double sup_norm = 0.0;

    GridFunction sample(const Grid& g, double t) const {
        auto v = GridFunction::sample(g, [&](double x) { return eval(t, x); });
        if (max_abs(v) > sup_norm * (1.0 + 1e-12))
            throw std::invalid_argument("potential exceeds its declared sup norm at t = " + std::to_string(t));
        return v;
    }

    static PotentialField zero() { return {[](double, double) { return 0.0; }, 0.0}; }
    static PotentialField constant(double c) { return {[c](double, double) { return c; }, std::abs(c)}; }
};

struct PicardConfig {
    double dt = 1e-2;
    int max_iters = 60;
    double fix_tol = 1e-12;

    void validate() const {
        if (!(dt > 0.0)) throw std::invalid_argument("picard: dt must be positive");
        if (max_iters < 1) throw std::invalid_argument("picard: max_iters must be positive");
        if (!(fix_tol > 0.0 && fix_tol <= 1e-2)) throw std::invalid_argument("picard: fix_tol must lie in (0, 1e-2]");
    }
};

class NoConvergence : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class SeamLeak : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Exponentially weighted integrals are only meaningful if u has decayed at
// the periodic seam.
inline void require_seam_decay(const GridFunction& u, double tol = 1e-10) {
    const double scale = max_abs(u);
    if (scale == 0.0) return;
    const double seam = seam_magnitude(u);
    if (seam > tol * scale)
        throw SeamLeak("relative seam magnitude " + std::to_string(seam / scale) + " exceeds " + std::to_string(tol) +
                       "; enlarge the box or tighten the data window");
}

inline double semigroup_symbol(double xi, double t, const OperatorParams& p) {
    return std::exp(-t * std::pow(xi * xi + p.m * p.m, p.s));
}

// Density of the semigroup at time t, centered at x = 0 (node n/2).
//
// With tilt mu in (0, m) the samples are taken along the shifted contour
// xi -> xi + i mu: K(x) = e^{-mu |x|} G(|x|), where G is the inverse transform
// of the shifted symbol. This keeps the far tail accurate well below the
// roundoff floor of the plain transform.
inline GridFunction fundamental_solution(double t, const OperatorParams& p, const Grid& g, double tilt = 0.0) {
    if (!(t > 0.0)) throw std::domain_error("fundamental_solution: t must be positive");
    p.validate();
    if (tilt == 0.0) {
        Spectrum c(g.n / 2 + 1);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] = (k % 2 ? -1.0 : 1.0) * semigroup_symbol(g.xi(k), t, p);
        return (1.0 / g.h()) * inverse_dft(g, c);
    }
    if (!(tilt > 0.0 && tilt < p.m)) throw std::domain_error("fundamental_solution: tilt must lie in (0, m)");
    std::vector<std::complex<double>> c(g.n);
    const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(g.n);
    for (std::ptrdiff_t k = -n / 2; k < n / 2; ++k) {
        const std::complex<double> z(2.0 * std::numbers::pi * static_cast<double>(k) / g.length, tilt);
        const auto sym = std::exp(-t * std::pow(z * z + p.m * p.m, p.s));
        c[static_cast<std::size_t>((k + n) % n)] = (k % 2 ? -1.0 : 1.0) * sym;
    }
    const auto G = backward_dft_complex(c);
    GridFunction K(g);
    const std::size_t o = g.index_of_origin();
    for (std::size_t j = o; j < g.n; ++j) {
        const double x = g.x(j);
        K[j] = std::exp(-tilt * x) * G[j].real() / g.length;
        if (j > o) K[2 * o - j] = K[j];
    }
    K[0] = std::exp(-tilt * 0.5 * g.length) * G[0].real() / g.length;
    return K;
}

inline double default_tilt(double lambda, double m) {
    const double a = std::abs(lambda);
    return std::max(0.0, a - 0.25 * (m - a));
}

// Trapezoid value of int e^{lambda x} K_t(x) dx against e^{-(m^2 - lambda^2)^s t}.
inline CheckReport weighted_l1_kernel(double t, double lambda, const OperatorParams& p, const Grid& g,
                                      double tol = 1e-3) {
    Stopwatch sw;
    if (!(std::abs(lambda) <= p.m)) throw std::domain_error("weighted_l1_kernel: |lambda| must not exceed m");
    const double tilt = std::abs(lambda) < p.m ? default_tilt(lambda, p.m) : 0.0;
    const auto K = fundamental_solution(t, p, g, tilt);
    double sum = 0.0;
    double seam = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double v = std::exp(lambda * g.x(j)) * K[j];
        sum += v;
        if (std::abs(g.x(j)) >= 0.475 * g.length) seam = std::max(seam, std::abs(v));
    }
    sum *= g.h();
    const double expected = std::exp(-std::pow(p.m * p.m - lambda * lambda, p.s) * t);
    CheckReport r;
    r.name = "weighted_l1_kernel";
    r.inputs = {{"t", t}, {"lambda", lambda}, {"s", p.s}, {"m", p.m}, {"L", g.length}, {"n", g.n}};
    r.set("trapezoid", sum).set("closed_form", expected).set("weighted_seam_value", seam).set("tilt", tilt);
    r.measured = std::abs(sum - expected) / expected;
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    r.witness = {{"trapezoid", sum}, {"closed_form", expected}};
    r.wall_time = sw.seconds();
    return r;
}

inline HeatState evolve_free(const GridFunction& u0, double t, const OperatorParams& p) {
    if (!(t >= 0.0)) throw std::domain_error("evolve_free: t must be nonnegative");
    p.validate();
    if (t == 0.0) return {0.0, u0};
    return {t, apply_multiplier(u0, [&](double xi) { return semigroup_symbol(xi, t, p); })};
}

struct PicardStep {
    int iterations = 0;
    double max_ratio = 0.0;  // largest ratio of successive iterate differences
    double final_increment = 0.0;
};

struct MildSolution {
    std::vector<HeatState> states;
    std::vector<PicardStep> steps;
};

// Trapezoid Duhamel step, iterated to a fixed point:
//   w = E(dt) (u_n + dt/2 F_n) + dt/2 F_{n+1}(w),  F = V u + S,
// with S an optional additive source.
inline MildSolution evolve_with_potential(const GridFunction& u0, const PotentialField& V, double T,
                                          const OperatorParams& p, const PicardConfig& cfg = {},
                                          const PotentialField* source = nullptr) {
    p.validate();
    cfg.validate();
    if (!(T > 0.0)) throw std::domain_error("evolve_with_potential: T must be positive");
    if (V.sup_norm * cfg.dt >= 0.5)
        throw std::invalid_argument("evolve_with_potential: ||V|| * dt must be below 1/2 (got " +
                                    std::to_string(V.sup_norm * cfg.dt) + ")");
    const Grid& g = u0.grid;
    const int nsteps = static_cast<int>(std::llround(T / cfg.dt));
    const double dt = T / nsteps;
    auto E = [&](const GridFunction& f) { return evolve_free(f, dt, p).u; };

    MildSolution out;
    out.states.push_back({0.0, u0});
    GridFunction u = u0;
    GridFunction Vn = V.sample(g, 0.0);
    const GridFunction zero(g);
    GridFunction Sn = source ? source->sample(g, 0.0) : zero;
    for (int n = 0; n < nsteps; ++n) {
        const double t1 = (n + 1) * dt;
        const GridFunction Vn1 = V.sample(g, t1);
        const GridFunction Sn1 = source ? source->sample(g, t1) : zero;
        const GridFunction base = E(u) + (0.5 * dt) * (E(Vn * u + Sn) + Sn1);
        GridFunction w = base + (0.5 * dt) * (Vn1 * u);
        PicardStep st;
        double prev = -1.0;
        for (;;) {
            GridFunction next = base + (0.5 * dt) * (Vn1 * w);
            const double inc = std::sqrt(norm2_sq(next - w));
            ++st.iterations;
            if (prev > 1e-14 * std::max(1.0, std::sqrt(norm2_sq(next))) && inc > 0.0)
                st.max_ratio = std::max(st.max_ratio, inc / prev);
            w = std::move(next);
            st.final_increment = inc;
            if (inc < cfg.fix_tol) break;
            if (st.iterations >= cfg.max_iters)
                throw NoConvergence("evolve_with_potential: no fixed point after " + std::to_string(cfg.max_iters) +
                                    " iterations at t = " + std::to_string(t1));
            prev = inc;
        }
        u = w;
        Vn = Vn1;
        Sn = Sn1;
        out.states.push_back({t1, u});
        out.steps.push_back(st);
    }
    return out;
}

// ||L^{s/2} u||^2 from the spectrum.
inline double dirichlet_energy(const GridFunction& u, const OperatorParams& p) {
    return spectral_quadratic_form(forward_dft(u), u.grid,
                                   [&](double xi) { return std::pow(xi * xi + p.m * p.m, p.s); });
}

// ||u(t)||^2 + 2 int_0^t ||L^{s/2} u||^2 against ||u0||^2, trapezoid in time.
inline CheckReport energy_identity_check(const GridFunction& u0, const OperatorParams& p, double T = 1.0,
                                         int steps = 100, double tol = 1e-4) {
    Stopwatch sw;
    const double dt = T / steps;
    const double m0 = norm2_sq(u0);
    double integral = 0.0;
    double prev = dirichlet_energy(u0, p);
    double worst = 0.0, worst_t = 0.0;
    for (int i = 1; i <= steps; ++i) {
        const auto u = evolve_free(u0, i * dt, p).u;
        const double e = dirichlet_energy(u, p);
        integral += 0.5 * dt * (prev + e);
        prev = e;
        const double dev = std::abs(norm2_sq(u) + 2.0 * integral - m0) / m0;
        if (dev > worst) {
            worst = dev;
            worst_t = i * dt;
        }
    }
    CheckReport r;
    r.name = "energy_identity";
    r.inputs = {{"s", p.s}, {"m", p.m}, {"T", T}, {"steps", steps}};
    r.set("initial_mass", m0).set("max_rel_deviation", worst);
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"t", worst_t}};
    r.wall_time = sw.seconds();
    return r;
}

// int e^{lambda x} u(t)^2 <= e^{-(m^2 - lambda^2/4)^s t} int e^{lambda x} u0^2 at each sampled t.
inline CheckReport weighted_decay_check(const GridFunction& u0, double lambda, const OperatorParams& p,
                                        const std::vector<double>& times) {
    Stopwatch sw;
    if (!(std::abs(lambda) <= 2.0 * p.m)) throw std::domain_error("weighted_decay_check: |lambda| must not exceed 2m");
    const double H0 = weighted_mass(u0, lambda);
    const double rate = std::pow(p.m * p.m - 0.25 * lambda * lambda, p.s);
    double min_slack = INFINITY, at = 0.0;
    for (double t : times) {
        if (t <= 0.0) continue;
        const auto u = evolve_free(u0, t, p).u;
        require_seam_decay(u);
        const double bound = std::exp(-rate * t) * H0;
        const double slack = (bound - weighted_mass(u, lambda)) / H0;
        if (slack < min_slack) {
            min_slack = slack;
            at = t;
        }
    }
    CheckReport r;
    r.name = "weighted_decay";
    r.inputs = {{"lambda", lambda}, {"s", p.s}, {"m", p.m}};
    r.set("min_rel_slack", min_slack);
    r.measured = -min_slack;
    r.tolerance = 0.0;
    r.pass = min_slack >= 0.0;
    r.witness = {{"t", at}, {"rel_slack", min_slack}};
    r.wall_time = sw.seconds();
    return r;
}

// max_t H(t) / (H(0)^{1-t} H(1)^t) over sampled t, with H(t) = int e^{lambda x} u(t)^2.
inline double log_convexity_ratio(const std::vector<double>& times, const std::vector<double>& H, double* worst_t) {
    const double H0 = H.front(), H1 = H.back();
    double worst = 1.0;
    if (worst_t) *worst_t = times.front();
    if (H0 == 0.0) return H1 == 0.0 ? 1.0 : INFINITY;
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        const double ratio = H[i] / (std::pow(H0, 1.0 - t) * std::pow(H1, t));
        if (ratio > worst) {
            worst = ratio;
            if (worst_t) *worst_t = t;
        }
    }
    return worst;
}

inline std::vector<double> uniform_times(int count) {
    std::vector<double> t(count);
    for (int i = 0; i < count; ++i) t[i] = static_cast<double>(i) / (count - 1);
    return t;
}

inline CheckReport log_convexity_check(const GridFunction& u0, double lambda, const OperatorParams& p,
                                       const std::vector<double>& times = uniform_times(21), double tol = 1e-6) {
    Stopwatch sw;
    if (!(std::abs(lambda) <= p.m)) throw std::domain_error("log_convexity_check: |lambda| must not exceed m");
    if (times.front() != 0.0 || times.back() != 1.0) throw std::invalid_argument("log_convexity_check: times must span [0,1]");
    std::vector<double> H;
    for (double t : times) {
        const auto u = evolve_free(u0, t, p).u;
        if (lambda != 0.0) require_seam_decay(u);
        H.push_back(weighted_mass(u, lambda));
    }
    double wt = 0.0;
    const double ratio = log_convexity_ratio(times, H, &wt);
    CheckReport r;
    r.name = "log_convexity";
    r.inputs = {{"lambda", lambda}, {"s", p.s}, {"m", p.m}, {"samples", times.size()}};
    r.set("max_ratio", ratio).set("H0", H.front()).set("H1", H.back());
    r.measured = ratio - 1.0;
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    r.witness = {{"t", wt}, {"ratio", ratio}};
    r.wall_time = sw.seconds();
    return r;
}

// H(t) = ||u(t)||^2 along the mild solution on [0,1]. Asserted only for V = 0;
// otherwise the smallest admissible kappa is reported.
inline CheckReport backward_uc_check(const GridFunction& u0, const PotentialField& V, const OperatorParams& p,
                                     const PicardConfig& cfg = {}, double tol = 1e-8) {
    Stopwatch sw;
    const auto sol = evolve_with_potential(u0, V, 1.0, p, cfg);
    std::vector<double> times, H;
    for (const auto& st : sol.states) {
        times.push_back(st.t);
        H.push_back(norm2_sq(st.u));
    }
    double wt = 0.0;
    const double kappa = log_convexity_ratio(times, H, &wt);
    CheckReport r;
    r.name = "backward_uc";
    r.inputs = {{"s", p.s}, {"m", p.m}, {"V_sup", V.sup_norm}, {"dt", cfg.dt}};
    r.set("kappa", kappa).set("H0", H.front()).set("H1", H.back());
    r.measured = kappa - 1.0;
    r.tolerance = tol;
    r.asserted = V.sup_norm == 0.0;
    r.pass = r.asserted ? r.measured <= tol : std::isfinite(kappa);
    r.witness = {{"t", wt}, {"kappa", kappa}};
    r.wall_time = sw.seconds();
    return r;
}

// Bounded random potential: smooth in t and x, |V| <= amplitude by construction.
inline PotentialField random_potential(Rng& rng, double amplitude, int modes = 4, double scale = 3.0) {
    std::vector<double> a(modes), k(modes), ph(modes), om(modes);
    double total = 0.0;
    for (int i = 0; i < modes; ++i) {
        a[i] = rng.uniform(-1.0, 1.0);
        k[i] = rng.uniform(0.0, 2.0) / scale;
        ph[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        om[i] = rng.uniform(0.0, 2.0 * std::numbers::pi);
        total += std::abs(a[i]);
    }
    const double c = total > 0.0 ? amplitude / total : 0.0;
    return {[=](double t, double x) {
                double v = 0.0;
                for (int i = 0; i < modes; ++i) v += a[i] * std::cos(k[i] * x + ph[i] + om[i] * t);
                return c * v;
            },
            amplitude};
}

// Localized random source S(t, x), |S| <= amplitude, Gaussian envelope of the given width.
inline PotentialField random_source(Rng& rng, double amplitude, double width = 3.0, int modes = 4) {
    auto base = random_potential(rng, 1.0, modes, width);
    const double c0 = rng.uniform(-2.0, 2.0);
    return {[=](double t, double x) {
                const double z = x / width;
                return amplitude * std::exp(-z * z) * std::cos(c0 * t) * base.eval(t, x);
            },
            amplitude};
}

// Fundamental solution at s = 1/2 against the explicit Bessel-form density on |x| <= radius.
inline CheckReport explicit_kernel_check(double t, const OperatorParams& p, const Grid& g, double radius = 10.0,
                                         double tol = 1e-4) {
    Stopwatch sw;
    if (p.s != 0.5) throw std::domain_error("explicit_kernel_check: the explicit form needs s = 1/2");
    const auto K = fundamental_solution(t, p, g);
    double worst = 0.0, at = 0.0;
    for (std::size_t j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        if (std::abs(x) > radius) continue;
        const double e = half_kernel_density(t, x, p.m, 1);
        const double rel = std::abs(K[j] - e) / e;
        if (rel > worst) {
            worst = rel;
            at = x;
        }
    }
    CheckReport r;
    r.name = "explicit_kernel";
    r.inputs = {{"t", t}, {"m", p.m}, {"L", g.length}, {"n", g.n}, {"radius", radius}};
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"x", at}};
    r.wall_time = sw.seconds();
    return r;
}

// int K_t = e^{-m^{2s} t}.
inline CheckReport kernel_mass_check(double t, const OperatorParams& p, const Grid& g, double tol = 1e-12) {
    Stopwatch sw;
    const double mass = integrate(fundamental_solution(t, p, g));
    const double expected = std::exp(-std::pow(p.m, 2.0 * p.s) * t);
    CheckReport r;
    r.name = "kernel_mass";
    r.inputs = {{"t", t}, {"s", p.s}, {"m", p.m}, {"L", g.length}, {"n", g.n}};
    r.set("mass", mass).set("closed_form", expected);
    r.measured = std::abs(mass - expected) / expected;
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    r.wall_time = sw.seconds();
    return r;
}

// V = c: the mild solution is e^{c t} K_t * u0.
inline CheckReport constant_potential_check(const GridFunction& u0, double c, const OperatorParams& p, double T = 1.0,
                                            const PicardConfig& cfg = {}, double tol = 1e-5) {
    Stopwatch sw;
    const auto sol = evolve_with_potential(u0, PotentialField::constant(c), T, p, cfg);
    const auto exact = std::exp(c * T) * evolve_free(u0, T, p).u;
    std::size_t arg = 0;
    const double err = relative_sup_error(sol.states.back().u, exact, 0.5 * u0.grid.length, &arg);
    CheckReport r;
    r.name = "constant_potential";
    r.inputs = {{"c", c}, {"s", p.s}, {"m", p.m}, {"T", T}, {"dt", cfg.dt}};
    r.measured = err;
    r.tolerance = tol;
    r.pass = err <= tol;
    r.witness = {{"x", u0.grid.x(arg)}};
    r.wall_time = sw.seconds();
    return r;
}

// Largest ratio of successive Picard increments against ||V|| dt.
inline CheckReport picard_contraction_check(const GridFunction& u0, const PotentialField& V, const OperatorParams& p,
                                            double T = 1.0, const PicardConfig& cfg = {}) {
    Stopwatch sw;
    const auto sol = evolve_with_potential(u0, V, T, p, cfg);
    double worst = 0.0;
    int at = 0, iters = 0;
    for (std::size_t i = 0; i < sol.steps.size(); ++i) {
        iters = std::max(iters, sol.steps[i].iterations);
        if (sol.steps[i].max_ratio > worst) {
            worst = sol.steps[i].max_ratio;
            at = static_cast<int>(i);
        }
    }
    const double bound = V.sup_norm * cfg.dt;
    CheckReport r;
    r.name = "picard_contraction";
    r.inputs = {{"V_sup", V.sup_norm}, {"dt", cfg.dt}, {"s", p.s}, {"m", p.m}};
    r.set("max_ratio", worst).set("max_iterations", iters);
    r.measured = worst;
    r.tolerance = bound;
    r.pass = worst <= bound;
    r.witness = {{"step", at}, {"t", (at + 1) * cfg.dt}};
    r.wall_time = sw.seconds();
    return r;
}

}  // namespace frel
