#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "frel/check_report.hpp"
#include "frel/grid.hpp"
#include "frel/operator_core.hpp"
#include "frel/rng.hpp"
#include "frel/spectral.hpp"

namespace frel {

// ---- weight ------------------------------------------------------------

// Time profile psi with closed-form derivatives of every order.
struct PsiProfile {
    enum class Kind { constant, reciprocal, oscillating, affine };
    Kind kind = Kind::constant;
    double c0 = 3.0, c1 = 0.0, c2 = 0.0;

    // psi = c
    static PsiProfile constant(double c) { return {Kind::constant, c, 0.0, 0.0}; }
    // psi = c / (1 + t)
    static PsiProfile reciprocal(double c) { return {Kind::reciprocal, c, 0.0, 0.0}; }
    // psi = mean + amp sin(2 pi freq t)
    static PsiProfile oscillating(double mean, double amp, double freq) {
        return {Kind::oscillating, mean, amp, freq};
    }
    // psi = c + slope t
    static PsiProfile affine(double c, double slope) { return {Kind::affine, c, slope, 0.0}; }

    double deriv(int k, double t) const {
        switch (kind) {
            case Kind::constant:
                return k == 0 ? c0 : 0.0;
            case Kind::reciprocal: {
                double f = 1.0;
                for (int i = 1; i <= k; ++i) f *= -static_cast<double>(i);
                return c0 * f / std::pow(1.0 + t, k + 1);
            }
            case Kind::oscillating: {
                if (k == 0) return c0 + c1 * std::sin(2.0 * std::numbers::pi * c2 * t);
                const double w = 2.0 * std::numbers::pi * c2;
                return c1 * std::pow(w, k) * std::sin(w * t + 0.5 * std::numbers::pi * k);
            }
            case Kind::affine:
                return k == 0 ? c0 + c1 * t : (k == 1 ? c1 : 0.0);
        }
        return 0.0;
    }
    double operator()(double t) const { return deriv(0, t); }

    // sup |psi^(k)| over [0, t_max]
    double sup_norm(int k, double t_max) const {
        switch (kind) {
            case Kind::constant:
                return k == 0 ? std::abs(c0) : 0.0;
            case Kind::reciprocal: {
                double f = 1.0;
                for (int i = 1; i <= k; ++i) f *= static_cast<double>(i);
                return std::abs(c0) * f;
            }
            case Kind::oscillating: {
                if (k == 0) return std::abs(c0) + std::abs(c1);
                return std::abs(c1) * std::pow(2.0 * std::numbers::pi * c2, k);
            }
            case Kind::affine:
                return k == 0 ? std::max(std::abs(c0), std::abs(c0 + c1 * t_max)) : (k == 1 ? std::abs(c1) : 0.0);
        }
        return 0.0;
    }
    bool is_constant() const { return kind == Kind::constant || (kind != Kind::reciprocal && c1 == 0.0); }

    json to_json() const {
        static const char* names[] = {"constant", "reciprocal", "oscillating", "affine"};
        return json{{"kind", names[static_cast<int>(kind)]}, {"c0", c0}, {"c1", c1}, {"c2", c2}};
    }
    static PsiProfile from_json(const json& j) {
        static const char* names[] = {"constant", "reciprocal", "oscillating", "affine"};
        const auto k = j.at("kind").get<std::string>();
        for (int i = 0; i < 4; ++i)
            if (k == names[i])
                return {static_cast<Kind>(i), j.at("c0").get<double>(), j.value("c1", 0.0), j.value("c2", 0.0)};
        throw std::invalid_argument("unknown psi kind '" + k + "'");
    }
};

// phi and the partial derivatives used by the bracket formulas.
struct PhiJet {
    double phi = 0.0, x = 0.0, xx = 0.0, t = 0.0, tx = 0.0, tt = 0.0;
};

// phi(t, x) = alpha (x / R + psi(t))^2 on t in [0, t_max].
struct QuadraticWeight {
    double alpha = 1.0;
    double R = 1.0;
    PsiProfile psi = PsiProfile::constant(3.0);
    double t_max = 1.0;

    double y(double t, double x) const { return x / R + psi(t); }
    double phi(double t, double x) const {
        const double v = y(t, x);
        return alpha * v * v;
    }
    PhiJet jet(double t, double x) const {
        const double v = y(t, x), p1 = psi.deriv(1, t), p2 = psi.deriv(2, t);
        PhiJet j;
        j.phi = alpha * v * v;
        j.x = 2.0 * alpha / R * v;
        j.xx = 2.0 * alpha / (R * R);
        j.t = 2.0 * alpha * v * p1;
        j.tx = 2.0 * alpha / R * p1;
        j.tt = 2.0 * alpha * p1 * p1 + 2.0 * alpha * v * p2;
        return j;
    }
    double psi1_norm() const { return psi.sup_norm(1, t_max); }
    double psi2_norm() const { return psi.sup_norm(2, t_max); }

    void validate() const {
        if (!(alpha > 0.0)) throw std::invalid_argument("quadratic weight: alpha must be positive");
        if (!(R > 0.0)) throw std::invalid_argument("quadratic weight: R must be positive");
        if (!(t_max >= 0.0)) throw std::invalid_argument("quadratic weight: t_max must be nonnegative");
        for (int i = 0; i <= 200; ++i) {
            const double v = psi(t_max * i / 200.0);
            if (!(v >= 0.0 && v <= 3.0)) throw std::invalid_argument("quadratic weight: psi must stay in [0, 3]");
        }
    }
    json to_json() const {
        return json{{"alpha", alpha}, {"R", R}, {"psi", psi.to_json()}, {"t_max", t_max}};
    }
    static QuadraticWeight from_json(const json& j) {
        return {j.at("alpha").get<double>(), j.at("R").get<double>(), PsiProfile::from_json(j.at("psi")),
                j.value("t_max", 1.0)};
    }
};

struct SymbolPoint {
    double x = 0.0, t = 0.0, xi = 0.0, tau = 0.0;
};

// {1 <= |x/R + psi(t)| <= 4}, optionally intersected with |x| <= R.
struct SupportAnnulus {
    QuadraticWeight w;
    double inner = 1.0, outer = 4.0;

    bool contains(double t, double x) const {
        const double v = std::abs(w.y(t, x));
        return v >= inner && v <= outer;
    }
    bool in_region(double t, double x) const { return contains(t, x) && std::abs(x) <= w.R; }
};

class ConstraintViolation : public std::domain_error {
  public:
    ConstraintViolation(const std::string& what, CheckReport r) : std::domain_error(what), report(std::move(r)) {}
    CheckReport report;
};

class SupportViolation : public std::domain_error {
  public:
    using std::domain_error::domain_error;
};

// ---- symbols -----------------------------------------------------------

struct SymbolValue {
    double a = 0.0, b = 0.0;
};

struct BracketValue {
    double value = 0.0;
    bool singular = false;
};

namespace detail {

// z = (xi + i u)^2 + m^2 and its polar form, u = phi_x.
struct ZPolar {
    double X, Y, rho, theta;
};

inline ZPolar z_polar(double xi, double m, double u) {
    const double X = xi * xi + m * m - u * u, Y = 2.0 * xi * u;
    return {X, Y, std::hypot(X, Y), std::atan2(Y, X)};
}

inline bool near_singular(const ZPolar& z, double xi, double m, double u) {
    return z.rho <= 1e-12 * (xi * xi + m * m + u * u);
}

// s z^{s-1}
inline std::complex<double> dpow(const ZPolar& z, double s) {
    return std::polar(s * std::pow(z.rho, s - 1.0), (s - 1.0) * z.theta);
}

}  // namespace detail

inline SymbolValue symbol_from_slope(double xi, double u, const OperatorParams& p) {
    const auto z = detail::z_polar(xi, p.m, u);
    if (z.rho == 0.0) return {};
    const double r = std::pow(z.rho, p.s);
    return {r * std::cos(p.s * z.theta), r * std::sin(p.s * z.theta)};
}

// a + i b = ((xi + i phi_x)^2 + m^2)^s, principal branch.
inline SymbolValue conjugated_symbol(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    return symbol_from_slope(pt.xi, w.jet(pt.t, pt.x).x, p);
}

// Symbol of e^phi (d_t + P_m(D)) e^{-phi}: (a - phi_t) + i (tau + b).
inline SymbolValue parabolic_symbol(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    const auto j = w.jet(pt.t, pt.x);
    const auto ab = symbol_from_slope(pt.xi, j.x, p);
    return {ab.a - j.t, pt.tau + ab.b};
}

// 4 s^2 phi_xx rho^{2s-2} (xi^2 + phi_x^2), rho = |z|.
inline BracketValue poisson_bracket(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    const auto j = w.jet(pt.t, pt.x);
    const auto z = detail::z_polar(pt.xi, p.m, j.x);
    const double base = 4.0 * p.s * p.s * j.xx * (pt.xi * pt.xi + j.x * j.x);
    BracketValue out;
    out.singular = p.s < 1.0 && detail::near_singular(z, pt.xi, p.m, j.x);
    if (p.s == 1.0)
        out.value = base;
    else if (z.rho == 0.0)
        out.value = base == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    else
        out.value = base * std::pow(z.rho, 2.0 * p.s - 2.0);
    return out;
}

// Pieces of the parabolic bracket
//   {a~, b~} = I + (II + III) + IVa + IVb - V
// with I = {a,b}, II + III = phi_tx b_xi, IVa + IVb = phi_tt, V = a_t.
struct ParabolicTerms {
    double I = 0.0, II = 0.0, III = 0.0, IVa = 0.0, IVb = 0.0, V = 0.0;
    double b_xi = 0.0, a_t = 0.0, phi_tx = 0.0, phi_tt = 0.0;
    double total = 0.0;
    bool singular = false;
};

inline ParabolicTerms parabolic_bracket_terms(const SymbolPoint& pt, const QuadraticWeight& w,
                                              const OperatorParams& p) {
    const auto j = w.jet(pt.t, pt.x);
    const double xi = pt.xi, u = j.x, m2 = p.m * p.m, s = p.s;
    const auto z = detail::z_polar(xi, p.m, u);
    ParabolicTerms T;
    const auto I = poisson_bracket(pt, w, p);
    T.I = I.value;
    T.singular = I.singular;
    T.phi_tx = j.tx;
    T.phi_tt = j.tt;
    const double v = w.y(pt.t, pt.x);
    const double p1 = w.psi.deriv(1, pt.t), p2 = w.psi.deriv(2, pt.t);
    T.IVa = 2.0 * w.alpha * p1 * p1;
    T.IVb = 2.0 * w.alpha * v * p2;
    if (z.rho == 0.0) {
        T.total = T.I;
        return T;
    }
    // b_xi = Im(s z^{s-1} z_xi) = 2 s rho^{s-2} [P sin(s theta) + Q cos(s theta)]
    const double P = xi * (xi * xi + m2 + u * u);
    const double Q = u * (m2 - xi * xi - u * u);
    const double pre = 2.0 * s * std::pow(z.rho, s - 2.0);
    const double sn = std::sin(s * z.theta), cs = std::cos(s * z.theta);
    T.b_xi = pre * (P * sn + Q * cs);
    T.II = j.tx * pre * P * sn;
    T.III = j.tx * pre * Q * cs;
    // z_t = i phi_tx z_xi, hence a_t = -phi_tx b_xi.
    T.a_t = -j.tx * T.b_xi;
    T.V = T.a_t;
    T.total = T.I + T.II + T.III + T.IVa + T.IVb - T.V;
    return T;
}

inline BracketValue parabolic_poisson_bracket(const SymbolPoint& pt, const QuadraticWeight& w,
                                              const OperatorParams& p) {
    const auto T = parabolic_bracket_terms(pt, w, p);
    return {T.total, T.singular};
}

// ---- finite-difference route ------------------------------------------

namespace detail {

template <class F>
double central4(F&& f, double h) {
    return (-f(2.0 * h) + 8.0 * f(h) - 8.0 * f(-h) + f(-2.0 * h)) / (12.0 * h);
}

// Steps that move z by about 1e-3 of its modulus, kept clear of the cut at
// xi = 0 when Re z < 0.
struct FdSteps {
    double xi, x, t;
};

inline FdSteps fd_steps(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    const auto j = w.jet(pt.t, pt.x);
    const auto z = z_polar(pt.xi, p.m, j.x);
    const double scale = std::max(z.rho, 1e-300);
    const double dz_xi = 2.0 * std::hypot(pt.xi, j.x);
    const double dz_x = j.xx * dz_xi;
    const double dz_t = std::abs(j.tx) * dz_xi;
    FdSteps h;
    h.xi = dz_xi > 0.0 ? 1e-3 * scale / dz_xi : 1e-3;
    if (z.X <= 0.0 && pt.xi != 0.0) h.xi = std::min(h.xi, 0.02 * std::abs(pt.xi));
    h.x = dz_x > 0.0 ? 1e-3 * scale / dz_x : 1e-3 * w.R;
    h.x = std::min(h.x, 1e-2 * w.R);
    h.t = dz_t > 0.0 ? 1e-3 * scale / dz_t : 1e-3;
    h.t = std::min(h.t, 1e-3);
    return h;
}

}  // namespace detail

// a_xi b_x - a_x b_xi from the symbol values alone.
inline double fd_poisson_bracket(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    const auto h = detail::fd_steps(pt, w, p);
    auto at = [&](double dxi, double dx) {
        SymbolPoint q = pt;
        q.xi += dxi;
        q.x += dx;
        return conjugated_symbol(q, w, p);
    };
    const double a_xi = detail::central4([&](double d) { return at(d, 0).a; }, h.xi);
    const double b_xi = detail::central4([&](double d) { return at(d, 0).b; }, h.xi);
    const double a_x = detail::central4([&](double d) { return at(0, d).a; }, h.x);
    const double b_x = detail::central4([&](double d) { return at(0, d).b; }, h.x);
    return a_xi * b_x - a_x * b_xi;
}

// Each piece of ParabolicTerms by differencing the symbol and phi directly;
// `total` is the full four-variable bracket of (a~, b~).
inline ParabolicTerms fd_parabolic_terms(const SymbolPoint& pt, const QuadraticWeight& w, const OperatorParams& p) {
    const auto h = detail::fd_steps(pt, w, p);
    auto sym = [&](double dxi, double dx, double dt, double dtau) {
        SymbolPoint q = pt;
        q.xi += dxi;
        q.x += dx;
        q.t += dt;
        q.tau += dtau;
        return parabolic_symbol(q, w, p);
    };
    auto ab = [&](double dxi, double dx, double dt) {
        SymbolPoint q = pt;
        q.xi += dxi;
        q.x += dx;
        q.t += dt;
        return conjugated_symbol(q, w, p);
    };
    ParabolicTerms T;
    T.I = fd_poisson_bracket(pt, w, p);
    T.b_xi = detail::central4([&](double d) { return ab(d, 0, 0).b; }, h.xi);
    T.a_t = detail::central4([&](double d) { return ab(0, 0, d).a; }, h.t);
    const double hx = 1e-3 * w.R, ht = 1e-3;
    T.phi_tx = detail::central4(
        [&](double dx) { return detail::central4([&](double dt) { return w.phi(pt.t + dt, pt.x + dx); }, ht); }, hx);
    T.phi_tt = (-w.phi(pt.t + 2 * ht, pt.x) + 16 * w.phi(pt.t + ht, pt.x) - 30 * w.phi(pt.t, pt.x) +
                16 * w.phi(pt.t - ht, pt.x) - w.phi(pt.t - 2 * ht, pt.x)) /
               (12 * ht * ht);
    T.V = T.a_t;

    const double at_xi = detail::central4([&](double d) { return sym(d, 0, 0, 0).a; }, h.xi);
    const double bt_xi = detail::central4([&](double d) { return sym(d, 0, 0, 0).b; }, h.xi);
    const double at_x = detail::central4([&](double d) { return sym(0, d, 0, 0).a; }, h.x);
    const double bt_x = detail::central4([&](double d) { return sym(0, d, 0, 0).b; }, h.x);
    const double at_t = detail::central4([&](double d) { return sym(0, 0, d, 0).a; }, h.t);
    const double bt_t = detail::central4([&](double d) { return sym(0, 0, d, 0).b; }, h.t);
    const double at_tau = detail::central4([&](double d) { return sym(0, 0, 0, d).a; }, 1e-2);
    const double bt_tau = detail::central4([&](double d) { return sym(0, 0, 0, d).b; }, 1e-2);
    T.total = at_xi * bt_x - at_x * bt_xi + at_tau * bt_t - at_t * bt_tau;
    return T;
}

// ---- positivity sweep --------------------------------------------------

// s alpha^{2s-1} / R^{2s}
inline double positivity_strength(const QuadraticWeight& w, const OperatorParams& p) {
    return p.s * std::pow(w.alpha, 2.0 * p.s - 1.0) / std::pow(w.R, 2.0 * p.s);
}

// ||psi'|| + ||psi''||^{1/2}
inline double psi_size(const QuadraticWeight& w) { return w.psi1_norm() + std::sqrt(w.psi2_norm()); }

// s^2 (alpha / R^2) (xi^2 + 4 alpha^2 / R^2)^{2s-1}
inline double positivity_envelope(double xi, const QuadraticWeight& w, const OperatorParams& p) {
    const double k = 2.0 * w.alpha / w.R;
    return p.s * p.s * w.alpha / (w.R * w.R) * std::pow(xi * xi + k * k, 2.0 * p.s - 1.0);
}

struct PositivitySweepSpec {
    int nx = 41;
    int nt = 11;
    int nxi = 400;
    int ndense = 40;  // extra nodes in [1.8, 2.2] alpha / R
    double xi_lo = 1e-3, xi_hi = 1e3;  // in units of alpha / R
    double c_cal = 0.0;               // hypothesis constant
    double c_floor = 0.0;             // asserted lower bound on the ratio
    double dominance = 0.1;           // |II|, |III|, |IVb|, |V| <= dominance * I
};

inline std::vector<double> positivity_xi_grid(const QuadraticWeight& w, const PositivitySweepSpec& spec) {
    const double k = w.alpha / w.R;
    std::vector<double> xi{0.0};
    const double l0 = std::log(spec.xi_lo), l1 = std::log(spec.xi_hi);
    for (int i = 0; i < spec.nxi; ++i) xi.push_back(k * std::exp(l0 + (l1 - l0) * i / (spec.nxi - 1)));
    for (int i = 0; i < spec.ndense; ++i) xi.push_back(k * (1.8 + 0.4 * i / std::max(1, spec.ndense - 1)));
    std::sort(xi.begin(), xi.end());
    return xi;
}

// (t, x) samples of K = annulus ∩ {|x| <= R}.
inline std::vector<std::pair<double, double>> region_samples(const QuadraticWeight& w, int nx, int nt) {
    SupportAnnulus K{w};
    std::vector<std::pair<double, double>> out;
    for (int it = 0; it < nt; ++it) {
        const double t = nt == 1 ? 0.0 : w.t_max * it / (nt - 1);
        for (int ix = 0; ix < nx; ++ix) {
            const double x = -w.R + 2.0 * w.R * ix / (nx - 1);
            if (K.in_region(t, x)) out.emplace_back(t, x);
        }
    }
    return out;
}

inline bool positivity_hypothesis_holds(const QuadraticWeight& w, const OperatorParams& p, double c_cal) {
    return p.s > 0.5 && p.s < 1.0 && p.m <= 2.0 * w.alpha / w.R * (1.0 + 1e-12) &&
           positivity_strength(w, p) >= c_cal * psi_size(w);
}

// Minimum over K x xi-grid of {a~,b~} / envelope, plus the dominance ratios
// of the four correction terms against I. Throws ConstraintViolation (with
// the full report attached) when the hypothesis fails.
inline CheckReport positivity_sweep(const QuadraticWeight& w, const OperatorParams& p,
                                    const PositivitySweepSpec& spec = {}) {
    Stopwatch sw;
    w.validate();
    CheckReport r;
    r.name = "positivity_sweep";
    r.inputs = {{"weight", w.to_json()}, {"s", p.s}, {"m", p.m}, {"nx", spec.nx}, {"nt", spec.nt},
                {"nxi", spec.nxi}, {"c_cal", spec.c_cal}, {"c_floor", spec.c_floor}};
    const auto xi = positivity_xi_grid(w, spec);
    const auto pts = region_samples(w, spec.nx, w.psi.is_constant() ? 1 : spec.nt);
    if (pts.empty()) throw std::invalid_argument("positivity sweep: region has no samples");

    double min_ratio = std::numeric_limits<double>::infinity(), min_half = min_ratio;
    double dom[4] = {0, 0, 0, 0};
    SymbolPoint arg{};
    ParabolicTerms argT{};
    long singular = 0, evaluated = 0;
    for (const auto& [t, x] : pts) {
        for (double k : xi) {
            const SymbolPoint q{x, t, k, 0.0};
            const auto T = parabolic_bracket_terms(q, w, p);
            if (T.singular || !std::isfinite(T.I)) {
                ++singular;
                continue;
            }
            ++evaluated;
            const double ratio = T.total / positivity_envelope(k, w, p);
            if (ratio < min_ratio) {
                min_ratio = ratio;
                arg = q;
                argT = T;
            }
            if (T.I > 0.0) {
                min_half = std::min(min_half, T.total / (0.5 * T.I));
                dom[0] = std::max(dom[0], std::abs(T.II) / T.I);
                dom[1] = std::max(dom[1], std::abs(T.III) / T.I);
                dom[2] = std::max(dom[2], std::abs(T.IVb) / T.I);
                dom[3] = std::max(dom[3], std::abs(T.V) / T.I);
            }
        }
    }
    const double strength = positivity_strength(w, p);
    r.set("min_ratio", min_ratio)
        .set("min_total_over_half_I", min_half)
        .set("max_II_over_I", dom[0])
        .set("max_III_over_I", dom[1])
        .set("max_IVb_over_I", dom[2])
        .set("max_V_over_I", dom[3])
        .set("strength", strength)
        .set("psi_sum_form", psi_size(w))
        .set("psi_max_form", std::max(w.psi1_norm(), w.psi2_norm()))
        .set("hypothesis_ratio", strength / std::max(psi_size(w), 1e-300))
        .set("singular_points", static_cast<double>(singular))
        .set("evaluated_points", static_cast<double>(evaluated));
    r.measured = min_ratio;
    r.tolerance = spec.c_floor;
    const bool dominated = *std::max_element(dom, dom + 4) <= spec.dominance;
    r.pass = min_ratio >= spec.c_floor && min_ratio > 0.0 && dominated;
    r.witness = {{"x", arg.x}, {"t", arg.t}, {"xi", arg.xi}, {"I", argT.I}, {"II", argT.II},
                 {"III", argT.III}, {"IVa", argT.IVa}, {"IVb", argT.IVb}, {"V", argT.V},
                 {"total", argT.total}};
    r.wall_time = sw.seconds();
    if (!positivity_hypothesis_holds(w, p, spec.c_cal)) {
        r.asserted = false;
        r.note = "hypothesis violated";
        throw ConstraintViolation("positivity sweep: hypothesis violated (strength " + std::to_string(strength) +
                                      ", needs " + std::to_string(spec.c_cal * psi_size(w)) + ")",
                                  r);
    }
    return r;
}

// ---- Garding hypothesis ------------------------------------------------

struct GardingSpec {
    int min_order = 4;
    int max_order = 7;  // asserted range; order max_order + 1 is reported only
    double C_ref = std::numeric_limits<double>::infinity();
    int nx = 7;
    int nt = 3;
    std::vector<double> xi_units{0.5, 1.0, 2.0, 4.0, 16.0};  // in units of alpha / R
    double step = 0.05;                                       // relative step per variable
};

// (4 alpha^2 / R^2)^{2s-3} (1 + sum_{k=1..4} ||psi^(k)||)
inline double garding_envelope(const QuadraticWeight& w, const OperatorParams& p) {
    double poly = 1.0;
    for (int k = 1; k <= 4; ++k) poly += w.psi.sup_norm(k, w.t_max);
    const double k2 = 4.0 * w.alpha * w.alpha / (w.R * w.R);
    return std::pow(k2, 2.0 * p.s - 3.0) * poly;
}

namespace detail {

// Nested central difference d^i_x d^j_t d^l_xi of f, step h per variable.
template <class F>
double mixed_difference(F&& f, const SymbolPoint& pt, int i, int j, int l, double hx, double ht, double hxi) {
    auto binom = [](int n, int k) {
        double r = 1.0;
        for (int q = 1; q <= k; ++q) r = r * (n - k + q) / q;
        return r;
    };
    double acc = 0.0;
    for (int a = 0; a <= i; ++a)
        for (int b = 0; b <= j; ++b)
            for (int c = 0; c <= l; ++c) {
                const double sgn = ((a + b + c) % 2 == 0) ? 1.0 : -1.0;
                SymbolPoint q = pt;
                q.x += (0.5 * i - a) * hx;
                q.t += (0.5 * j - b) * ht;
                q.xi += (0.5 * l - c) * hxi;
                acc += sgn * binom(i, a) * binom(j, b) * binom(l, c) * f(q);
            }
    return acc / (std::pow(hx, i) * std::pow(ht, j) * std::pow(hxi, l));
}

}  // namespace detail

// Max over sampled points of |d^delta_{x,t} d^beta_xi {a~,b~}| per total order,
// normalized by garding_envelope. Points avoid the annulus edges and xi = 0,
// where the symbol is not smooth.
inline CheckReport garding_hypothesis_check(const QuadraticWeight& w, const OperatorParams& p,
                                            const GardingSpec& spec = {}) {
    Stopwatch sw;
    if (!(p.s > 0.5 && p.s < 1.0)) throw std::invalid_argument("garding check needs 1/2 < s < 1");
    w.validate();
    CheckReport r;
    r.name = "garding_hypothesis";
    r.inputs = {{"weight", w.to_json()}, {"s", p.s}, {"m", p.m}, {"min_order", spec.min_order},
                {"max_order", spec.max_order}, {"C_ref", spec.C_ref}};
    const bool moving = !w.psi.is_constant();
    const int nt = moving ? spec.nt : 1;
    const double hx = spec.step * w.R, ht = spec.step;
    auto f = [&](const SymbolPoint& q) { return parabolic_bracket_terms(q, w, p).total; };

    std::vector<SymbolPoint> pts;
    for (int it = 0; it < nt; ++it) {
        const double t = nt == 1 ? 0.5 * w.t_max : w.t_max * (0.1 + 0.8 * it / (nt - 1));
        for (int ix = 0; ix < spec.nx; ++ix) {
            const double x = -0.8 * w.R + 1.6 * w.R * ix / (spec.nx - 1);
            const double v = std::abs(w.y(t, x));
            if (v < 1.25 || v > 3.75) continue;
            for (double u : spec.xi_units) pts.push_back({x, t, u * w.alpha / w.R, 0.0});
        }
    }
    if (pts.empty()) throw std::invalid_argument("garding check: no interior samples");

    const double env = garding_envelope(w, p);
    double worst = 0.0;
    json worst_at;
    std::vector<double> per_order;
    for (int order = spec.min_order; order <= spec.max_order + 1; ++order) {
        double M = 0.0;
        json at;
        for (int i = 0; i <= order; ++i)
            for (int j = 0; j <= order - i; ++j) {
                if (j > 0 && !moving) continue;
                const int l = order - i - j;
                for (const auto& q : pts) {
                    const double hxi = spec.step * std::min(q.xi, w.alpha / w.R);
                    const double d = std::abs(detail::mixed_difference(f, q, i, j, l, hx, ht, hxi));
                    if (d > M) {
                        M = d;
                        at = {{"x", q.x}, {"t", q.t}, {"xi", q.xi}, {"dx", i}, {"dt", j}, {"dxi", l}};
                    }
                }
            }
        per_order.push_back(M);
        r.set("max_order_" + std::to_string(order), M);
        if (order <= spec.max_order && M / env > worst) {
            worst = M / env;
            worst_at = at;
        }
    }
    r.set("envelope", env);
    r.set("next_over_last", per_order.back() / per_order[per_order.size() - 2]);
    r.measured = worst;
    r.tolerance = spec.C_ref;
    r.pass = std::isfinite(worst) && worst <= spec.C_ref;
    r.witness = worst_at;
    r.wall_time = sw.seconds();
    return r;
}

// ---- operator matrices -------------------------------------------------

// First column of the periodic grid operator (xi^2 + m^2)^power.
inline std::vector<double> spectral_circulant(const Grid& g, double m, double power) {
    GridFunction e(g);
    e[0] = 1.0;
    return apply_power(e, m, power).values;
}

inline Eigen::MatrixXd spectral_matrix(const Grid& g, double m, double power) {
    const auto c = spectral_circulant(g, m, power);
    const std::size_t n = g.n;
    Eigen::MatrixXd S(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) S(j, k) = c[(j + n - k) % n];
    return S;
}

inline constexpr double kPhiCap = 700.0;

// diag(e^phi) S diag(e^-phi) at time t, entries formed as e^{phi_j - phi_k} S_jk.
inline Eigen::MatrixXd conjugated_operator_matrix(const QuadraticWeight& w, const OperatorParams& p, const Grid& g,
                                                  double t = 0.0) {
    const std::size_t n = g.n;
    std::vector<double> phi(n);
    for (std::size_t j = 0; j < n; ++j) phi[j] = w.phi(t, g.x(j));
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    if (*hi - *lo > kPhiCap)
        throw std::overflow_error("conjugated operator: phi range " + std::to_string(*hi - *lo) +
                                  " exceeds the cap; reduce alpha or the box");
    const auto c = spectral_circulant(g, p.m, p.s);
    Eigen::MatrixXd M(n, n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) M(j, k) = std::exp(phi[j] - phi[k]) * c[(j + n - k) % n];
    return M;
}

inline Eigen::VectorXd to_vector(const GridFunction& f) {
    return Eigen::Map<const Eigen::VectorXd>(f.values.data(), static_cast<Eigen::Index>(f.size()));
}

// Rows of the grid lying in K at time t.
inline std::vector<std::size_t> region_rows(const QuadraticWeight& w, const Grid& g, double t) {
    SupportAnnulus K{w};
    std::vector<std::size_t> rows;
    for (std::size_t j = 0; j < g.n; ++j)
        if (K.in_region(t, g.x(j))) rows.push_back(j);
    return rows;
}

// s = 1: compares [S, A] f with 4 phi_xx (-f'' + phi_x^2 f) on the rows of K
// for each test vector, S and A the symmetric and antisymmetric parts of the
// conjugated matrix.
inline CheckReport s1_commutator_check(const QuadraticWeight& w, double m, const Grid& g,
                                       const std::vector<GridFunction>& tests, double tol = 1e-8) {
    Stopwatch sw;
    OperatorParams p{1.0, m, 1};
    const auto M = conjugated_operator_matrix(w, p, g, 0.0);
    const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    const Eigen::MatrixXd A = 0.5 * (M - M.transpose());
    const auto rows = region_rows(w, g, 0.0);
    CheckReport r;
    r.name = "s1_commutator";
    r.inputs = {{"weight", w.to_json()}, {"m", m}, {"L", g.length}, {"n", g.n}, {"tests", tests.size()}};
    double worst = 0.0, recompose = (S + A - M).cwiseAbs().maxCoeff() / M.cwiseAbs().maxCoeff();
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < tests.size(); ++i) {
        const Eigen::VectorXd f = to_vector(tests[i]);
        const Eigen::VectorXd lhs = S * (A * f) - A * (S * f);
        const auto d2 = apply_power(tests[i], 0.0, 1.0);
        double num = 0.0, den = 0.0;
        for (std::size_t j : rows) {
            const auto J = w.jet(0.0, g.x(j));
            const double ref = 4.0 * J.xx * (d2[j] + J.x * J.x * tests[i][j]);
            num = std::max(num, std::abs(lhs(j) - ref));
            den = std::max(den, std::abs(ref));
        }
        const double e = num / den;
        if (e > worst) {
            worst = e;
            worst_i = i;
        }
    }
    r.set("recomposition", recompose);
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol && recompose <= 1e-14;
    r.witness = {{"test_index", worst_i}};
    r.wall_time = sw.seconds();
    return r;
}

// ||(S + A) f||^2 = ||S f||^2 + ||A f||^2 + <[S, A] f, f> for M = S + A.
inline CheckReport decomposition_identity_check(const Eigen::MatrixXd& M, const std::vector<GridFunction>& tests,
                                                double tol = 1e-8) {
    const Eigen::MatrixXd S = 0.5 * (M + M.transpose());
    const Eigen::MatrixXd A = 0.5 * (M - M.transpose());
    CheckReport r;
    r.name = "decomposition_identity";
    double worst = 0.0;
    for (const auto& t : tests) {
        const Eigen::VectorXd f = to_vector(t);
        const Eigen::VectorXd Sf = S * f, Af = A * f;
        const double lhs = (Sf + Af).squaredNorm();
        const double rhs = Sf.squaredNorm() + Af.squaredNorm() + f.dot(S * Af - A * Sf);
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(lhs, 1e-300));
    }
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    return r;
}

// ---- quadratic Carleman ------------------------------------------------

enum class CarlemanMode { elliptic, parabolic };

inline const char* to_string(CarlemanMode m) { return m == CarlemanMode::elliptic ? "elliptic" : "parabolic"; }

// Samples f(t_i, .) and d_t f(t_i, .) on a uniform time grid; elliptic
// families use a single slice at t = 0 and leave ft empty.
struct SpaceTimeFunction {
    std::vector<double> times;
    std::vector<GridFunction> f, ft;
    double dt = 0.0;
};

struct QuadraticCarlemanTerms {
    double rhs = 0.0;        // ||e^phi (d_t +) P e^-phi f||^2 over K
    double grad = 0.0;       // s^2 (alpha/R^2) ||P^{(2s-1)/2} f||^2
    double mass = 0.0;       // s^2 (alpha^{4s-1}/R^{4s}) ||f||^2
    double leak = 0.0;       // mass fraction of f outside K
};

namespace detail {

inline double smooth_bump(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }
inline double smooth_bump_dt(double u) {
    if (std::abs(u) >= 1.0) return 0.0;
    const double q = 1.0 - u * u;
    return -2.0 * u / (q * q) * std::exp(-1.0 / q);
}

// e^phi P e^-phi f on `rows`, summing only over the support of f.
inline std::vector<double> conjugated_apply_rows(const GridFunction& f, const QuadraticWeight& w,
                                                 const std::vector<double>& circ, double t,
                                                 const std::vector<std::size_t>& rows) {
    const auto& g = f.grid;
    const std::size_t n = g.n;
    std::vector<std::size_t> cols;
    for (std::size_t k = 0; k < n; ++k)
        if (f[k] != 0.0) cols.push_back(k);
    std::vector<double> phi(n);
    for (std::size_t j = 0; j < n; ++j) phi[j] = w.phi(t, g.x(j));
    std::vector<double> out(rows.size(), 0.0);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const std::size_t j = rows[r];
        double acc = 0.0;
        for (std::size_t k : cols) {
            const double e = phi[j] - phi[k];
            if (e > kPhiCap) throw std::overflow_error("conjugated apply: phi range exceeds the cap");
            acc += std::exp(e) * circ[(j + n - k) % n] * f[k];
        }
        out[r] = acc;
    }
    return out;
}

}  // namespace detail

// x-interval (scaled by R) inside K for every t in [0, t_max].
inline std::pair<double, double> static_support_interval(const QuadraticWeight& w) {
    double lo = -1.0, hi = 1.0;
    for (int i = 0; i <= 400; ++i) {
        const double ps = w.psi(w.t_max * i / 400.0);
        lo = std::max(lo, 1.0 - ps);
        hi = std::min(hi, 4.0 - ps);
    }
    if (!(hi > lo)) throw std::invalid_argument("annulus has no time-independent x-interval");
    return {lo * w.R, hi * w.R};
}

// Coefficients of one spatial profile: [a_0, b_0, ..., a_4, b_4] against
// cos(pi k u), sin(pi k u) times a bump; b_0 multiplies the zero function.
inline constexpr std::size_t kProfileCoefficients = 10;

inline std::size_t annulus_coefficient_count(CarlemanMode mode) {
    return mode == CarlemanMode::elliptic ? kProfileCoefficients : 2 * kProfileCoefficients;
}

// Smooth f compactly supported inside the time-independent part of K.
// Parabolic functions carry a bump eta(t) on (0, t_max) and a linear-in-t mix
// of two spatial profiles. Linear in coef.
inline SpaceTimeFunction annulus_function(const Grid& g, const QuadraticWeight& w, CarlemanMode mode,
                                          const std::vector<double>& coef, int nt = 48) {
    if (coef.size() != annulus_coefficient_count(mode))
        throw std::invalid_argument("annulus_function: wrong coefficient count");
    auto [lo, hi] = static_support_interval(w);
    const double c = 0.5 * (lo + hi), half = 0.45 * (hi - lo);
    auto profile = [&](std::size_t off) {
        return GridFunction::sample(g, [&](double x) {
            const double u = (x - c) / half;
            if (std::abs(u) >= 1.0) return 0.0;
            double v = 0.0;
            for (std::size_t k = 0; k < 5; ++k)
                v += coef[off + 2 * k] * std::cos(std::numbers::pi * k * u) +
                     coef[off + 2 * k + 1] * std::sin(std::numbers::pi * k * u);
            return v * detail::smooth_bump(u);
        });
    };
    SpaceTimeFunction F;
    const auto g1 = profile(0);
    if (mode == CarlemanMode::elliptic) {
        F.times = {0.0};
        F.f = {g1};
        return F;
    }
    const auto g2 = profile(kProfileCoefficients);
    F.dt = w.t_max / nt;
    for (int i = 0; i <= nt; ++i) {
        const double t = i * F.dt, tc = t / w.t_max - 0.5;
        const double u = 2.0 * tc;
        const double eta = detail::smooth_bump(u), eta_t = detail::smooth_bump_dt(u) * 2.0 / w.t_max;
        GridFunction f(g), ft(g);
        for (std::size_t j = 0; j < g.n; ++j) {
            f[j] = eta * (g1[j] + tc * g2[j]);
            ft[j] = eta_t * (g1[j] + tc * g2[j]) + eta * g2[j] / w.t_max;
        }
        F.times.push_back(t);
        F.f.push_back(std::move(f));
        F.ft.push_back(std::move(ft));
    }
    return F;
}

// Coefficients ~ N(0, 1/(1+k)^2).
inline SpaceTimeFunction random_annulus_function(const Grid& g, const QuadraticWeight& w, CarlemanMode mode,
                                                 Rng& rng, int nt = 48) {
    std::vector<double> coef(annulus_coefficient_count(mode));
    for (std::size_t i = 0; i < coef.size(); ++i) coef[i] = rng.normal() / (1.0 + static_cast<double>((i % kProfileCoefficients) / 2));
    return annulus_function(g, w, mode, coef, nt);
}

// c_pos > 0 also enforces the positivity hypothesis in parabolic mode.
inline void check_carleman_preconditions(const QuadraticWeight& w, const OperatorParams& p, CarlemanMode mode,
                                         double C_cal, double c_pos = 0.0) {
    w.validate();
    if (mode == CarlemanMode::elliptic) {
        if (!(p.s >= 0.5 && p.s <= 1.0)) throw std::domain_error("elliptic Carleman needs 1/2 <= s <= 1");
        if (!(w.psi.kind == PsiProfile::Kind::constant && w.psi.c0 == 3.0))
            throw std::domain_error("elliptic Carleman needs psi = 3");
    } else if (!(p.s > 0.5 && p.s <= 1.0)) {
        throw std::domain_error("parabolic Carleman needs 1/2 < s <= 1");
    } else if (c_pos > 0.0 && positivity_strength(w, p) < c_pos * psi_size(w)) {
        throw std::domain_error("parabolic Carleman needs s alpha^{2s-1} / R^{2s} >= c (||psi'|| + ||psi''||^{1/2})");
    }
    if (p.m > 2.0 * w.alpha / w.R * (1.0 + 1e-12)) throw std::domain_error("Carleman needs m <= 2 alpha / R");
    if (std::pow(w.alpha, 4.0 * p.s - 1.0) < C_cal * std::pow(w.R, 4.0 * p.s))
        throw std::domain_error("Carleman needs alpha^{4s-1} >= C R^{4s}");
}

inline QuadraticCarlemanTerms quadratic_carleman_terms(const SpaceTimeFunction& F, const QuadraticWeight& w,
                                                       const OperatorParams& p, CarlemanMode mode) {
    QuadraticCarlemanTerms T;
    if (F.f.empty()) return T;
    const Grid& g = F.f.front().grid;
    const auto circ = spectral_circulant(g, p.m, p.s);
    const double h = g.h();
    const double kg = p.s * p.s * w.alpha / (w.R * w.R);
    const double km = p.s * p.s * std::pow(w.alpha, 4.0 * p.s - 1.0) / std::pow(w.R, 4.0 * p.s);
    double inside = 0.0, total = 0.0;
    const std::size_t ns = F.f.size();
    for (std::size_t i = 0; i < ns; ++i) {
        const double t = F.times[i];
        const auto& f = F.f[i];
        const double wt = mode == CarlemanMode::elliptic ? 1.0 : ((i == 0 || i + 1 == ns) ? 0.5 : 1.0) * F.dt;
        SupportAnnulus K{w};
        for (std::size_t j = 0; j < g.n; ++j) {
            const double v = f[j] * f[j];
            total += wt * v;
            if (K.in_region(t, g.x(j))) inside += wt * v;
        }
        if (max_abs(f) == 0.0) continue;
        const auto rows = region_rows(w, g, t);
        auto Pf = detail::conjugated_apply_rows(f, w, circ, t, rows);
        double rhs = 0.0;
        for (std::size_t r = 0; r < rows.size(); ++r) {
            double v = Pf[r];
            if (mode == CarlemanMode::parabolic) {
                const std::size_t j = rows[r];
                v += F.ft[i][j] - w.jet(t, g.x(j)).t * f[j];
            }
            rhs += v * v;
        }
        T.rhs += wt * rhs * h;
        T.grad += wt * kg * norm2_sq(apply_power(f, p.m, 0.5 * (2.0 * p.s - 1.0)));
        T.mass += wt * km * norm2_sq(f);
    }
    T.leak = total > 0.0 ? (total - inside) / total : 0.0;
    return T;
}

// c1 grad + c2 mass <= rhs for every member of the family.
inline CheckReport carleman_quadratic_check(const std::vector<SpaceTimeFunction>& family, const QuadraticWeight& w,
                                            const OperatorParams& p, CarlemanMode mode, double c1, double c2,
                                            double C_cal, double c_pos = 0.0) {
    Stopwatch sw;
    check_carleman_preconditions(w, p, mode, C_cal, c_pos);
    CheckReport r;
    r.name = std::string("carleman_quadratic_") + to_string(mode);
    r.inputs = {{"weight", w.to_json()}, {"s", p.s}, {"m", p.m}, {"c1", c1}, {"c2", c2}, {"C", C_cal}, {"c_pos", c_pos},
                {"family", family.size()}};
    double worst = -std::numeric_limits<double>::infinity(), min_slack = std::numeric_limits<double>::infinity();
    std::size_t worst_i = 0;
    QuadraticCarlemanTerms worst_T;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const auto T = quadratic_carleman_terms(family[i], w, p, mode);
        if (T.leak > 1e-12) throw SupportViolation("Carleman family member " + std::to_string(i) + " leaks outside K");
        const double lhs = c1 * T.grad + c2 * T.mass;
        // (lhs - rhs) / rhs; f = 0 counts as 0 <= 0
        const double v = T.rhs > 0.0 ? (lhs - T.rhs) / T.rhs : (lhs > 0.0 ? 1.0 : -1.0);
        if (v > worst) {
            worst = v;
            worst_i = i;
            worst_T = T;
        }
        min_slack = std::min(min_slack, -v);
    }
    r.set("min_relative_slack", min_slack);
    r.measured = worst;
    r.tolerance = 0.0;
    r.pass = family.empty() || worst <= 0.0;
    r.witness = {{"index", worst_i}, {"rhs", worst_T.rhs}, {"grad", worst_T.grad}, {"mass", worst_T.mass}};
    r.wall_time = sw.seconds();
    return r;
}

// Half of the smallest rhs/grad and rhs/mass ratios over the family, so that
// c1 grad + c2 mass <= rhs for each member.
inline std::pair<double, double> fit_carleman_constants(const std::vector<QuadraticCarlemanTerms>& terms) {
    double rg = std::numeric_limits<double>::infinity(), rm = rg;
    for (const auto& T : terms) {
        if (T.rhs <= 0.0) continue;
        rg = std::min(rg, T.rhs / T.grad);
        rm = std::min(rm, T.rhs / T.mass);
    }
    return {0.5 * rg, 0.5 * rm};
}

// ---- conjugation of matrix powers --------------------------------------

// Dirichlet second difference (unit spacing) plus m^2 I.
inline Eigen::MatrixXd discrete_laplacian(int n, double m) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        L(i, i) = 2.0 + m * m;
        if (i > 0) L(i, i - 1) = -1.0;
        if (i + 1 < n) L(i, i + 1) = -1.0;
    }
    return L;
}

inline Eigen::MatrixXd spd_power(const Eigen::MatrixXd& L, double s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    return es.eigenvectors() * es.eigenvalues().array().pow(s).matrix().asDiagonal() * es.eigenvectors().transpose();
}

// B^s for B similar to an SPD matrix, from B's own (non-orthogonal) eigenbasis.
inline Eigen::MatrixXd similar_power(const Eigen::MatrixXd& B, double s) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(B);
    const Eigen::MatrixXcd V = es.eigenvectors();
    const Eigen::VectorXcd mu = es.eigenvalues();
    if (mu.imag().cwiseAbs().maxCoeff() > 1e-8 * mu.real().cwiseAbs().maxCoeff() || mu.real().minCoeff() <= 0.0)
        throw std::domain_error("similar_power: spectrum is not positive real");
    const Eigen::VectorXcd ms = mu.real().array().pow(s).cast<std::complex<double>>().matrix();
    const Eigen::MatrixXcd P = V * ms.asDiagonal() * V.inverse();
    return P.real();
}

// E L^s E^-1 against (E L E^-1)^s, E = diag(e^phi).
inline CheckReport appendix_conjugation_check(int dim, double s, const std::vector<double>& phi, double m = 1.0,
                                              double tol = 1e-10) {
    if (dim < 1) throw std::invalid_argument("conjugation check: dim must be positive");
    if (!(s > -1.0 && s <= 1.0 && s != 0.0)) throw std::invalid_argument("conjugation check: s must be in (-1, 1] \\ {0}");
    if (static_cast<int>(phi.size()) != dim) throw std::invalid_argument("conjugation check: phi size mismatch");
    const auto [lo, hi] = std::minmax_element(phi.begin(), phi.end());
    if (std::exp(*hi - *lo) > 1e8) throw std::domain_error("conjugation check: e^phi is too ill-conditioned");
    Stopwatch sw;
    const auto L = discrete_laplacian(dim, m);
    Eigen::VectorXd e(dim), ei(dim);
    for (int i = 0; i < dim; ++i) {
        e(i) = std::exp(phi[i]);
        ei(i) = std::exp(-phi[i]);
    }
    const Eigen::MatrixXd left = e.asDiagonal() * spd_power(L, s) * ei.asDiagonal();
    const Eigen::MatrixXd B = e.asDiagonal() * L * ei.asDiagonal();
    const Eigen::MatrixXd right = s == 1.0 ? B : similar_power(B, s);
    CheckReport r;
    r.name = "appendix_conjugation";
    r.inputs = {{"dim", dim}, {"s", s}, {"m", m}, {"phi_range", *hi - *lo}};
    r.measured = (left - right).norm() / left.norm();
    r.tolerance = tol;
    r.pass = r.measured <= tol;
    Eigen::Index ri, ci;
    (left - right).cwiseAbs().maxCoeff(&ri, &ci);
    r.witness = {{"row", ri}, {"col", ci}, {"left", left(ri, ci)}, {"right", right(ri, ci)}};
    r.wall_time = sw.seconds();
    return r;
}

}  // namespace frel
