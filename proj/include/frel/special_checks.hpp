#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "frel/check_report.hpp"
#include "frel/special_functions.hpp"

namespace frel {

inline std::vector<double> log_spaced(double lo, double hi, int count) {
    std::vector<double> z(count);
    for (int i = 0; i < count; ++i) z[i] = lo * std::pow(hi / lo, count == 1 ? 0.0 : static_cast<double>(i) / (count - 1));
    return z;
}

// K_{1/2}(z) against sqrt(pi / (2z)) e^{-z}.
inline CheckReport macdonald_half_check(double z_lo = 1e-4, double z_hi = 40.0, int count = 200, double tol = 1e-10) {
    Stopwatch sw;
    double worst = 0.0, at = z_lo;
    for (double z : log_spaced(z_lo, z_hi, count)) {
        const double ref = std::sqrt(std::numbers::pi / (2.0 * z)) * std::exp(-z);
        const double e = std::abs(macdonald_k(0.5, z) - ref) / ref;
        if (e > worst) {
            worst = e;
            at = z;
        }
    }
    CheckReport r;
    r.name = "macdonald_half_closed_form";
    r.inputs = {{"nu", 0.5}, {"z_lo", z_lo}, {"z_hi", z_hi}, {"samples", count}};
    r.set("max_rel_error", worst);
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"z", at}, {"value", macdonald_k(0.5, at)}};
    r.wall_time = sw.seconds();
    return r;
}

// max |K_nu(z) 2 (z/2)^nu / Gamma(nu) - 1| over log-spaced z in [z_lo, z_hi].
inline CheckReport small_z_law_check(double nu, double z_lo = 1e-8, double z_hi = 1e-3, int count = 40,
                                     double tol = 0.05) {
    Stopwatch sw;
    double worst = 0.0, at = z_lo;
    for (double z : log_spaced(z_lo, z_hi, count)) {
        const double ratio = macdonald_k(nu, z) * 2.0 * std::pow(0.5 * z, nu) / gamma(nu);
        if (std::abs(ratio - 1.0) >= worst) {
            worst = std::abs(ratio - 1.0);
            at = z;
        }
    }
    CheckReport r;
    r.name = "macdonald_small_z_law";
    r.inputs = {{"nu", nu}, {"z_lo", z_lo}, {"z_hi", z_hi}, {"samples", count}};
    r.set("max_abs_ratio_deviation", worst);
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"z", at}};
    r.wall_time = sw.seconds();
    return r;
}

// max |K_nu(z) e^z z^{1/2} / sqrt(pi/2) - 1| over log-spaced z in [z_lo, z_hi].
// The leading correction is (4 nu^2 - 1) / (8 z), so at z = 30 the law holds
// within 0.05 only for nu <= ~1.8.
inline CheckReport large_z_law_check(double nu, double z_lo = 30.0, double z_hi = 500.0, int count = 40,
                                     double tol = 0.05) {
    Stopwatch sw;
    double worst = 0.0, at = z_lo;
    for (double z : log_spaced(z_lo, z_hi, count)) {
        const double ratio = macdonald_k_scaled(nu, z) * std::sqrt(z) / std::sqrt(0.5 * std::numbers::pi);
        if (std::abs(ratio - 1.0) >= worst) {
            worst = std::abs(ratio - 1.0);
            at = z;
        }
    }
    CheckReport r;
    r.name = "macdonald_large_z_law";
    r.inputs = {{"nu", nu}, {"z_lo", z_lo}, {"z_hi", z_hi}, {"samples", count}};
    r.set("max_abs_ratio_deviation", worst).set("leading_correction_at_z_lo", (4.0 * nu * nu - 1.0) / (8.0 * z_lo));
    r.measured = worst;
    r.tolerance = tol;
    r.pass = worst <= tol;
    r.witness = {{"z", at}};
    r.wall_time = sw.seconds();
    return r;
}

}  // namespace frel
