#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace frel {

// Uniform periodic grid on [-length/2, length/2) with x_j = -length/2 + j h.
struct Grid {
    double length = 40.0;
    std::size_t n = 4096;

    double h() const { return length / static_cast<double>(n); }
    double x(std::size_t j) const { return -0.5 * length + static_cast<double>(j) * h(); }
    // Nonnegative wavenumbers 2 pi k / length, k = 0..n/2.
    double xi(std::size_t k) const { return 2.0 * std::numbers::pi * static_cast<double>(k) / length; }
    std::size_t index_of_origin() const { return n / 2; }

    void validate() const {
        if (!(length > 0.0)) throw std::invalid_argument("grid length must be positive");
        if (n < 8 || n % 2 != 0) throw std::invalid_argument("grid n must be even and at least 8");
    }
    bool operator==(const Grid&) const = default;
};

struct GridFunction {
    Grid grid;
    std::vector<double> values;

    GridFunction() = default;
    explicit GridFunction(const Grid& g, double fill = 0.0) : grid(g), values(g.n, fill) {}
    GridFunction(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.n) throw std::invalid_argument("GridFunction: size mismatch");
    }

    template <class F>
    static GridFunction sample(const Grid& g, F&& f) {
        GridFunction out(g);
        for (std::size_t j = 0; j < g.n; ++j) out.values[j] = f(g.x(j));
        return out;
    }

    std::size_t size() const { return values.size(); }
    double& operator[](std::size_t j) { return values[j]; }
    double operator[](std::size_t j) const { return values[j]; }

    bool all_finite() const {
        return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
    }
};

inline void require_same_grid(const GridFunction& a, const GridFunction& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("grid functions live on different grids");
}

inline GridFunction operator+(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] + b[j];
    return r;
}

inline GridFunction operator-(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] - b[j];
    return r;
}

inline GridFunction operator*(const GridFunction& a, const GridFunction& b) {
    require_same_grid(a, b);
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] * b[j];
    return r;
}

inline GridFunction operator*(double c, const GridFunction& a) {
    GridFunction r(a.grid);
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = c * a[j];
    return r;
}

// Trapezoid rule on the periodic grid (all nodes carry weight h).
inline double integrate(const GridFunction& f) {
    double s = 0.0;
    for (double v : f.values) s += v;
    return s * f.grid.h();
}

inline double inner(const GridFunction& f, const GridFunction& g) {
    require_same_grid(f, g);
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += f[j] * g[j];
    return s * f.grid.h();
}

inline double norm2_sq(const GridFunction& f) { return inner(f, f); }

// int w(x) f(x)^2 dx with w(x) = exp(lambda x).
inline double weighted_mass(const GridFunction& f, double lambda) {
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += std::exp(lambda * f.grid.x(j)) * f[j] * f[j];
    return s * f.grid.h();
}

inline double max_abs(const GridFunction& f) {
    double m = 0.0;
    for (double v : f.values) m = std::max(m, std::abs(v));
    return m;
}

// Largest |value| among nodes with |x| >= frac * length/2.
inline double seam_magnitude(const GridFunction& f, double frac = 0.95) {
    double m = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j)
        if (std::abs(f.grid.x(j)) >= frac * 0.5 * f.grid.length) m = std::max(m, std::abs(f[j]));
    return m;
}

// Relative sup-norm deviation of a from b over nodes with |x| <= radius.
inline double relative_sup_error(const GridFunction& a, const GridFunction& b, double radius,
                                 std::size_t* argmax = nullptr) {
    require_same_grid(a, b);
    double num = 0.0, den = 0.0;
    std::size_t arg = 0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (std::abs(a.grid.x(j)) > radius) continue;
        const double d = std::abs(a[j] - b[j]);
        if (d > num) {
            num = d;
            arg = j;
        }
        den = std::max(den, std::abs(b[j]));
    }
    if (argmax) *argmax = arg;
    return den > 0.0 ? num / den : num;
}

// ---- named profiles ------------------------------------------------------

inline GridFunction gaussian(const Grid& g, double width = 1.0, double center = 0.0, double amp = 1.0) {
    return GridFunction::sample(g, [&](double x) {
        const double z = (x - center) / width;
        return amp * std::exp(-z * z);
    });
}

inline GridFunction mode(const Grid& g, int k, double amp = 1.0) {
    return GridFunction::sample(
        g, [&](double x) { return amp * std::sin(2.0 * std::numbers::pi * k * (x + 0.5 * g.length) / g.length); });
}

// C-infinity step: 0 for u <= 0, 1 for u >= 1.
inline double smooth_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
}

// Equal to 1 on |x| <= inner and 0 on |x| >= outer.
inline double smooth_cutoff(double x, double inner, double outer) {
    return 1.0 - smooth_step((std::abs(x) - inner) / (outer - inner));
}

// Standard window: 1 on |x| <= length/8, 0 on |x| >= length/4.
inline GridFunction smooth_window(const Grid& g) {
    return GridFunction::sample(g, [&](double x) { return smooth_cutoff(x, g.length / 8.0, g.length / 4.0); });
}

inline GridFunction windowed_exponential(const Grid& g, double lambda) {
    return GridFunction::sample(
        g, [&](double x) { return smooth_cutoff(x, g.length / 8.0, g.length / 4.0) * std::exp(lambda * x); });
}

// Reads "x,value" rows (header optional) and resamples onto the grid by
// linear interpolation; zero outside the sampled range.
inline GridFunction from_csv(const Grid& g, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::pair<double, double>> pts;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        double x, v;
        if (ss >> x >> v) pts.emplace_back(x, v);
    }
    if (pts.size() < 2) throw std::runtime_error(path + ": need at least two samples");
    std::sort(pts.begin(), pts.end());
    return GridFunction::sample(g, [&](double x) {
        if (x < pts.front().first || x > pts.back().first) return 0.0;
        auto it = std::lower_bound(pts.begin(), pts.end(), std::make_pair(x, -1e308));
        if (it == pts.begin()) return it->second;
        auto lo = std::prev(it);
        const double w = (x - lo->first) / (it->first - lo->first);
        return lo->second + w * (it->second - lo->second);
    });
}

}  // namespace frel
