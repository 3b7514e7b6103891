#pragma once

#include <boost/math/quadrature/gauss.hpp>

namespace frel {

// Fixed 20-point Gauss-Legendre rule on [a, b].
template <class F>
double gauss20(F&& f, double a, double b) {
    using rule = boost::math::quadrature::gauss<double, 20>;
    const auto& x = rule::abscissa();
    const auto& w = rule::weights();
    const double c = 0.5 * (a + b), r = 0.5 * (b - a);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] == 0.0) {
            s += w[i] * f(c);
        } else {
            s += w[i] * (f(c - r * x[i]) + f(c + r * x[i]));
        }
    }
    return s * r;
}

}  // namespace frel
